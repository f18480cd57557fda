//! Optimistic-Adapt-ML-Prod and its sleeping-experts extension.
//!
//! Weights are kept in log space. At step `t` the learner finds `alpha` with
//! `<p_t(alpha), l_{t-1}> = alpha` by bisection, sets the optimistic estimates
//! `m_{t,k} = alpha - l_{t-1,k}`, and plays
//! `p_{t,k} ∝ eta_k w_k exp(eta_k m_{t,k})`. After seeing `l_t` it records the
//! instantaneous regrets `r_{t,k} = <p_t, l_t> - l_{t,k}`, accumulates
//! `(r - m)^2`, shrinks the per-expert rate to
//! `min(1/4, sqrt(ln K / (1 + sum (r - m)^2)))` and applies
//! `w <- (w exp(eta r - eta^2 (r - m)^2))^(eta_new / eta)`.
//!
//! [`SleepingProd`] runs the same update over the `K T` experts `(s, k)`:
//! expert `(s, k)` suffers the learner's own loss before step `s` and arm
//! `k`'s loss from `s` on. Asleep experts have zero instantaneous regret and a
//! zero estimate, so their state never moves; they are created only when they
//! wake.

use crate::banditalg::check_loss_vector;
use crate::error::{Error, Result};
use crate::gdexperts::SimplexPoint;
use crate::policy::ExpertPolicy;

/// Largest per-expert learning rate.
pub const ETA_CAP: f64 = 0.25;

/// State of one expert.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpertState {
    pub log_weight: f64,
    pub eta: f64,
    /// Sum of `(r - m)^2` so far.
    pub cum_sq_error: f64,
}

impl ExpertState {
    pub fn initial(log_weight: f64, ln_experts: f64) -> Self {
        Self {
            log_weight,
            eta: learning_rate(ln_experts, 0.0),
            cum_sq_error: 0.0,
        }
    }

    /// One multiplicative step with regret `r` and estimate `m`.
    pub fn step(&mut self, r: f64, m: f64, ln_experts: f64) {
        let err = (r - m) * (r - m);
        let old_eta = self.eta;
        self.cum_sq_error += err;
        self.eta = learning_rate(ln_experts, self.cum_sq_error);
        self.log_weight =
            (self.eta / old_eta) * (self.log_weight + old_eta * r - old_eta * old_eta * err);
    }

    pub fn to_bits(&self) -> [u64; 3] {
        [
            self.log_weight.to_bits(),
            self.eta.to_bits(),
            self.cum_sq_error.to_bits(),
        ]
    }
}

pub fn learning_rate(ln_experts: f64, cum_sq_error: f64) -> f64 {
    ETA_CAP.min((ln_experts / (1.0 + cum_sq_error)).sqrt())
}

/// Iteration cap for the fixed-point search at horizon `T`.
pub fn bisection_iterations(horizon: usize) -> usize {
    let t = horizon.max(1) as f64;
    2 + t.log2().ceil() as usize
}

/// Solves `f(alpha) = alpha` on `[0, 1]` by sign bisection on `f(alpha) - alpha`.
///
/// `f` must map `[0, 1]` into `[0, 1]`. Returns `(alpha, residual)` where
/// residual is `|f(alpha) - alpha|`.
pub fn bisect_fixed_point<F: FnMut(f64) -> f64>(
    mut f: F,
    tolerance: f64,
    max_iter: usize,
) -> (f64, f64) {
    let g0 = f(0.0);
    if g0 <= tolerance {
        return (0.0, g0.abs());
    }
    let g1 = f(1.0) - 1.0;
    if g1 >= -tolerance {
        return (1.0, g1.abs());
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut best = (0.5, f64::INFINITY);
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        let g = f(mid) - mid;
        if g.abs() < best.1 {
            best = (mid, g.abs());
        }
        if g.abs() <= tolerance {
            break;
        }
        if g > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    best
}

/// Softmax of `base_j + eta_j alpha`, written into `out`.
fn softmax_into(base: &[f64], etas: &[f64], alpha: f64, shift: f64, out: &mut [f64]) -> f64 {
    let mut total = 0.0;
    for ((o, b), e) in out.iter_mut().zip(base).zip(etas) {
        *o = (b + e * alpha - shift).exp();
        total += *o;
    }
    total
}

/// What the learner did at its most recent step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub alpha: f64,
    /// `|<p_t(alpha), l_{t-1}> - alpha|`.
    pub residual: f64,
    pub estimates: Vec<f64>,
    pub play: Vec<f64>,
    pub prev_loss: Vec<f64>,
    /// Instantaneous regrets, filled in by the update.
    pub regrets: Option<Vec<f64>>,
}

/// Optimistic-Adapt-ML-Prod over `K` experts.
#[derive(Debug, Clone)]
pub struct ProdExperts {
    experts: Vec<ExpertState>,
    ln_experts: f64,
    horizon: usize,
    tolerance: f64,
    prev_loss: Vec<f64>,
    steps: usize,
    record: Option<StepRecord>,
}

impl ProdExperts {
    pub fn new(arms: usize, horizon: usize) -> Result<Self> {
        if arms == 0 || horizon == 0 {
            return Err(Error::InvalidParameter(format!(
                "K and T must be positive, got K={arms}, T={horizon}"
            )));
        }
        let ln_experts = (arms as f64).ln();
        Ok(Self {
            experts: vec![ExpertState::initial(-ln_experts, ln_experts); arms],
            ln_experts,
            horizon,
            tolerance: 1.0 / horizon as f64,
            prev_loss: vec![0.0; arms],
            steps: 0,
            record: None,
        })
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn experts(&self) -> &[ExpertState] {
        &self.experts
    }

    pub fn last_record(&self) -> Option<&StepRecord> {
        self.record.as_ref()
    }

    fn base_logits(&self) -> (Vec<f64>, Vec<f64>) {
        let base = self
            .experts
            .iter()
            .zip(&self.prev_loss)
            .map(|(e, l)| e.eta.ln() + e.log_weight - e.eta * l)
            .collect();
        let etas = self.experts.iter().map(|e| e.eta).collect();
        (base, etas)
    }

    /// `alpha` with `|<p(alpha), l_{t-1}> - alpha|` within tolerance.
    pub fn fixed_point_alpha(&self) -> (f64, f64) {
        if self.experts.len() == 1 {
            return (self.prev_loss[0], 0.0);
        }
        let (base, etas) = self.base_logits();
        let shift = base.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut buf = vec![0.0; base.len()];
        let prev = &self.prev_loss;
        bisect_fixed_point(
            |alpha| {
                let total = softmax_into(&base, &etas, alpha, shift, &mut buf);
                buf.iter().zip(prev).map(|(w, l)| w * l).sum::<f64>() / total
            },
            self.tolerance,
            bisection_iterations(self.horizon),
        )
    }

    pub fn play_step(&mut self) -> SimplexPoint {
        let k = self.experts.len();
        let (alpha, residual) = self.fixed_point_alpha();
        let play = if k == 1 {
            vec![1.0]
        } else {
            let (base, etas) = self.base_logits();
            let shift = base.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut p = vec![0.0; k];
            let total = softmax_into(&base, &etas, alpha, shift, &mut p);
            p.iter_mut().for_each(|w| *w /= total);
            p
        };
        self.record = Some(StepRecord {
            step: self.steps + 1,
            alpha,
            residual,
            estimates: self.prev_loss.iter().map(|l| alpha - l).collect(),
            play: play.clone(),
            prev_loss: self.prev_loss.clone(),
            regrets: None,
        });
        SimplexPoint::from_normalized(play)
    }

    pub fn update_step(&mut self, loss: &[f64]) -> Result<()> {
        check_loss_vector(self.experts.len(), loss)?;
        let record = match &mut self.record {
            Some(r) if r.step == self.steps + 1 => r,
            _ => return Err(Error::Invariant("update without a matching play".into())),
        };
        let mixed: f64 = record.play.iter().zip(loss).map(|(p, l)| p * l).sum();
        let regrets: Vec<f64> = loss.iter().map(|l| mixed - l).collect();
        if self.experts.len() > 1 {
            for ((e, &r), &m) in self.experts.iter_mut().zip(&regrets).zip(&record.estimates) {
                e.step(r, m, self.ln_experts);
            }
        }
        record.regrets = Some(regrets);
        self.prev_loss.copy_from_slice(loss);
        self.steps += 1;
        Ok(())
    }
}

impl ExpertPolicy for ProdExperts {
    fn arms(&self) -> usize {
        self.experts.len()
    }

    fn play(&mut self) -> SimplexPoint {
        self.play_step()
    }

    fn update(&mut self, loss: &[f64]) -> Result<()> {
        self.update_step(loss)
    }

    fn horizon(&self) -> Option<usize> {
        Some(self.horizon)
    }

    fn clone_box(&self) -> Box<dyn ExpertPolicy> {
        Box::new(self.clone())
    }
}

/// Per-step checks of the sleeping reduction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SleepingDiagnostics {
    pub step: usize,
    pub alpha: f64,
    pub residual: f64,
    /// Total probability on asleep experts.
    pub asleep_mass: f64,
    /// `|<p~_t, l~_t> - <p_t, l_t>|`.
    pub identity_gap: f64,
    /// Largest `|r~|` over asleep experts.
    pub max_asleep_regret: f64,
    /// Largest `|r~_{(s,k)} - r_{t,k}|` over awake experts.
    pub max_awake_regret_gap: f64,
    /// `|sum p~ r~|`.
    pub weighted_regret: f64,
}

/// Optimistic-Adapt-ML-Prod over the sleeping experts `(s, k)`.
#[derive(Debug, Clone)]
pub struct SleepingProd {
    arms: usize,
    horizon: usize,
    ln_experts: f64,
    initial: ExpertState,
    /// Expert `(s, k)` lives at `(s - 1) K + k`.
    experts: Vec<ExpertState>,
    eager: bool,
    tolerance: f64,
    prev_loss: Vec<f64>,
    steps: usize,
    touched_max: usize,
    pending: Option<Pending>,
    diagnostics: SleepingDiagnostics,
}

#[derive(Debug, Clone)]
struct Pending {
    alpha: f64,
    /// `p~` over awake experts, in storage order.
    awake: Vec<f64>,
    asleep_mass: f64,
    play: Vec<f64>,
}

impl SleepingProd {
    /// Lazy pool: an expert is stored from its wake step on.
    pub fn new(arms: usize, horizon: usize) -> Result<Self> {
        Self::build(arms, horizon, false)
    }

    /// Stores and updates all `K T` experts from the start.
    pub fn new_eager(arms: usize, horizon: usize) -> Result<Self> {
        Self::build(arms, horizon, true)
    }

    fn build(arms: usize, horizon: usize, eager: bool) -> Result<Self> {
        if arms == 0 || horizon == 0 {
            return Err(Error::InvalidParameter(format!(
                "K and T must be positive, got K={arms}, T={horizon}"
            )));
        }
        let total = arms as f64 * horizon as f64;
        let ln_experts = total.ln();
        let initial = ExpertState::initial(-ln_experts, ln_experts);
        let experts = if eager {
            vec![initial; arms * horizon]
        } else {
            Vec::with_capacity(arms * horizon)
        };
        Ok(Self {
            arms,
            horizon,
            ln_experts,
            initial,
            experts,
            eager,
            tolerance: 1.0 / horizon as f64,
            prev_loss: vec![0.0; arms],
            steps: 0,
            touched_max: 0,
            pending: None,
            diagnostics: SleepingDiagnostics::default(),
        })
    }

    pub fn initial_state(&self) -> ExpertState {
        self.initial
    }

    /// Stored expert states in `(s, k)` order.
    pub fn experts(&self) -> &[ExpertState] {
        &self.experts
    }

    /// State of expert `(s, k)` with `s` 1-based; `None` if not stored.
    pub fn expert(&self, s: usize, k: usize) -> Option<&ExpertState> {
        self.experts.get((s - 1) * self.arms + k)
    }

    pub fn stored(&self) -> usize {
        self.experts.len()
    }

    /// Largest number of experts updated in one step so far.
    pub fn touched_max(&self) -> usize {
        self.touched_max
    }

    pub fn diagnostics(&self) -> &SleepingDiagnostics {
        &self.diagnostics
    }

    pub fn step(&self) -> usize {
        self.steps
    }

    /// Plays `p_t`, the awake part of `p~_t` folded onto arms.
    pub fn sleeping_play(&mut self) -> SimplexPoint {
        let t = self.steps + 1;
        let k = self.arms;
        if !self.eager {
            while self.experts.len() < (t * k).min(k * self.horizon) {
                self.experts.push(self.initial);
            }
        }
        let awake_len = (t * k).min(self.experts.len());
        let awake = &self.experts[..awake_len];
        let base: Vec<f64> = awake
            .iter()
            .enumerate()
            .map(|(j, e)| e.eta.ln() + e.log_weight - e.eta * self.prev_loss[j % k])
            .collect();
        let etas: Vec<f64> = awake.iter().map(|e| e.eta).collect();
        let shift = base.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut buf = vec![0.0; awake_len];
        let prev = &self.prev_loss;

        let (alpha, residual) = if k * self.horizon == 1 {
            (prev[0], 0.0)
        } else {
            bisect_fixed_point(
                |alpha| {
                    let total = softmax_into(&base, &etas, alpha, shift, &mut buf);
                    buf.iter()
                        .enumerate()
                        .map(|(j, w)| w * prev[j % k])
                        .sum::<f64>()
                        / total
                },
                self.tolerance,
                bisection_iterations(self.horizon),
            )
        };
        let awake_total = softmax_into(&base, &etas, alpha, shift, &mut buf);
        let mut play = vec![0.0; k];
        for (j, w) in buf.iter().enumerate() {
            play[j % k] += w;
        }
        play.iter_mut().for_each(|w| *w /= awake_total);

        // asleep experts carry zero estimates, so their logit has no alpha term
        let asleep_log_mass = if self.eager {
            let logits: Vec<f64> = self.experts[awake_len..]
                .iter()
                .map(|e| e.eta.ln() + e.log_weight)
                .collect();
            log_sum_exp(&logits)
        } else if awake_len < k * self.horizon {
            ((k * self.horizon - awake_len) as f64).ln() + self.initial.eta.ln() + self.initial.log_weight
        } else {
            f64::NEG_INFINITY
        };
        let awake_log_mass = shift + awake_total.ln();
        let norm = log_sum_exp(&[awake_log_mass, asleep_log_mass]);
        let asleep_mass = (asleep_log_mass - norm).exp();
        let scale = (shift - norm).exp();
        let awake_tilde: Vec<f64> = buf.iter().map(|w| w * scale).collect();

        self.diagnostics.step = t;
        self.diagnostics.alpha = alpha;
        self.diagnostics.residual = residual;
        self.diagnostics.asleep_mass = asleep_mass;
        self.pending = Some(Pending {
            alpha,
            awake: awake_tilde,
            asleep_mass,
            play: play.clone(),
        });
        SimplexPoint::from_normalized(play)
    }

    pub fn sleeping_update(&mut self, loss: &[f64]) -> Result<()> {
        check_loss_vector(self.arms, loss)?;
        let pending = self
            .pending
            .take()
            .ok_or_else(|| Error::Invariant("update without a matching play".into()))?;
        let k = self.arms;
        let mixed: f64 = pending.play.iter().zip(loss).map(|(p, l)| p * l).sum();
        let awake_len = pending.awake.len();

        // <p~, l~>: asleep experts suffer the mixed loss, awake ones their arm's
        let tilde_mixed = pending.asleep_mass * mixed
            + pending
                .awake
                .iter()
                .enumerate()
                .map(|(j, w)| w * loss[j % k])
                .sum::<f64>();
        let identity_gap = (tilde_mixed - mixed).abs();
        let mut weighted = pending.asleep_mass * (tilde_mixed - mixed);
        let mut awake_gap: f64 = 0.0;
        for (j, w) in pending.awake.iter().enumerate() {
            let r_tilde = tilde_mixed - loss[j % k];
            awake_gap = awake_gap.max((r_tilde - (mixed - loss[j % k])).abs());
            weighted += w * r_tilde;
        }

        let ln_experts = self.ln_experts;
        if k * self.horizon > 1 {
            for (j, e) in self.experts[..awake_len].iter_mut().enumerate() {
                let r = mixed - loss[j % k];
                let m = pending.alpha - self.prev_loss[j % k];
                e.step(r, m, ln_experts);
            }
            if self.eager {
                // r~ = <p~, l~> - <p_t, l_t>, taken through the identity
                for e in &mut self.experts[awake_len..] {
                    e.step(mixed - mixed, 0.0, ln_experts);
                }
            }
        }
        self.touched_max = self.touched_max.max(if self.eager {
            self.experts.len()
        } else {
            awake_len
        });

        self.diagnostics.identity_gap = identity_gap;
        self.diagnostics.max_asleep_regret = if pending.asleep_mass > 0.0 {
            identity_gap
        } else {
            0.0
        };
        self.diagnostics.max_awake_regret_gap = awake_gap;
        self.diagnostics.weighted_regret = weighted.abs();
        self.prev_loss.copy_from_slice(loss);
        self.steps += 1;
        Ok(())
    }
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

impl ExpertPolicy for SleepingProd {
    fn arms(&self) -> usize {
        self.arms
    }

    fn play(&mut self) -> SimplexPoint {
        self.sleeping_play()
    }

    fn update(&mut self, loss: &[f64]) -> Result<()> {
        self.sleeping_update(loss)
    }

    fn horizon(&self) -> Option<usize> {
        Some(self.horizon)
    }

    fn clone_box(&self) -> Box<dyn ExpertPolicy> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn first_play_is_uniform() {
        let mut prod = ProdExperts::new(3, 100).unwrap();
        let p = prod.play_step();
        for w in p.weights() {
            assert!((w - 1.0 / 3.0).abs() < 1e-15);
        }
        assert_eq!(prod.last_record().unwrap().alpha, 0.0);
    }

    #[test]
    fn single_expert_alpha_is_previous_loss() {
        let mut prod = ProdExperts::new(1, 10).unwrap();
        prod.play_step();
        prod.update_step(&[0.37]).unwrap();
        let (alpha, residual) = prod.fixed_point_alpha();
        assert_eq!(alpha, 0.37);
        assert_eq!(residual, 0.0);
        assert_eq!(prod.play_step().weights(), &[1.0]);
    }

    #[test]
    fn equal_rates_closed_form() {
        // with equal weights and rates the alpha factor cancels: p ∝ (1, e^{-1/4})
        let mut prod = ProdExperts::new(2, 1_000_000).unwrap();
        prod.prev_loss = vec![0.0, 1.0];
        prod.experts.iter_mut().for_each(|e| e.eta = 0.25);
        let q = (-0.25f64).exp();
        let expected = q / (1.0 + q);
        assert!((expected - 0.437_82).abs() < 1e-5);
        let p = prod.play_step();
        let alpha = prod.last_record().unwrap().alpha;
        assert!((alpha - expected).abs() < 1e-5, "{alpha}");
        assert!((p.weights()[0] - (1.0 - expected)).abs() < 1e-12);
        assert!((p.weights()[1] - expected).abs() < 1e-12);
    }

    #[test]
    fn constant_previous_loss_gives_that_constant() {
        let mut prod = ProdExperts::new(4, 1000).unwrap();
        prod.prev_loss = vec![0.6; 4];
        let (alpha, residual) = prod.fixed_point_alpha();
        assert!((alpha - 0.6).abs() <= 1e-3);
        assert!(residual <= 1e-3);
    }

    #[test]
    fn single_step_by_hand() {
        let mut prod = ProdExperts::new(2, 50).unwrap();
        prod.play_step();
        prod.update_step(&[0.0, 1.0]).unwrap();
        // p = (1/2, 1/2), m = 0, r = (1/2, -1/2), c = 1/4
        let ln2 = 2f64.ln();
        let eta0 = 0.25f64.min(ln2.sqrt());
        let eta1 = 0.25f64.min((ln2 / 1.25).sqrt());
        let w0 = (eta1 / eta0) * (-ln2 + eta0 * 0.5 - eta0 * eta0 * 0.25);
        let w1 = (eta1 / eta0) * (-ln2 - eta0 * 0.5 - eta0 * eta0 * 0.25);
        let e = prod.experts();
        assert!((e[0].log_weight - w0).abs() < 1e-12);
        assert!((e[1].log_weight - w1).abs() < 1e-12);
        assert!((e[0].eta - eta1).abs() < 1e-12);
        assert_eq!(e[0].cum_sq_error, 0.25);
    }

    #[test]
    fn zero_error_step_is_plain_exponential() {
        let mut state = ExpertState::initial(-1.0, 100.0);
        let before = state;
        state.step(0.3, 0.3, 100.0);
        assert_eq!(state.eta, before.eta);
        assert!((state.log_weight - (before.log_weight + before.eta * 0.3)).abs() < 1e-15);
    }

    #[test]
    fn update_requires_play() {
        let mut prod = ProdExperts::new(2, 10).unwrap();
        assert!(prod.update_step(&[0.1, 0.2]).is_err());
        prod.play_step();
        assert!(prod.update_step(&[0.1, 1.2]).is_err());
    }

    #[test]
    fn bisection_cap() {
        assert_eq!(bisection_iterations(1), 2);
        assert_eq!(bisection_iterations(1000), 12);
        assert_eq!(bisection_iterations(1024), 12);
    }

    #[test]
    fn sleeping_first_play_uniform() {
        let mut pool = SleepingProd::new(3, 20).unwrap();
        let p = pool.sleeping_play();
        for w in p.weights() {
            assert!((w - 1.0 / 3.0).abs() < 1e-15);
        }
        assert_eq!(pool.stored(), 3);
    }

    #[test]
    fn sleeping_lazy_matches_eager() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut lazy = SleepingProd::new(3, 40).unwrap();
        let mut eager = SleepingProd::new_eager(3, 40).unwrap();
        for t in 1..=40 {
            let a = lazy.sleeping_play();
            let b = eager.sleeping_play();
            for (x, y) in a.weights().iter().zip(b.weights()) {
                assert!((x - y).abs() < 1e-12, "step {t}");
            }
            let loss: Vec<f64> = (0..3).map(|_| rng.gen()).collect();
            lazy.sleeping_update(&loss).unwrap();
            eager.sleeping_update(&loss).unwrap();
            for s in t + 2..=40 {
                for k in 0..3 {
                    assert_eq!(
                        eager.expert(s, k).unwrap().to_bits(),
                        eager.initial_state().to_bits()
                    );
                }
            }
        }
        assert!(lazy.stored() <= 3 * 40);
        assert_eq!(lazy.touched_max(), 3 * 40);
    }

    #[test]
    fn sleeping_memory_grows_with_t() {
        let mut pool = SleepingProd::new(2, 100).unwrap();
        for t in 1..=30 {
            pool.sleeping_play();
            pool.sleeping_update(&[0.2, 0.9]).unwrap();
            assert!(pool.stored() <= 2 * t);
        }
    }

    #[test]
    fn waking_expert_starts_from_initial_state() {
        let mut pool = SleepingProd::new(2, 10).unwrap();
        pool.sleeping_play();
        pool.sleeping_update(&[0.0, 1.0]).unwrap();
        pool.sleeping_play();
        assert_eq!(pool.expert(2, 1).unwrap(), &pool.initial_state());
        assert_ne!(pool.expert(1, 1).unwrap(), &pool.initial_state());
    }

    proptest! {
        #[test]
        fn prod_step_invariants(seed in any::<u64>(), arms in 2usize..6) {
            let horizon = 60;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut prod = ProdExperts::new(arms, horizon).unwrap();
            let mut prev = vec![0.0; arms];
            let mut etas: Vec<f64> = prod.experts().iter().map(|e| e.eta).collect();
            for _ in 0..horizon {
                let p = prod.play_step();
                prop_assert!(p.validate().is_ok());
                let loss: Vec<f64> = (0..arms).map(|_| rng.gen()).collect();
                prod.update_step(&loss).unwrap();
                let rec = prod.last_record().unwrap();
                prop_assert!(rec.residual <= 1.0 / horizon as f64);
                let r = rec.regrets.as_ref().unwrap();
                let weighted: f64 = r.iter().zip(&rec.play).map(|(a, b)| a * b).sum();
                prop_assert!(weighted.abs() < 1e-9);
                let dev = loss.iter().zip(&prev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                for (ri, mi) in r.iter().zip(&rec.estimates) {
                    prop_assert!((ri - mi).abs() <= 2.0 * dev + rec.residual + 1e-12);
                }
                for (e, old) in prod.experts().iter().zip(&etas) {
                    prop_assert!(e.eta <= ETA_CAP && e.eta <= *old);
                }
                etas = prod.experts().iter().map(|e| e.eta).collect();
                prev = loss;
            }
        }

        #[test]
        fn sleeping_identities(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pool = SleepingProd::new(3, 50).unwrap();
            for _ in 0..50 {
                let p = pool.sleeping_play();
                prop_assert!(p.validate().is_ok());
                let loss: Vec<f64> = (0..3).map(|_| rng.gen()).collect();
                pool.sleeping_update(&loss).unwrap();
                let d = pool.diagnostics();
                prop_assert!(d.identity_gap < 1e-9);
                prop_assert!(d.max_asleep_regret < 1e-9);
                prop_assert!(d.max_awake_regret_gap < 1e-9);
                prop_assert!(d.weighted_regret < 1e-9);
                prop_assert!(d.residual <= 1.0 / 50.0);
            }
        }
    }
}
