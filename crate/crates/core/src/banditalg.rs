//! Rerun-UCB-V and the trivial baseline policies.
//!
//! Rerun-UCB-V splits the horizon into blocks of `B` steps and runs a fresh
//! UCB-V inside each block: all per-arm statistics are discarded at every
//! block boundary. Within a block the arm minimising `mean - radius` is played,
//! where the radius is the empirical-Bernstein width at confidence `delta`.

use rand::{Rng, RngCore};

use crate::bernstein::{rho, RunningStats};
use crate::envmodel::{argmin, DistributionSequence};
use crate::error::{check_unit, Error, Result};
use crate::gdexperts::SimplexPoint;
use crate::harness::{run_bandit, RegretTrace, RunLabel};
use crate::policy::{BanditPolicy, ExpertPolicy};

/// Block length for a drift budget `V` and variance budget `Lambda`:
/// `cbrt(K^2 Lambda T / V^2)` when `K Lambda^2 >= T V`, else `sqrt(K T / V)`,
/// rounded and clamped to `[1, T]`. Zero drift means a single block.
pub fn block_length(arms: usize, horizon: usize, drift: f64, variance: f64) -> Result<usize> {
    if horizon == 0 || arms == 0 {
        return Err(Error::InvalidParameter("K and T must be positive".into()));
    }
    if !(drift >= 0.0) || !drift.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "drift estimate must be positive, got {drift}"
        )));
    }
    if !(variance >= 0.0) || !variance.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "variance budget must be nonnegative, got {variance}"
        )));
    }
    if drift == 0.0 {
        return Ok(horizon);
    }
    let (k, t) = (arms as f64, horizon as f64);
    let raw = if k * variance * variance >= t * drift {
        (k * k * variance * t / (drift * drift)).cbrt()
    } else {
        (k * t / drift).sqrt()
    };
    Ok(clamp_block(raw, horizon))
}

pub(crate) fn clamp_block(raw: f64, horizon: usize) -> usize {
    let rounded = raw.round();
    if rounded < 1.0 {
        1
    } else if rounded >= horizon as f64 {
        horizon
    } else {
        rounded as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RerunUcbVConfig {
    pub arms: usize,
    pub horizon: usize,
    pub block_length: usize,
    pub delta: f64,
}

impl RerunUcbVConfig {
    /// `delta = 1/(K T)` and `B` from the drift and variance budgets.
    pub fn from_budgets(arms: usize, horizon: usize, drift: f64, variance: f64) -> Result<Self> {
        Ok(Self {
            arms,
            horizon,
            block_length: block_length(arms, horizon, drift, variance)?,
            delta: 1.0 / (arms as f64 * horizon as f64),
        })
    }

    pub fn with_block(mut self, block_length: usize) -> Self {
        self.block_length = block_length;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.arms == 0 || self.horizon == 0 {
            return Err(Error::InvalidParameter("K and T must be positive".into()));
        }
        if self.block_length == 0 || self.block_length > self.horizon {
            return Err(Error::InvalidParameter(format!(
                "block length {} must lie in [1, {}]",
                self.block_length, self.horizon
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::OutOfRange {
                what: "delta",
                value: self.delta,
                low: 0.0,
                high: 1.0,
            });
        }
        Ok(())
    }
}

/// Lower confidence index `mean - lambda` of one arm. Unplayed arms have mean
/// zero; arms with at most one sample get `lambda = 1`.
pub fn optimistic_index(stats: &RunningStats, delta: f64) -> f64 {
    let lambda = if stats.count() <= 1 {
        1.0
    } else {
        rho(stats.count(), stats.empirical_variance(), delta)
            .expect("n >= 2 and delta validated at construction")
    };
    stats.mean() - lambda
}

#[derive(Debug, Clone)]
pub struct RerunUcbV {
    config: RerunUcbVConfig,
    stats: Vec<RunningStats>,
    step_in_block: usize,
}

impl RerunUcbV {
    pub fn new(config: RerunUcbVConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            stats: vec![RunningStats::new(); config.arms],
            config,
            step_in_block: 0,
        })
    }

    pub fn config(&self) -> &RerunUcbVConfig {
        &self.config
    }

    pub fn stats(&self) -> &[RunningStats] {
        &self.stats
    }

    /// Steps already observed in the current block.
    pub fn step_in_block(&self) -> usize {
        self.step_in_block
    }

    pub fn indices(&self) -> Vec<f64> {
        self.stats
            .iter()
            .map(|s| optimistic_index(s, self.config.delta))
            .collect()
    }

    pub fn select_arm(&self) -> usize {
        argmin(&self.indices())
    }

    pub fn observe_loss(&mut self, arm: usize, loss: f64) -> Result<()> {
        if arm >= self.config.arms {
            return Err(Error::ArmOutOfRange {
                arm,
                arms: self.config.arms,
            });
        }
        check_unit("loss", loss)?;
        self.stats[arm].update(loss)?;
        self.step_in_block += 1;
        if self.step_in_block == self.config.block_length {
            self.stats.iter_mut().for_each(|s| *s = RunningStats::new());
            self.step_in_block = 0;
        }
        Ok(())
    }
}

impl BanditPolicy for RerunUcbV {
    fn arms(&self) -> usize {
        self.config.arms
    }

    fn select(&mut self, _rng: &mut dyn RngCore) -> usize {
        self.select_arm()
    }

    fn observe(&mut self, arm: usize, loss: f64) -> Result<()> {
        self.observe_loss(arm, loss)
    }

    fn horizon(&self) -> Option<usize> {
        Some(self.config.horizon)
    }

    fn clone_box(&self) -> Box<dyn BanditPolicy> {
        Box::new(self.clone())
    }
}

/// Plays every arm with equal probability.
#[derive(Debug, Clone)]
pub struct UniformRandom {
    arms: usize,
}

impl UniformRandom {
    pub fn new(arms: usize) -> Result<Self> {
        if arms == 0 {
            return Err(Error::InvalidParameter("K must be positive".into()));
        }
        Ok(Self { arms })
    }
}

impl BanditPolicy for UniformRandom {
    fn arms(&self) -> usize {
        self.arms
    }

    fn select(&mut self, rng: &mut dyn RngCore) -> usize {
        rng.gen_range(0..self.arms)
    }

    fn observe(&mut self, arm: usize, loss: f64) -> Result<()> {
        check_observation(self.arms, arm, loss)
    }

    fn clone_box(&self) -> Box<dyn BanditPolicy> {
        Box::new(self.clone())
    }
}

impl ExpertPolicy for UniformRandom {
    fn arms(&self) -> usize {
        self.arms
    }

    fn play(&mut self) -> SimplexPoint {
        SimplexPoint::uniform(self.arms)
    }

    fn update(&mut self, loss: &[f64]) -> Result<()> {
        check_loss_vector(self.arms, loss)
    }

    fn clone_box(&self) -> Box<dyn ExpertPolicy> {
        Box::new(self.clone())
    }
}

/// Always plays the same arm.
#[derive(Debug, Clone)]
pub struct FixedArm {
    arms: usize,
    arm: usize,
}

impl FixedArm {
    pub fn new(arms: usize, arm: usize) -> Result<Self> {
        if arm >= arms {
            return Err(Error::ArmOutOfRange { arm, arms });
        }
        Ok(Self { arms, arm })
    }
}

impl BanditPolicy for FixedArm {
    fn arms(&self) -> usize {
        self.arms
    }

    fn select(&mut self, _rng: &mut dyn RngCore) -> usize {
        self.arm
    }

    fn observe(&mut self, arm: usize, loss: f64) -> Result<()> {
        check_observation(self.arms, arm, loss)
    }

    fn clone_box(&self) -> Box<dyn BanditPolicy> {
        Box::new(self.clone())
    }
}

impl ExpertPolicy for FixedArm {
    fn arms(&self) -> usize {
        self.arms
    }

    fn play(&mut self) -> SimplexPoint {
        SimplexPoint::vertex(self.arms, self.arm)
    }

    fn update(&mut self, loss: &[f64]) -> Result<()> {
        check_loss_vector(self.arms, loss)
    }

    fn clone_box(&self) -> Box<dyn ExpertPolicy> {
        Box::new(self.clone())
    }
}

fn check_observation(arms: usize, arm: usize, loss: f64) -> Result<()> {
    if arm >= arms {
        return Err(Error::ArmOutOfRange { arm, arms });
    }
    check_unit("loss", loss)
}

pub(crate) fn check_loss_vector(arms: usize, loss: &[f64]) -> Result<()> {
    if loss.len() != arms {
        return Err(Error::ArmMismatch {
            expected: arms,
            actual: loss.len(),
        });
    }
    loss.iter().try_for_each(|&x| check_unit("loss", x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    UniformRandom,
    FixedArm(usize),
}

/// Plays a baseline policy with bandit feedback for the whole sequence.
pub fn run_baseline(
    baseline: Baseline,
    seq: &DistributionSequence,
    seed: u64,
) -> Result<RegretTrace> {
    let (mut policy, name): (Box<dyn BanditPolicy>, String) = match baseline {
        Baseline::UniformRandom => (Box::new(UniformRandom::new(seq.arms())?), "uniform".into()),
        Baseline::FixedArm(k) => (
            Box::new(FixedArm::new(seq.arms(), k)?),
            format!("fixed-arm-{k}"),
        ),
    };
    let label = RunLabel::new(name, "custom", seed, 0);
    run_bandit(policy.as_mut(), seq, &label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envmodel::{gen_switching, SwitchingConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ucbv(arms: usize, horizon: usize, block: usize) -> RerunUcbV {
        RerunUcbV::new(RerunUcbVConfig {
            arms,
            horizon,
            block_length: block,
            delta: 1.0 / (arms * horizon) as f64,
        })
        .unwrap()
    }

    #[test]
    fn block_length_cube_branch() {
        // K Lambda^2 = 8192 >= T V = 1024; cbrt(4 * 64 * 1024) = 64
        assert_eq!(block_length(2, 1024, 1.0, 64.0).unwrap(), 64);
    }

    #[test]
    fn block_length_square_branch() {
        // K Lambda^2 = 2 < 8192; sqrt(2 * 1024 / 8) = 16
        assert_eq!(block_length(2, 1024, 8.0, 1.0).unwrap(), 16);
    }

    #[test]
    fn block_length_clamps() {
        assert_eq!(block_length(2, 10, 1.0, 1000.0).unwrap(), 10);
        assert_eq!(block_length(1, 10, 1e9, 0.0).unwrap(), 1);
        assert_eq!(block_length(2, 50, 0.0, 3.0).unwrap(), 50);
        assert!(block_length(2, 50, -1.0, 3.0).is_err());
    }

    #[test]
    fn unplayed_arms_tie_to_first() {
        let alg = ucbv(3, 100, 100);
        assert_eq!(alg.indices(), vec![-1.0; 3]);
        assert_eq!(alg.select_arm(), 0);
    }

    #[test]
    fn argmin_of_given_indices() {
        // mean - lambda: 0.5 - 0.10 vs 0.30 - 0.05
        assert_eq!(argmin(&[0.5 - 0.10, 0.30 - 0.05]), 1);
    }

    #[test]
    fn single_sample_convention() {
        let mut alg = ucbv(2, 1000, 1000);
        alg.observe_loss(0, 0.9).unwrap();
        assert!((alg.indices()[0] - (0.9 - 1.0)).abs() < 1e-15);
        // arm 0 at -0.1, arm 1 unplayed at -1
        assert_eq!(alg.select_arm(), 1);

        // delta chosen so that the 100-sample radius is 7 ln(2/delta) / 297 = 0.05
        let delta = 2.0 / (0.05f64 * 297.0 / 7.0).exp();
        let mut stats = vec![RunningStats::new(); 2];
        stats[0].update(0.9).unwrap();
        for _ in 0..100 {
            stats[1].update(0.2).unwrap();
        }
        let idx: Vec<f64> = stats.iter().map(|s| optimistic_index(s, delta)).collect();
        assert!((idx[0] + 0.1).abs() < 1e-12);
        assert!((idx[1] - 0.15).abs() < 1e-12);
        // -0.1 < 0.15: the once-played arm is still the optimistic choice
        assert_eq!(argmin(&idx), 0);
        let unplayed = optimistic_index(&RunningStats::new(), delta);
        assert_eq!(unplayed, -1.0);
        assert_eq!(argmin(&[unplayed, idx[1]]), 0);
    }

    #[test]
    fn restart_clears_statistics() {
        let mut alg = ucbv(2, 100, 4);
        for step in 0..4 {
            let arm = alg.select_arm();
            alg.observe_loss(arm, 0.3).unwrap();
            if step < 3 {
                assert!(alg.stats().iter().any(|s| s.count() > 0));
            }
        }
        assert!(alg.stats().iter().all(|s| s.count() == 0));
        assert_eq!(alg.select_arm(), 0);
    }

    #[test]
    fn observe_tracks_variance() {
        let mut alg = ucbv(2, 100, 100);
        alg.observe_loss(1, 0.0).unwrap();
        alg.observe_loss(1, 1.0).unwrap();
        assert!((alg.stats()[1].empirical_variance() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn observe_rejects_bad_input() {
        let mut alg = ucbv(2, 100, 100);
        assert!(alg.observe_loss(0, 1.5).is_err());
        assert!(alg.observe_loss(2, 0.5).is_err());
        assert!(RerunUcbV::new(RerunUcbVConfig {
            arms: 2,
            horizon: 10,
            block_length: 11,
            delta: 0.1
        })
        .is_err());
    }

    #[test]
    fn restart_purity_over_seeds() {
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cfg = SwitchingConfig::new(3, 300, 3, 0.3).with_variance(0.01);
            let seq = gen_switching(&cfg, &mut rng).unwrap();
            let mut sampler = crate::envmodel::LossSampler::new(seed);
            let mut alg = ucbv(3, 300, 25);
            for t in 1..=300 {
                let arm = alg.select_arm();
                if (t - 1) % 25 == 0 {
                    assert_eq!(arm, 0, "step {t}");
                }
                let loss = sampler.sample(&seq, t).unwrap()[arm];
                alg.observe_loss(arm, loss).unwrap();
            }
        }
    }

    #[test]
    fn suboptimal_pulls_are_logarithmic() {
        // zero-variance arms: the worse arm is pulled while
        // 0.5 <= c / (n - 1) - c / (n_1 - 1) with c = 7 ln(2 / delta) / 3,
        // which stops at n = 51 for delta = 1 / 20000
        let c = 7.0 * 40_000f64.ln() / 3.0;
        let expected = 1 + (c / (0.5 - c / 9_948.0)).floor() as usize + 1;
        assert_eq!(expected, 51);
        let rows = vec![vec![0.25, 0.75]; 10_000];
        let seq = DistributionSequence::from_point_masses(&rows).unwrap();
        for seed in 0..20u64 {
            let mut alg = ucbv(2, 10_000, 10_000);
            let mut sampler = crate::envmodel::LossSampler::new(seed);
            let mut bad = 0;
            for t in 1..=10_000 {
                let arm = alg.select_arm();
                bad += usize::from(arm == 1);
                let loss = sampler.sample(&seq, t).unwrap()[arm];
                alg.observe_loss(arm, loss).unwrap();
            }
            assert_eq!(bad, expected, "seed {seed}");
        }
    }

    #[test]
    fn baselines() {
        let rows = vec![vec![0.2, 0.6]; 50];
        let seq = DistributionSequence::from_point_masses(&rows).unwrap();
        let trace = run_baseline(Baseline::FixedArm(0), &seq, 1).unwrap();
        assert!(trace.cum_regret.iter().all(|&r| r == 0.0));

        let held = vec![vec![0.5, 1.0]; 4000];
        let seq = DistributionSequence::from_point_masses(&held).unwrap();
        let a = run_baseline(Baseline::UniformRandom, &seq, 3).unwrap();
        let b = run_baseline(Baseline::UniformRandom, &seq, 3).unwrap();
        assert_eq!(a.cum_regret, b.cum_regret);
        let per_step = a.final_regret() / 4000.0;
        assert!((per_step - 0.25).abs() < 0.03, "{per_step}");
        assert!(run_baseline(Baseline::FixedArm(2), &seq, 0).is_err());
    }
}
