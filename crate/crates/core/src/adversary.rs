//! Lower-bound environments built against a given learner.
//!
//! The adaptive constructions decide one interval at a time. For each
//! interval they replay fresh copies of the target learner from step 1 over
//! the prefix fixed so far plus a candidate for the interval, estimate the
//! relevant play counts by Monte Carlo, and commit the candidate that hurts
//! the learner most. The output is an ordinary [`DistributionSequence`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::envmodel::{lemma1_pair, partition, ArmDistribution, DistributionSequence};
use crate::error::{Error, Result};
use crate::policy::BanditPolicy;
use crate::streams::{self, Purpose};

/// Builds a fresh, untrained bandit learner.
pub type BanditFactory = dyn Fn() -> Box<dyn BanditPolicy> + Sync;

/// Smallest replication count the constructions are designed for.
pub const MIN_MC_RUNS: usize = 50;

fn point_row(means: &[f64]) -> Vec<ArmDistribution> {
    means
        .iter()
        .map(|&v| ArmDistribution::PointMass { value: v })
        .collect()
}

/// Runs one learner over `rows` and counts, per step of `window`, whether it
/// played `arm`.
fn probe_counts(
    factory: &BanditFactory,
    rows: &[Vec<ArmDistribution>],
    window: (usize, usize),
    arm: usize,
    seed: u64,
) -> Result<Vec<bool>> {
    let mut policy = factory();
    let mut policy_rng = streams::stream(seed, Purpose::Policy);
    let mut loss_rng = streams::stream(seed, Purpose::Environment);
    let (start, len) = window;
    let mut hits = Vec::with_capacity(len);
    for (idx, row) in rows.iter().enumerate().take(start - 1 + len) {
        let a = policy.select(&mut policy_rng);
        if a >= row.len() {
            return Err(Error::ArmOutOfRange {
                arm: a,
                arms: row.len(),
            });
        }
        let loss = row[a].sample(&mut loss_rng);
        policy.observe(a, loss)?;
        if idx + 1 >= start {
            hits.push(a == arm);
        }
    }
    Ok(hits)
}

/// Per-block mean play counts of `arm` over `mc_runs` probes, plus the
/// per-probe totals over the whole window.
fn estimate_counts(
    factory: &BanditFactory,
    rows: &[Vec<ArmDistribution>],
    window: (usize, usize),
    blocks: &[(usize, usize)],
    arm: usize,
    seeds: &[u64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let per_probe: Vec<Vec<bool>> = seeds
        .par_iter()
        .map(|&seed| probe_counts(factory, rows, window, arm, seed))
        .collect::<Result<_>>()?;
    let n = seeds.len() as f64;
    let mut block_means = vec![0.0; blocks.len()];
    let mut totals = Vec::with_capacity(seeds.len());
    for hits in &per_probe {
        let mut total = 0.0;
        for (b, &(bs, bl)) in blocks.iter().enumerate() {
            let offset = bs - window.0;
            let c = hits[offset..offset + bl].iter().filter(|&&h| h).count() as f64;
            block_means[b] += c / n;
            total += c;
        }
        totals.push(total);
    }
    Ok((block_means, totals))
}

fn mean_and_half_width(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * (var / n).sqrt())
}

fn probe_seeds<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Vec<u64> {
    (0..count).map(|_| rng.gen()).collect()
}

fn check_mc_runs(mc_runs: usize, warnings: &mut Vec<String>) -> Result<()> {
    if mc_runs == 0 {
        return Err(Error::InvalidParameter("mc_runs must be positive".into()));
    }
    if mc_runs < MIN_MC_RUNS {
        warnings.push(format!(
            "mc_runs = {mc_runs} is below {MIN_MC_RUNS}; count estimates may be too coarse"
        ));
    }
    Ok(())
}

/// Loss vector held by default in the switching construction.
pub const SWITCH_HOLD: [f64; 2] = [0.5, 1.0];
/// Loss vector switched to in the switching construction.
pub const SWITCH_TO: [f64; 2] = [0.5, 0.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "decision", rename_all = "snake_case")]
pub enum SwitchDecision {
    Hold,
    Switch {
        /// 1-based block index inside the interval.
        block: usize,
        /// 1-based step at which the second loss vector starts.
        at_step: usize,
        block_estimate: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchingInterval {
    pub start: usize,
    pub length: usize,
    pub block_length: usize,
    /// Estimated plays of arm 2 with the first vector held all interval.
    pub n2_estimate: f64,
    pub n2_half_width: f64,
    pub threshold: f64,
    pub decision: SwitchDecision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchingDiagnostics {
    pub horizon: usize,
    pub gamma: usize,
    pub mc_runs: usize,
    pub intervals: Vec<SwitchingInterval>,
    pub warnings: Vec<String>,
}

/// Adaptive two-arm switching adversary.
///
/// The horizon is cut into `floor(gamma / 2)` intervals. In each interval the
/// losses start at `(1/2, 1)`. If the learner is expected to play arm 2 at
/// least `sqrt(B) / 2` times there, the interval stays put; otherwise the
/// losses switch to `(1/2, 0)` from the start of the `sqrt(B)`-long block where
/// arm 2 is played least. The output is deterministic with zero variance.
pub fn build_switching_adversary<R: Rng + ?Sized>(
    factory: &BanditFactory,
    horizon: usize,
    gamma: usize,
    mc_runs: usize,
    rng: &mut R,
) -> Result<(DistributionSequence, SwitchingDiagnostics)> {
    if gamma < 2 || gamma > horizon {
        return Err(Error::InvalidParameter(format!(
            "switching adversary needs 2 <= gamma <= T, got gamma={gamma}, T={horizon}"
        )));
    }
    if factory().arms() != 2 {
        return Err(Error::ArmMismatch {
            expected: 2,
            actual: factory().arms(),
        });
    }
    let mut warnings = Vec::new();
    check_mc_runs(mc_runs, &mut warnings)?;
    if gamma % 2 == 1 {
        warnings.push(format!(
            "odd gamma = {gamma}: using {} intervals",
            gamma / 2
        ));
    }

    let hold = point_row(&SWITCH_HOLD);
    let switched = point_row(&SWITCH_TO);
    let mut rows: Vec<Vec<ArmDistribution>> = Vec::with_capacity(horizon);
    let mut intervals = Vec::new();
    for (start, length) in partition(horizon, gamma / 2) {
        rows.extend(std::iter::repeat_n(hold.clone(), length));
        let block_count = ((length as f64).sqrt().round() as usize).clamp(1, length);
        let blocks = partition(length, block_count)
            .into_iter()
            .map(|(s, l)| (start + s - 1, l))
            .collect::<Vec<_>>();
        let seeds = probe_seeds(rng, mc_runs);
        let (block_means, totals) =
            estimate_counts(factory, &rows, (start, length), &blocks, 1, &seeds)?;
        let (n2, half_width) = mean_and_half_width(&totals);
        let threshold = (length as f64).sqrt() / 2.0;
        let decision = if n2 >= threshold {
            SwitchDecision::Hold
        } else {
            let mut best = 0;
            for (b, &m) in block_means.iter().enumerate() {
                if m < block_means[best] {
                    best = b;
                }
            }
            if block_means[best] >= 0.5 {
                warnings.push(format!(
                    "interval at step {start}: no block with estimated count below 1/2"
                ));
            }
            let at_step = blocks[best].0;
            for row in &mut rows[at_step - 1..start - 1 + length] {
                row.clone_from(&switched);
            }
            SwitchDecision::Switch {
                block: best + 1,
                at_step,
                block_estimate: block_means[best],
            }
        };
        intervals.push(SwitchingInterval {
            start,
            length,
            block_length: blocks[0].1,
            n2_estimate: n2,
            n2_half_width: half_width,
            threshold,
            decision,
        });
    }
    let seq = DistributionSequence::new(rows)?;
    Ok((
        seq,
        SwitchingDiagnostics {
            horizon,
            gamma,
            mc_runs,
            intervals,
            warnings,
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftingInterval {
    pub start: usize,
    pub length: usize,
    pub chosen_arm: usize,
    /// Estimated plays of arm `i` when arm `i` is the better one.
    pub estimates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftingDiagnostics {
    pub block_length: usize,
    pub sigma: f64,
    pub epsilon: f64,
    pub better: ArmDistribution,
    pub baseline: ArmDistribution,
    pub mc_runs: usize,
    pub intervals: Vec<DriftingInterval>,
    pub warnings: Vec<String>,
}

/// Scales of the drifting construction: `(B, sigma, epsilon)`.
///
/// `B = cbrt(Lambda T / (32 K V^2))` rounded into `[1, T]`,
/// `sigma = sqrt(Lambda / (4 K T))` and `epsilon = (V - sigma) B / T`; the
/// `sigma` taken off `V` pays for the first mean vector.
pub fn drifting_scales(
    arms: usize,
    horizon: usize,
    drift: f64,
    variance: f64,
) -> Result<(usize, f64, f64)> {
    if arms < 2 || horizon == 0 {
        return Err(Error::InvalidParameter(format!(
            "need K >= 2 and T >= 1, got K={arms}, T={horizon}"
        )));
    }
    if !(drift > 0.0 && variance > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "drift {drift} and variance {variance} must be positive"
        )));
    }
    let (k, t) = (arms as f64, horizon as f64);
    if variance * t < 32.0 * k * drift * drift {
        return Err(Error::InvalidParameter(format!(
            "needs Lambda T >= 32 K V^2, got {} < {}",
            variance * t,
            32.0 * k * drift * drift
        )));
    }
    let sigma = (variance / (4.0 * k * t)).sqrt();
    if sigma > 0.5 {
        return Err(Error::InvalidParameter(format!(
            "variance budget {variance} exceeds K T / 4"
        )));
    }
    if drift <= sigma {
        return Err(Error::InvalidParameter(format!(
            "drift {drift} does not exceed the first-step cost sigma = {sigma}"
        )));
    }
    let raw = (variance * t / (32.0 * k * drift * drift)).cbrt();
    let block = (raw.round() as usize).clamp(1, horizon);
    let epsilon = (drift - sigma) * block as f64 / t;
    if epsilon > sigma / 2f64.sqrt() {
        return Err(Error::InvalidParameter(format!(
            "gap {epsilon} exceeds sigma / sqrt(2) = {}",
            sigma / 2f64.sqrt()
        )));
    }
    Ok((block, sigma, epsilon))
}

/// Drifting lower-bound environment.
///
/// Every interval of length `B` gives one arm the lower-mean distribution `P`
/// and the rest `Q` of the same variance scale; the favoured arm is the one the
/// learner is expected to play least when it is the better arm.
pub fn build_drifting_lowerbound<R: Rng + ?Sized>(
    factory: &BanditFactory,
    horizon: usize,
    arms: usize,
    drift: f64,
    variance: f64,
    mc_runs: usize,
    rng: &mut R,
) -> Result<(DistributionSequence, DriftingDiagnostics)> {
    let (block, sigma, epsilon) = drifting_scales(arms, horizon, drift, variance)?;
    if factory().arms() != arms {
        return Err(Error::ArmMismatch {
            expected: arms,
            actual: factory().arms(),
        });
    }
    let mut warnings = Vec::new();
    check_mc_runs(mc_runs, &mut warnings)?;
    let (better, baseline) = lemma1_pair(sigma, epsilon)?;
    let row_for = |i: usize| -> Vec<ArmDistribution> {
        (0..arms)
            .map(|a| if a == i { better } else { baseline })
            .collect()
    };

    let mut rows: Vec<Vec<ArmDistribution>> = Vec::with_capacity(horizon);
    let mut intervals = Vec::new();
    let count = horizon.div_ceil(block);
    for (start, length) in partition(horizon, count) {
        let seeds = probe_seeds(rng, mc_runs);
        let mut estimates = Vec::with_capacity(arms);
        for i in 0..arms {
            rows.extend(std::iter::repeat_n(row_for(i), length));
            let window = (start, length);
            let (_, totals) = estimate_counts(factory, &rows, window, &[window], i, &seeds)?;
            estimates.push(totals.iter().sum::<f64>() / totals.len() as f64);
            rows.truncate(start - 1);
        }
        let mut chosen = 0;
        for (i, &e) in estimates.iter().enumerate() {
            if e < estimates[chosen] {
                chosen = i;
            }
        }
        rows.extend(std::iter::repeat_n(row_for(chosen), length));
        intervals.push(DriftingInterval {
            start,
            length,
            chosen_arm: chosen,
            estimates,
        });
    }
    let seq = DistributionSequence::new(rows)?;
    Ok((
        seq,
        DriftingDiagnostics {
            block_length: block,
            sigma,
            epsilon,
            better,
            baseline,
            mc_runs,
            intervals,
            warnings,
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullInfoGammaDiagnostics {
    /// Zero-loss arm of each of the first `gamma` steps.
    pub zero_arms: Vec<usize>,
}

/// Full-information switching lower bound: each of the first `gamma` steps
/// carries a uniformly drawn vector with a single zero coordinate and ones
/// elsewhere; the last one is kept to the end.
pub fn build_fullinfo_gamma_lowerbound<R: Rng + ?Sized>(
    arms: usize,
    horizon: usize,
    gamma: usize,
    rng: &mut R,
) -> Result<(DistributionSequence, FullInfoGammaDiagnostics)> {
    if arms < 2 {
        return Err(Error::InvalidParameter(format!("needs K >= 2, got {arms}")));
    }
    if gamma == 0 || gamma > horizon {
        return Err(Error::InvalidParameter(format!(
            "gamma = {gamma} must lie in [1, T = {horizon}]"
        )));
    }
    let zero_arms: Vec<usize> = (0..gamma).map(|_| rng.gen_range(0..arms)).collect();
    let vector = |i: usize| -> Vec<f64> { (0..arms).map(|a| if a == i { 0.0 } else { 1.0 }).collect() };
    let mut rows: Vec<Vec<f64>> = zero_arms.iter().map(|&i| vector(i)).collect();
    let last = rows[gamma - 1].clone();
    rows.extend(std::iter::repeat_n(last, horizon - gamma));
    Ok((
        DistributionSequence::from_point_masses(&rows)?,
        FullInfoGammaDiagnostics { zero_arms },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullInfoVarianceDiagnostics {
    pub prefix_length: usize,
    pub epsilon_hard: f64,
    pub best_arms: Vec<usize>,
    pub intervals: Vec<(usize, usize)>,
}

/// Constant in `epsilon_hard = c / sqrt(Lambda / Gamma)`.
pub const EPSILON_HARD_SCALE: f64 = 0.25;

/// Full-information variance lower bound.
///
/// The horizon is cut into `gamma` intervals. Each starts with a noisy prefix
/// of `floor(4 Lambda / (gamma K))` steps where every arm is `TwoPoint(0, 1, 1/2)`
/// except a hidden best arm at `1/2 - epsilon_hard`; the rest of the interval
/// repeats the same means as point masses.
pub fn build_fullinfo_variance_lowerbound<R: Rng + ?Sized>(
    arms: usize,
    horizon: usize,
    gamma: usize,
    variance: f64,
    rng: &mut R,
) -> Result<(DistributionSequence, FullInfoVarianceDiagnostics)> {
    if arms < 2 {
        return Err(Error::InvalidParameter(format!("needs K >= 2, got {arms}")));
    }
    if gamma == 0 || gamma > horizon {
        return Err(Error::InvalidParameter(format!(
            "gamma = {gamma} must lie in [1, T = {horizon}]"
        )));
    }
    let g = gamma as f64;
    if !(variance > g) || variance > horizon as f64 {
        return Err(Error::InvalidParameter(format!(
            "needs gamma < Lambda <= T, got Lambda={variance}, gamma={gamma}, T={horizon}"
        )));
    }
    let intervals = partition(horizon, gamma);
    let shortest = intervals.iter().map(|&(_, l)| l).min().unwrap_or(1);
    let raw_prefix = (4.0 * variance / (g * arms as f64)).floor() as usize;
    let prefix_length = raw_prefix.clamp(1, shortest);
    if (prefix_length * gamma * arms) as f64 * 0.25 > variance {
        return Err(Error::InvalidParameter(format!(
            "variance budget {variance} cannot pay for one noisy step per interval"
        )));
    }
    let epsilon_hard = (EPSILON_HARD_SCALE / (variance / g).sqrt()).min(0.5);
    let noisy_best = ArmDistribution::two_point(0.0, 1.0, 0.5 - epsilon_hard)?;
    let noisy_other = ArmDistribution::two_point(0.0, 1.0, 0.5)?;
    let calm_best = ArmDistribution::point_mass(0.5 - epsilon_hard)?;
    let calm_other = ArmDistribution::point_mass(0.5)?;

    let mut grid = Vec::with_capacity(horizon);
    let mut best_arms = Vec::with_capacity(gamma);
    for &(_, length) in &intervals {
        let best = rng.gen_range(0..arms);
        best_arms.push(best);
        let row = |b: ArmDistribution, o: ArmDistribution| -> Vec<ArmDistribution> {
            (0..arms).map(|a| if a == best { b } else { o }).collect()
        };
        grid.extend(std::iter::repeat_n(row(noisy_best, noisy_other), prefix_length));
        grid.extend(std::iter::repeat_n(row(calm_best, calm_other), length - prefix_length));
    }
    Ok((
        DistributionSequence::new(grid)?,
        FullInfoVarianceDiagnostics {
            prefix_length,
            epsilon_hard,
            best_arms,
            intervals,
        },
    ))
}

/// Convenience seeded entry point for the constructions' randomness.
pub fn adversary_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(Purpose::Adversary as u64);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::banditalg::{FixedArm, UniformRandom};
    use crate::envmodel::{compute_params, kl_two_point};
    use crate::harness::{run_bandit, RunLabel};

    fn fixed(arm: usize) -> impl Fn() -> Box<dyn BanditPolicy> + Sync {
        move || Box::new(FixedArm::new(2, arm).unwrap()) as Box<dyn BanditPolicy>
    }

    #[test]
    fn always_arm_one_gets_switched_at_first_block() {
        let (seq, diag) =
            build_switching_adversary(&fixed(0), 400, 4, 50, &mut adversary_rng(1)).unwrap();
        for iv in &diag.intervals {
            assert_eq!(iv.n2_estimate, 0.0);
            match iv.decision {
                SwitchDecision::Switch { block, at_step, .. } => {
                    assert_eq!(block, 1);
                    assert_eq!(at_step, iv.start);
                }
                SwitchDecision::Hold => panic!("expected a switch"),
            }
        }
        let trace = run_bandit(
            &mut FixedArm::new(2, 0).unwrap(),
            &seq,
            &RunLabel::new("fixed-arm-0", "switching", 0, 0),
        )
        .unwrap();
        assert!((trace.final_regret() - 200.0).abs() < 1e-9);
    }

    #[test]
    fn always_arm_two_is_held() {
        let (seq, diag) =
            build_switching_adversary(&fixed(1), 400, 4, 50, &mut adversary_rng(1)).unwrap();
        for iv in &diag.intervals {
            assert_eq!(iv.n2_estimate, iv.length as f64);
            assert_eq!(iv.decision, SwitchDecision::Hold);
        }
        let trace = run_bandit(
            &mut FixedArm::new(2, 1).unwrap(),
            &seq,
            &RunLabel::new("fixed-arm-1", "switching", 0, 0),
        )
        .unwrap();
        assert!((trace.final_regret() - 200.0).abs() < 1e-9);
    }

    #[test]
    fn switching_output_shape() {
        let uniform = || Box::new(UniformRandom::new(2).unwrap()) as Box<dyn BanditPolicy>;
        let (seq, diag) =
            build_switching_adversary(&uniform, 600, 5, 50, &mut adversary_rng(3)).unwrap();
        assert_eq!(diag.intervals.len(), 2);
        assert!(!diag.warnings.is_empty());
        let params = compute_params(&seq);
        assert_eq!(params.variance_budget, 0.0);
        assert!(params.gamma <= 5);
        for t in 1..=600 {
            let m = seq.mean_vector(t);
            assert!(m == SWITCH_HOLD || m == SWITCH_TO);
        }
        let (again, _) =
            build_switching_adversary(&uniform, 600, 5, 50, &mut adversary_rng(3)).unwrap();
        assert_eq!(seq, again);
    }

    #[test]
    fn switching_rejects_bad_input() {
        assert!(build_switching_adversary(&fixed(0), 100, 1, 50, &mut adversary_rng(0)).is_err());
        assert!(build_switching_adversary(&fixed(0), 100, 4, 0, &mut adversary_rng(0)).is_err());
    }

    #[test]
    fn drifting_scales_satisfy_pair_conditions() {
        let (block, sigma, eps) = drifting_scales(2, 4000, 1.0, 40.0).unwrap();
        assert_eq!(block, 14);
        assert!((sigma - (40.0f64 / 32000.0).sqrt()).abs() < 1e-15);
        assert!(eps <= sigma / 2f64.sqrt());
        assert!(drifting_scales(2, 100, 1.0, 0.5).is_err());
    }

    #[test]
    fn drifting_budgets_hold() {
        let uniform = || Box::new(UniformRandom::new(2).unwrap()) as Box<dyn BanditPolicy>;
        let (seq, diag) =
            build_drifting_lowerbound(&uniform, 1000, 2, 0.5, 20.0, 50, &mut adversary_rng(9))
                .unwrap();
        let params = compute_params(&seq);
        assert!(params.variance_budget <= 20.0);
        assert!(params.drift <= 0.5 + 1e-12, "{}", params.drift);
        let (sigma, eps) = (diag.sigma, diag.epsilon);
        assert!((diag.baseline.mean() - diag.better.mean() - eps).abs() < 1e-12);
        assert!(diag.baseline.variance() <= sigma * sigma + 1e-15);
        let kl = kl_two_point(&diag.baseline, &diag.better).unwrap();
        assert!(2f64.ln() * kl <= eps * eps / (sigma * sigma));
        for iv in &diag.intervals {
            // uniform play: each estimate sits near half the interval
            for e in &iv.estimates {
                assert!(*e <= 0.75 * iv.length as f64 + 2.0);
            }
        }
    }

    #[test]
    fn fullinfo_gamma_has_zero_comparator() {
        let (seq, diag) = build_fullinfo_gamma_lowerbound(3, 50, 10, &mut adversary_rng(4)).unwrap();
        assert_eq!(diag.zero_arms.len(), 10);
        for t in 1..=50 {
            assert_eq!(seq.best_mean(t), 0.0);
        }
        let params = compute_params(&seq);
        assert_eq!(params.variance_budget, 0.0);
        assert!(params.gamma <= 10);
    }

    #[test]
    fn fullinfo_gamma_expected_regret_of_uniform_play() {
        // uniform play loses (K - 1) / K per step against a zero comparator
        let (seq, _) = build_fullinfo_gamma_lowerbound(4, 40, 40, &mut adversary_rng(2)).unwrap();
        let regret: f64 = (1..=40)
            .map(|t| seq.mean_vector(t).iter().sum::<f64>() / 4.0 - seq.best_mean(t))
            .sum();
        assert!((regret - 40.0 * 0.75).abs() < 1e-12);
    }

    #[test]
    fn fullinfo_variance_budget() {
        let (seq, diag) =
            build_fullinfo_variance_lowerbound(2, 1000, 4, 100.0, &mut adversary_rng(8)).unwrap();
        let params = compute_params(&seq);
        assert!(params.variance_budget <= 100.0);
        assert_eq!(diag.prefix_length, 50);
        assert!((diag.epsilon_hard - 0.25 / 5.0).abs() < 1e-15);
        let noisy = ArmDistribution::two_point(0.0, 1.0, 0.5).unwrap();
        assert_eq!(noisy.variance(), 0.25);
        // uniform play: half the arms are epsilon worse, played half the time
        let (start, _) = diag.intervals[0];
        let prefix_regret: f64 = (start..start + diag.prefix_length)
            .map(|t| seq.mean_vector(t).iter().sum::<f64>() / 2.0 - seq.best_mean(t))
            .sum();
        assert!(prefix_regret >= diag.epsilon_hard / 2.0 * diag.prefix_length as f64 / 2.0);
    }

    #[test]
    fn fullinfo_variance_rejects_small_budget() {
        assert!(build_fullinfo_variance_lowerbound(2, 100, 4, 3.0, &mut adversary_rng(0)).is_err());
    }
}
