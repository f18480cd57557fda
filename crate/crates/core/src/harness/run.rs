//! Simulation loops and replication.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::envmodel::{DistributionSequence, LossSampler};
use crate::error::{Error, Result};
use crate::policy::{BanditPolicy, ExpertPolicy, Learner};
use crate::streams::{self, Purpose};

/// Identifies one run in emitted output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunLabel {
    pub alg: String,
    pub env: String,
    pub seed: u64,
    pub rep: usize,
}

impl RunLabel {
    pub fn new(alg: impl Into<String>, env: impl Into<String>, seed: u64, rep: usize) -> Self {
        Self {
            alg: alg.into(),
            env: env.into(),
            seed,
            rep,
        }
    }
}

/// Cumulative dynamic pseudo-regret after each step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub label: RunLabel,
    pub cum_regret: Vec<f64>,
}

impl RegretTrace {
    pub fn len(&self) -> usize {
        self.cum_regret.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cum_regret.is_empty()
    }

    pub fn final_regret(&self) -> f64 {
        self.cum_regret.last().copied().unwrap_or(0.0)
    }

    /// Cumulative regret after step `t` (1-based); zero at `t = 0`.
    pub fn at(&self, t: usize) -> f64 {
        if t == 0 {
            0.0
        } else {
            self.cum_regret[t - 1]
        }
    }

    pub fn is_monotone(&self) -> bool {
        self.cum_regret.windows(2).all(|w| w[1] >= w[0]) && self.cum_regret.first().map_or(true, |&x| x >= 0.0)
    }
}

fn check_shape(arms: usize, horizon: Option<usize>, seq: &DistributionSequence) -> Result<()> {
    if arms != seq.arms() {
        return Err(Error::ArmMismatch {
            expected: arms,
            actual: seq.arms(),
        });
    }
    match horizon {
        Some(h) if h != seq.horizon() => Err(Error::HorizonMismatch {
            expected: h,
            actual: seq.horizon(),
        }),
        _ => Ok(()),
    }
}

fn push_increment(trace: &mut Vec<f64>, increment: f64, t: usize) -> Result<()> {
    if !(increment >= 0.0) {
        return Err(Error::Invariant(format!(
            "negative regret increment {increment} at step {t}"
        )));
    }
    let last = trace.last().copied().unwrap_or(0.0);
    trace.push(last + increment);
    Ok(())
}

/// Bandit feedback: only the chosen arm's sampled loss is revealed.
pub fn run_bandit<P: BanditPolicy + ?Sized>(
    policy: &mut P,
    seq: &DistributionSequence,
    label: &RunLabel,
) -> Result<RegretTrace> {
    run_bandit_observed(policy, seq, label, |_, _| Ok(()))
}

/// [`run_bandit`] with a callback after every observation.
pub fn run_bandit_observed<P, F>(
    policy: &mut P,
    seq: &DistributionSequence,
    label: &RunLabel,
    mut after_step: F,
) -> Result<RegretTrace>
where
    P: BanditPolicy + ?Sized,
    F: FnMut(&P, usize) -> Result<()>,
{
    check_shape(policy.arms(), policy.horizon(), seq)?;
    let mut rng = streams::stream(label.seed, Purpose::Policy);
    let mut sampler = LossSampler::new(label.seed);
    let mut cum = Vec::with_capacity(seq.horizon());
    for t in 1..=seq.horizon() {
        let arm = policy.select(&mut rng);
        if arm >= seq.arms() {
            return Err(Error::ArmOutOfRange {
                arm,
                arms: seq.arms(),
            });
        }
        let loss = sampler.sample(seq, t)?;
        policy.observe(arm, loss[arm])?;
        let means = seq.mean_vector(t);
        push_increment(&mut cum, means[arm] - seq.best_mean(t), t)?;
        after_step(policy, t)?;
    }
    Ok(RegretTrace {
        label: label.clone(),
        cum_regret: cum,
    })
}

/// Full information: the whole sampled loss vector is revealed and the
/// increment is the exact expectation `<p_t, mu_t> - min_i mu_{t,i}`.
pub fn run_fullinfo<P: ExpertPolicy + ?Sized>(
    policy: &mut P,
    seq: &DistributionSequence,
    label: &RunLabel,
) -> Result<RegretTrace> {
    run_fullinfo_observed(policy, seq, label, |_, _| Ok(()))
}

/// [`run_fullinfo`] with a callback after every update.
pub fn run_fullinfo_observed<P, F>(
    policy: &mut P,
    seq: &DistributionSequence,
    label: &RunLabel,
    mut after_step: F,
) -> Result<RegretTrace>
where
    P: ExpertPolicy + ?Sized,
    F: FnMut(&P, usize) -> Result<()>,
{
    check_shape(policy.arms(), policy.horizon(), seq)?;
    let mut sampler = LossSampler::new(label.seed);
    let mut cum = Vec::with_capacity(seq.horizon());
    for t in 1..=seq.horizon() {
        let p = policy.play();
        p.validate()?;
        let means = seq.mean_vector(t);
        let best = seq.best_mean(t);
        let increment: f64 = p
            .weights()
            .iter()
            .zip(means)
            .map(|(w, m)| w * (m - best))
            .sum();
        let loss = sampler.sample(seq, t)?;
        policy.update(&loss)?;
        push_increment(&mut cum, increment, t)?;
        after_step(policy, t)?;
    }
    Ok(RegretTrace {
        label: label.clone(),
        cum_regret: cum,
    })
}

pub fn run_learner(
    learner: &mut Learner,
    seq: &DistributionSequence,
    label: &RunLabel,
) -> Result<RegretTrace> {
    match learner {
        Learner::Bandit(p) => run_bandit(p.as_mut(), seq, label),
        Learner::FullInfo(p) => run_fullinfo(p.as_mut(), seq, label),
    }
}

/// Runs `replications` independent jobs in parallel. Job `rep` receives the
/// seed `base_seed + rep`; results come back in replication order.
pub fn replicate<F>(replications: usize, base_seed: u64, job: F) -> Result<Vec<RegretTrace>>
where
    F: Fn(usize, u64) -> Result<RegretTrace> + Sync,
{
    if replications == 0 {
        return Err(Error::InvalidParameter("replications must be >= 1".into()));
    }
    (0..replications)
        .into_par_iter()
        .map(|rep| job(rep, streams::replication_seed(base_seed, rep)))
        .collect()
}

/// Mean and standard error of final regret across replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub replications: usize,
    pub mean: f64,
    pub std_error: f64,
}

pub fn summarize(values: &[f64]) -> Summary {
    let n = values.len();
    if n == 0 {
        return Summary {
            replications: 0,
            mean: 0.0,
            std_error: 0.0,
        };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let std_error = if n < 2 {
        0.0
    } else {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    };
    Summary {
        replications: n,
        mean,
        std_error,
    }
}

pub fn summarize_final(traces: &[RegretTrace]) -> Summary {
    summarize(&traces.iter().map(RegretTrace::final_regret).collect::<Vec<_>>())
}

/// Per-step mean and standard error over traces of equal length.
pub fn mean_trace(traces: &[&RegretTrace]) -> (Vec<f64>, Vec<f64>) {
    let len = traces.iter().map(|t| t.len()).min().unwrap_or(0);
    let mut mean = Vec::with_capacity(len);
    let mut se = Vec::with_capacity(len);
    let mut column = Vec::with_capacity(traces.len());
    for i in 0..len {
        column.clear();
        column.extend(traces.iter().map(|t| t.cum_regret[i]));
        let s = summarize(&column);
        mean.push(s.mean);
        se.push(s.std_error);
    }
    (mean, se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::banditalg::{FixedArm, UniformRandom};
    use crate::gdexperts::SimplexPoint;

    #[derive(Clone)]
    struct Oracle {
        seq: DistributionSequence,
        t: usize,
    }

    impl ExpertPolicy for Oracle {
        fn arms(&self) -> usize {
            self.seq.arms()
        }
        fn play(&mut self) -> SimplexPoint {
            SimplexPoint::vertex(self.seq.arms(), self.seq.best_arm(self.t + 1))
        }
        fn update(&mut self, _loss: &[f64]) -> Result<()> {
            self.t += 1;
            Ok(())
        }
        fn clone_box(&self) -> Box<dyn ExpertPolicy> {
            Box::new(self.clone())
        }
    }

    fn label() -> RunLabel {
        RunLabel::new("test", "test", 3, 0)
    }

    #[test]
    fn single_arm_is_flat() {
        let seq = DistributionSequence::from_means(&vec![vec![0.4]; 50], 0.04).unwrap();
        let trace = run_bandit(&mut UniformRandom::new(1).unwrap(), &seq, &label()).unwrap();
        assert!(trace.cum_regret.iter().all(|&x| x == 0.0));
        assert_eq!(trace.len(), 50);
    }

    #[test]
    fn oracle_has_zero_regret() {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|t| if t % 7 < 3 { vec![0.1, 0.8] } else { vec![0.9, 0.2] })
            .collect();
        let seq = DistributionSequence::from_point_masses(&rows).unwrap();
        let mut oracle = Oracle { seq: seq.clone(), t: 0 };
        let trace = run_fullinfo(&mut oracle, &seq, &label()).unwrap();
        assert_eq!(trace.final_regret(), 0.0);
    }

    #[test]
    fn uniform_fullinfo_constant_increment() {
        let seq = DistributionSequence::from_point_masses(&vec![vec![0.2, 0.6]; 10]).unwrap();
        let trace = run_fullinfo(&mut UniformRandom::new(2).unwrap(), &seq, &label()).unwrap();
        for (t, v) in trace.cum_regret.iter().enumerate() {
            assert!((v - 0.2 * (t + 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_bandit_on_held_vector() {
        let seq = DistributionSequence::from_point_masses(&vec![vec![0.5, 1.0]; 2000]).unwrap();
        let traces = replicate(100, 11, |rep, seed| {
            run_bandit(
                &mut UniformRandom::new(2).unwrap(),
                &seq,
                &RunLabel::new("uniform", "held", seed, rep),
            )
        })
        .unwrap();
        let s = summarize_final(&traces);
        assert!((s.mean - 500.0).abs() <= 0.05 * 500.0, "{}", s.mean);
        for (rep, t) in traces.iter().enumerate() {
            assert_eq!(t.label.rep, rep);
            assert_eq!(t.label.seed, 11 + rep as u64);
        }
    }

    #[test]
    fn fixed_arm_on_its_own_env() {
        let seq = DistributionSequence::from_means(&vec![vec![0.7, 0.3]; 100], 0.01).unwrap();
        let trace = run_bandit(&mut FixedArm::new(2, 1).unwrap(), &seq, &label()).unwrap();
        assert_eq!(trace.final_regret(), 0.0);
    }

    #[test]
    fn arm_mismatch() {
        let seq = DistributionSequence::from_point_masses(&vec![vec![0.5, 1.0]; 5]).unwrap();
        let err = run_bandit(&mut UniformRandom::new(3).unwrap(), &seq, &label()).unwrap_err();
        assert!(matches!(err, Error::ArmMismatch { .. }));
    }

    #[test]
    fn summary_statistics() {
        let s = summarize(&[1.0, 2.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert!((s.std_error - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(summarize(&[4.0]).std_error, 0.0);
    }
}
