//! Validation suites: empirical checks of the algorithms' guarantees and of
//! the library's invariants, each reported as pass or fail.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::adversary::{adversary_rng, build_drifting_lowerbound, build_switching_adversary};
use crate::banditalg::{RerunUcbV, RerunUcbVConfig, UniformRandom};
use crate::bernstein::{rho, RunningStats};
use crate::envmodel::{
    compute_params, gen_drifting, gen_switching, kl_two_point, lemma1_pair, DistributionSequence,
    DriftingConfig, LossSampler, SwitchingConfig,
};
use crate::error::{Error, Result};
use crate::gdexperts::{project_simplex, theorem3_eta, EtaMode, GdExperts};
use crate::policy::{BanditPolicy, ExpertPolicy};
use crate::prodexperts::{ProdExperts, SleepingProd, ETA_CAP};
use crate::streams::{self, Purpose};

use super::config::{run_experiment, AlgSpec, EnvSpec, ExperimentConfig};
use super::output::traces_to_csv;
use super::run::{
    replicate, run_bandit, run_fullinfo, run_fullinfo_observed, summarize_final, RunLabel,
};

pub const SUITES: [&str; 12] = [
    "bernstein-coverage",
    "lemma1-conditions",
    "simplex-projection-oracle",
    "gd-constant-regret",
    "bandit-T-dependence-contrast",
    "rerun-ucbv-scaling",
    "prod-static-envelope",
    "sleeping-identities",
    "prod-sleeping-dynamic",
    "drifting-lowerbound-budgets",
    "fixed-point-residual",
    "invariant-suite",
];

fn budget_seconds(name: &str) -> f64 {
    match name {
        "bernstein-coverage" => 30.0,
        "lemma1-conditions" => 1.0,
        "simplex-projection-oracle" => 10.0,
        "gd-constant-regret" => 5.0,
        "bandit-T-dependence-contrast" | "rerun-ucbv-scaling" => 600.0,
        "prod-static-envelope" | "invariant-suite" => 120.0,
        "sleeping-identities" => 60.0,
        "prod-sleeping-dynamic" | "drifting-lowerbound-budgets" => 300.0,
        _ => f64::INFINITY,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub passed: bool,
    pub details: Vec<String>,
    pub seconds: f64,
    pub budget_seconds: f64,
}

impl SuiteReport {
    /// One line: `PASS name (1.23s): detail; detail`.
    pub fn line(&self) -> String {
        format!(
            "{} {} ({:.2}s, budget {}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.seconds,
            self.budget_seconds,
            self.details.join("; ")
        )
    }
}

/// Outcome collected while a suite runs.
#[derive(Default)]
struct Checks {
    ok: bool,
    details: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Self {
            ok: true,
            details: Vec::new(),
        }
    }

    fn check(&mut self, cond: bool, detail: String) {
        if !cond {
            self.ok = false;
            self.details.push(format!("FAILED {detail}"));
        } else {
            self.details.push(detail);
        }
    }

    fn note(&mut self, detail: String) {
        self.details.push(detail);
    }
}

/// Largest fixed-point residual seen per prod run, with the run's `1/T`.
#[derive(Debug, Clone, Default)]
struct ResidualLog {
    runs: Vec<(String, f64, f64)>,
}

impl ResidualLog {
    fn record(&mut self, run: String, max_residual: f64, horizon: usize) {
        self.runs.push((run, max_residual, 1.0 / horizon as f64));
    }
}

/// Runs suites in order, sharing prod-run residual logs with
/// `fixed-point-residual`.
#[derive(Default)]
pub struct Validator {
    residuals: ResidualLog,
    prod_suites_done: Vec<&'static str>,
}

const PROD_SUITES: [&str; 3] = [
    "prod-static-envelope",
    "sleeping-identities",
    "prod-sleeping-dynamic",
];

impl Validator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn run(&mut self, name: &str) -> Result<SuiteReport> {
        let start = Instant::now();
        let checks = match name {
            "bernstein-coverage" => bernstein_coverage()?,
            "lemma1-conditions" => lemma1_conditions()?,
            "simplex-projection-oracle" => simplex_projection_oracle(),
            "gd-constant-regret" => gd_constant_regret()?,
            "bandit-T-dependence-contrast" => bandit_contrast()?,
            "rerun-ucbv-scaling" => rerun_ucbv_scaling()?,
            "prod-static-envelope" => self.prod_suite(0)?,
            "sleeping-identities" => self.prod_suite(1)?,
            "prod-sleeping-dynamic" => self.prod_suite(2)?,
            "drifting-lowerbound-budgets" => drifting_lowerbound_budgets()?,
            "fixed-point-residual" => self.fixed_point_residual()?,
            "invariant-suite" => invariant_suite()?,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown suite '{other}'; expected one of {}",
                    SUITES.join(", ")
                )))
            }
        };
        let seconds = start.elapsed().as_secs_f64();
        let budget = budget_seconds(name);
        let mut details = checks.details;
        let within = seconds <= budget;
        if !within {
            details.push(format!("FAILED runtime {seconds:.1}s exceeds {budget}s"));
        }
        Ok(SuiteReport {
            name: name.to_string(),
            passed: checks.ok && within,
            details,
            seconds,
            budget_seconds: budget,
        })
    }

    fn prod_suite(&mut self, which: usize) -> Result<Checks> {
        let log = &mut self.residuals;
        let checks = match which {
            0 => prod_static_envelope(log)?,
            1 => sleeping_identities(log)?,
            _ => prod_sleeping_dynamic(log)?,
        };
        if !self.prod_suites_done.contains(&PROD_SUITES[which]) {
            self.prod_suites_done.push(PROD_SUITES[which]);
        }
        Ok(checks)
    }

    fn fixed_point_residual(&mut self) -> Result<Checks> {
        for (i, name) in PROD_SUITES.iter().enumerate() {
            if !self.prod_suites_done.contains(name) {
                self.prod_suite(i)?;
            }
        }
        let mut c = Checks::new();
        let worst = self
            .residuals
            .runs
            .iter()
            .map(|(_, r, tol)| r / tol)
            .fold(0.0, f64::max);
        let failing: Vec<&String> = self
            .residuals
            .runs
            .iter()
            .filter(|(_, r, tol)| r > tol)
            .map(|(n, _, _)| n)
            .collect();
        c.check(
            failing.is_empty() && !self.residuals.runs.is_empty(),
            format!(
                "{} prod runs, max residual * T = {worst:.3} (<= 1){}",
                self.residuals.runs.len(),
                if failing.is_empty() {
                    String::new()
                } else {
                    format!(", over tolerance: {failing:?}")
                }
            ),
        );
        Ok(c)
    }
}

/// Runs one suite in a fresh [`Validator`].
pub fn run_suite(name: &str) -> Result<SuiteReport> {
    Validator::new().run(name)
}

/// Runs every suite in order.
pub fn run_all() -> Result<Vec<SuiteReport>> {
    let mut v = Validator::new();
    SUITES.iter().map(|name| v.run(name)).collect()
}

fn bernstein_coverage() -> Result<Checks> {
    let mut c = Checks::new();
    let trials = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for p in [0.1, 0.5] {
        for n in [30u64, 100] {
            for delta in [0.05, 0.2] {
                let mut violations = 0;
                for _ in 0..trials {
                    let mut stats = RunningStats::new();
                    for _ in 0..n {
                        stats.update(if rng.gen::<f64>() < p { 1.0 } else { 0.0 })?;
                    }
                    let radius = rho(n, stats.empirical_variance(), delta)?;
                    violations += usize::from((stats.mean() - p).abs() > radius);
                }
                let rate = violations as f64 / trials as f64;
                c.check(
                    rate <= delta,
                    format!("p={p} n={n} delta={delta}: violation rate {rate:.4}"),
                );
            }
        }
    }
    Ok(c)
}

fn lemma1_conditions() -> Result<Checks> {
    let mut c = Checks::new();
    let tol = 1e-9;
    let mut worst_gap: f64 = 0.0;
    let mut worst_var: f64 = f64::NEG_INFINITY;
    let mut worst_kl: f64 = f64::NEG_INFINITY;
    let mut count = 0;
    for i in 1..=10 {
        let sigma = 0.05 * i as f64;
        for j in 1..=5 {
            let eps = sigma / 2f64.sqrt() * j as f64 / 5.0;
            let (p, q) = lemma1_pair(sigma, eps)?;
            worst_gap = worst_gap.max((q.mean() - p.mean() - eps).abs());
            worst_var = worst_var.max(p.variance().max(q.variance()) - sigma * sigma);
            let kl = 2f64.ln() * kl_two_point(&q, &p)?;
            worst_kl = worst_kl.max(kl - eps * eps / (sigma * sigma));
            count += 1;
        }
    }
    c.check(count == 50, format!("{count} (sigma, epsilon) points"));
    c.check(worst_gap <= tol, format!("max |gap - eps| = {worst_gap:.2e}"));
    c.check(
        worst_var <= tol,
        format!("max variance - sigma^2 = {worst_var:.2e}"),
    );
    c.check(
        worst_kl <= tol,
        format!("max (ln 2) KL - eps^2/sigma^2 = {worst_kl:.2e}"),
    );
    Ok(c)
}

/// Closest point of the simplex grid with spacing `1 / resolution`, `K = 3`.
fn grid_projection_3(y: &[f64], resolution: usize) -> [f64; 3] {
    let h = 1.0 / resolution as f64;
    let mut best = [0.0; 3];
    let mut best_d = f64::INFINITY;
    for a in 0..=resolution {
        for b in 0..=resolution - a {
            let x = [a as f64 * h, b as f64 * h, (resolution - a - b) as f64 * h];
            let d: f64 = x.iter().zip(y).map(|(u, v)| (u - v) * (u - v)).sum();
            if d < best_d {
                best_d = d;
                best = x;
            }
        }
    }
    best
}

fn simplex_projection_oracle() -> Checks {
    let mut c = Checks::new();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let y: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let p = project_simplex(&y);
        let oracle = grid_projection_3(&y, 1000);
        let err = p
            .weights()
            .iter()
            .zip(oracle)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(err);
    }
    c.check(worst <= 1e-3, format!("200 inputs, max l_inf error {worst:.2e}"));
    c
}

fn switching_env(seed: u64, horizon: usize) -> Result<DistributionSequence> {
    EnvSpec::Switching {
        gamma: 2,
        gap: 0.5,
        variance: 0.0,
    }
    .build(2, horizon, seed)
}

fn gd_constant_regret() -> Result<Checks> {
    let mut c = Checks::new();
    for seed in 0..5u64 {
        let mut finals = Vec::new();
        for horizon in [2000, 8000] {
            let seq = switching_env(seed, horizon)?;
            let params = compute_params(&seq);
            let eta = theorem3_eta(params.gamma as f64, params.variance_budget, 2)?;
            let mut gd = GdExperts::new(2, EtaMode::Fixed(eta))?;
            let trace = run_fullinfo(&mut gd, &seq, &RunLabel::new("gd-fixed", "switching", seed, 0))?;
            finals.push(trace.final_regret());
        }
        let growth = finals[1] - finals[0];
        c.check(
            growth <= 1.0,
            format!(
                "env seed {seed}: regret {:.4} at T=2000, {:.4} at T=8000, growth {growth:.4} <= 1",
                finals[0], finals[1]
            ),
        );
    }
    Ok(c)
}

fn bandit_contrast() -> Result<Checks> {
    let mut c = Checks::new();
    let gamma = 2usize;
    for horizon in [2048usize, 8192] {
        let config = RerunUcbVConfig::from_budgets(2, horizon, gamma as f64, 0.0)?;
        let factory = move || -> Box<dyn BanditPolicy> {
            Box::new(RerunUcbV::new(config.clone()).expect("valid configuration"))
        };
        let (seq, diag) =
            build_switching_adversary(&factory, horizon, gamma, 200, &mut adversary_rng(horizon as u64))?;
        let traces = replicate(100, 500, |rep, seed| {
            let mut alg = RerunUcbV::new(config.clone())?;
            run_bandit(&mut alg, &seq, &RunLabel::new("rerun-ucbv", "switching-adversary", seed, rep))
        })?;
        let s = summarize_final(&traces);
        let threshold = 0.04 * ((gamma * horizon) as f64).sqrt();
        let decisions: Vec<String> = diag
            .intervals
            .iter()
            .map(|iv| format!("N2~{:.1} vs {:.1}: {:?}", iv.n2_estimate, iv.threshold, iv.decision))
            .collect();
        c.check(
            s.mean >= threshold,
            format!(
                "T={horizon}: rerun-ucbv regret {:.2} (se {:.2}) >= {threshold:.2} [{}]",
                s.mean,
                s.std_error,
                decisions.join(", ")
            ),
        );
        let learner = AlgSpec::GdFixed { gamma: None }.build(&seq)?;
        let mut gd = match learner {
            crate::policy::Learner::FullInfo(p) => p,
            crate::policy::Learner::Bandit(_) => unreachable!("gd-fixed is full-information"),
        };
        let gd_trace = run_fullinfo(gd.as_mut(), &seq, &RunLabel::new("gd-fixed", "switching-adversary", 500, 0))?;
        c.check(
            gd_trace.final_regret() <= 20.0,
            format!("T={horizon}: gd-fixed regret {:.3} <= 20", gd_trace.final_regret()),
        );
    }
    Ok(c)
}

fn rerun_ucbv_scaling() -> Result<Checks> {
    let mut c = Checks::new();
    let horizons = [1000usize, 4000, 16000];
    let mut points = Vec::new();
    for &horizon in &horizons {
        let mut config = ExperimentConfig::new(
            EnvSpec::Drifting {
                drift: 4.0,
                variance: 1.0 / 16.0,
            },
            AlgSpec::RerunUcbv {
                delta: None,
                block: None,
            },
            2,
            horizon,
        );
        config.replications = 50;
        config.seed = 2024;
        let s = summarize_final(&run_experiment(&config)?);
        c.check(
            s.mean <= 0.5 * horizon as f64,
            format!("T={horizon}: mean regret {:.2} (se {:.2}) <= T/2", s.mean, s.std_error),
        );
        points.push(((horizon as f64).ln(), s.mean.max(f64::MIN_POSITIVE).ln()));
    }
    let slope = least_squares_slope(&points);
    c.check(
        (0.45..=0.85).contains(&slope),
        format!("log-log slope {slope:.3} in [0.45, 0.85]"),
    );
    Ok(c)
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Per-step invariant failures found while running the plain prod learner.
#[derive(Debug, Default)]
struct ProdStepChecks {
    max_residual: f64,
    max_weighted_regret: f64,
    eta_violations: usize,
    deviation_violations: usize,
    invalid_plays: usize,
}

/// Runs plain prod on realised losses, returning the static regret against
/// every fixed arm and the per-step checks.
fn run_prod_on_losses(losses: &[Vec<f64>]) -> Result<(Vec<f64>, ProdStepChecks)> {
    let arms = losses[0].len();
    let horizon = losses.len();
    let mut prod = ProdExperts::new(arms, horizon)?;
    let mut regret = vec![0.0; arms];
    let mut checks = ProdStepChecks::default();
    let mut prev = vec![0.0; arms];
    let mut etas: Vec<f64> = prod.experts().iter().map(|e| e.eta).collect();
    for loss in losses {
        let p = prod.play_step();
        if p.validate().is_err() {
            checks.invalid_plays += 1;
        }
        let mixed = p.dot(loss);
        for (r, l) in regret.iter_mut().zip(loss) {
            *r += mixed - l;
        }
        prod.update_step(loss)?;
        let rec = prod.last_record().expect("record after update");
        checks.max_residual = checks.max_residual.max(rec.residual);
        let r = rec.regrets.as_ref().expect("regrets after update");
        let weighted: f64 = r.iter().zip(&rec.play).map(|(a, b)| a * b).sum();
        checks.max_weighted_regret = checks.max_weighted_regret.max(weighted.abs());
        let dev = loss
            .iter()
            .zip(&prev)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        for (ri, mi) in r.iter().zip(&rec.estimates) {
            if (ri - mi).abs() > 2.0 * dev + rec.residual + 1e-12 {
                checks.deviation_violations += 1;
            }
        }
        for (e, old) in prod.experts().iter().zip(&etas) {
            if e.eta > ETA_CAP || e.eta > *old {
                checks.eta_violations += 1;
            }
        }
        etas = prod.experts().iter().map(|e| e.eta).collect();
        prev.clone_from(loss);
    }
    Ok((regret, checks))
}

fn random_loss_sequence(index: usize, arms: usize, horizon: usize) -> Result<Vec<Vec<f64>>> {
    let seed = 9000 + index as u64;
    let mut rng = streams::stream(seed, Purpose::Generator);
    let seq = match index % 3 {
        0 => gen_drifting(
            &DriftingConfig {
                arms,
                horizon,
                drift: 3.0,
                variance: 0.01,
            },
            &mut rng,
        )?,
        1 => gen_switching(
            &SwitchingConfig::new(arms, horizon, 4, 0.3).with_variance(0.05),
            &mut rng,
        )?,
        _ => gen_switching(&SwitchingConfig::new(arms, horizon, 10, 0.2), &mut rng)?,
    };
    let mut sampler = LossSampler::new(seed);
    (1..=horizon).map(|t| sampler.sample(&seq, t)).collect()
}

fn prod_static_envelope(log: &mut ResidualLog) -> Result<Checks> {
    let mut c = Checks::new();
    let horizon = 2000;
    let mut worst_ratio: f64 = 0.0;
    let mut failures = Vec::new();
    let mut step_failures = 0;
    for index in 0..20 {
        let arms = if index % 2 == 0 { 2 } else { 5 };
        let losses = random_loss_sequence(index, arms, horizon)?;
        let (regret, checks) = run_prod_on_losses(&losses)?;
        log.record(format!("prod-static #{index}"), checks.max_residual, horizon);
        let deviation: f64 = losses
            .windows(2)
            .map(|w| {
                let d = w[1]
                    .iter()
                    .zip(&w[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                d * d
            })
            .sum::<f64>()
            + losses[0].iter().copied().fold(0.0, f64::max).powi(2);
        let ln_k = (arms as f64).ln();
        let envelope =
            10.0 * ((deviation * ln_k).sqrt() + ln_k * (1.0 + (horizon as f64).ln().ln()));
        let worst = regret.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        worst_ratio = worst_ratio.max(worst / envelope);
        if worst > envelope {
            failures.push(format!("#{index}: {worst:.2} > {envelope:.2}"));
        }
        step_failures += checks.invalid_plays
            + checks.eta_violations
            + checks.deviation_violations
            + usize::from(checks.max_weighted_regret > 1e-9);
    }
    c.check(
        failures.is_empty(),
        format!(
            "20 sequences, max regret / envelope = {worst_ratio:.3}{}",
            if failures.is_empty() {
                String::new()
            } else {
                format!(" ({})", failures.join(", "))
            }
        ),
    );
    c.check(
        step_failures == 0,
        format!("{step_failures} per-step invariant violations"),
    );
    Ok(c)
}

fn sleeping_identities(log: &mut ResidualLog) -> Result<Checks> {
    let mut c = Checks::new();
    let (arms, horizon) = (3, 500);
    let tol = 1e-9;
    let mut worst = [0.0f64; 4];
    let mut changed_asleep = 0usize;
    let mut eager_gap: f64 = 0.0;
    for run in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(700 + run);
        let mut lazy = SleepingProd::new(arms, horizon)?;
        let mut eager = SleepingProd::new_eager(arms, horizon)?;
        let initial = eager.initial_state().to_bits();
        let mut max_residual: f64 = 0.0;
        for t in 1..=horizon {
            let p = lazy.sleeping_play();
            let q = eager.sleeping_play();
            eager_gap = eager_gap.max(
                p.weights()
                    .iter()
                    .zip(q.weights())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max),
            );
            let loss: Vec<f64> = (0..arms).map(|_| rng.gen()).collect();
            lazy.sleeping_update(&loss)?;
            eager.sleeping_update(&loss)?;
            let d = lazy.diagnostics();
            max_residual = max_residual.max(d.residual);
            worst[0] = worst[0].max(d.identity_gap);
            worst[1] = worst[1].max(d.max_asleep_regret);
            worst[2] = worst[2].max(d.max_awake_regret_gap);
            worst[3] = worst[3].max(d.weighted_regret);
            // experts waking after t are untouched
            if t % 50 == 0 {
                for s in t + 1..=horizon {
                    for k in 0..arms {
                        if eager.expert(s, k).map(|e| e.to_bits()) != Some(initial) {
                            changed_asleep += 1;
                        }
                    }
                }
            }
        }
        log.record(format!("sleeping-identities #{run}"), max_residual, horizon);
    }
    c.check(worst[0] <= tol, format!("max |<p~,l~> - <p,l>| = {:.2e}", worst[0]));
    c.check(worst[1] <= tol, format!("max |r~| asleep = {:.2e}", worst[1]));
    c.check(worst[2] <= tol, format!("max |r~ - r| awake = {:.2e}", worst[2]));
    c.check(worst[3] <= tol, format!("max |sum p~ r~| = {:.2e}", worst[3]));
    c.check(
        changed_asleep == 0,
        format!("{changed_asleep} asleep expert states changed before waking"),
    );
    c.check(eager_gap <= tol, format!("lazy vs eager play gap {eager_gap:.2e}"));
    Ok(c)
}

fn prod_sleeping_dynamic(log: &mut ResidualLog) -> Result<Checks> {
    let mut c = Checks::new();
    let bound = 3.0 * (2.0f64 * 8000.0).ln();
    for seed in 0..3u64 {
        let mut finals = Vec::new();
        for horizon in [2000, 8000] {
            let seq = switching_env(seed, horizon)?;
            let mut pool = SleepingProd::new(2, horizon)?;
            let mut max_residual: f64 = 0.0;
            let trace = run_fullinfo_observed(
                &mut pool,
                &seq,
                &RunLabel::new("prod-sleeping", "switching", seed, 0),
                |p, _| {
                    max_residual = max_residual.max(p.diagnostics().residual);
                    Ok(())
                },
            )?;
            log.record(format!("prod-sleeping seed {seed} T={horizon}"), max_residual, horizon);
            finals.push(trace.final_regret());
        }
        let growth = finals[1] - finals[0];
        c.check(
            growth <= bound,
            format!(
                "env seed {seed}: regret {:.3} at T=2000, {:.3} at T=8000, growth {growth:.3} <= {bound:.2}",
                finals[0], finals[1]
            ),
        );
    }
    Ok(c)
}

fn drifting_lowerbound_budgets() -> Result<Checks> {
    let mut c = Checks::new();
    let (horizon, arms, drift, variance) = (4000usize, 2usize, 1.0, 40.0);
    let factory = || -> Box<dyn BanditPolicy> { Box::new(UniformRandom::new(2).expect("two arms")) };
    let (seq, diag) =
        build_drifting_lowerbound(&factory, horizon, arms, drift, variance, 50, &mut adversary_rng(10))?;
    let params = compute_params(&seq);
    c.check(
        params.variance_budget <= variance,
        format!("Lambda' = {:.4} <= {variance}", params.variance_budget),
    );
    c.check(params.drift <= drift, format!("V' = {:.6} <= {drift}", params.drift));
    let (sigma, eps) = (diag.sigma, diag.epsilon);
    let gap_ok = (diag.baseline.mean() - diag.better.mean() - eps).abs() <= 1e-9;
    let var_ok = diag.baseline.variance().max(diag.better.variance()) <= sigma * sigma + 1e-9;
    let kl = 2f64.ln() * kl_two_point(&diag.baseline, &diag.better)?;
    let kl_ok = kl <= eps * eps / (sigma * sigma) + 1e-9;
    c.check(
        gap_ok && var_ok && kl_ok && eps <= sigma / 2f64.sqrt(),
        format!(
            "B={}, sigma={sigma:.5}, eps={eps:.6}: pair gap/variance/KL conditions hold",
            diag.block_length
        ),
    );
    let traces = replicate(20, 77, |rep, seed| {
        run_bandit(
            &mut UniformRandom::new(arms)?,
            &seq,
            &RunLabel::new("uniform", "drifting-adversary", seed, rep),
        )
    })?;
    let s = summarize_final(&traces);
    let threshold = eps * horizon as f64 / 8.0;
    c.check(
        s.mean >= threshold,
        format!("uniform regret {:.3} (se {:.3}) >= eps T / 8 = {threshold:.3}", s.mean, s.std_error),
    );
    Ok(c)
}

fn invariant_suite() -> Result<Checks> {
    let mut c = Checks::new();

    // trace monotonicity and simplex validity for every learner
    let envs = [
        EnvSpec::Switching {
            gamma: 5,
            gap: 0.4,
            variance: 0.02,
        },
        EnvSpec::Drifting {
            drift: 2.0,
            variance: 0.02,
        },
    ];
    let mut runs = 0;
    let mut non_monotone = 0;
    for env in &envs {
        for name in AlgSpec::NAMES {
            let mut config = ExperimentConfig::new(env.clone(), name.parse()?, 3, 400);
            config.replications = 3;
            config.seed = 31;
            for trace in run_experiment(&config)? {
                runs += 1;
                non_monotone += usize::from(!trace.is_monotone() || trace.len() != 400);
            }
        }
    }
    c.check(
        non_monotone == 0,
        format!("{runs} runs: {non_monotone} non-monotone or wrong-length traces (plays validated every step)"),
    );

    // per-step prod checks on random losses
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut step_failures = 0;
    for _ in 0..10 {
        let losses: Vec<Vec<f64>> = (0..300).map(|_| (0..4).map(|_| rng.gen()).collect()).collect();
        let (_, checks) = run_prod_on_losses(&losses)?;
        step_failures += checks.invalid_plays + checks.eta_violations + checks.deviation_violations;
        step_failures += usize::from(checks.max_weighted_regret > 1e-9);
    }
    c.check(
        step_failures == 0,
        format!("prod: {step_failures} violations of sum p r = 0, eta monotonicity or |r - m| bound"),
    );

    // pairwise variance identity
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.gen_range(2..=50);
        let xs: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
        let stats = RunningStats::from_samples(&xs)?;
        let mut pairwise = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                pairwise += (xs[i] - xs[j]) * (xs[i] - xs[j]);
            }
        }
        pairwise /= (n * (n - 1)) as f64;
        worst = worst.max((pairwise - stats.empirical_variance()).abs());
    }
    c.check(worst <= 1e-9, format!("pairwise vs one-pass variance, max gap {worst:.2e}"));

    // asleep experts never change before waking
    let mut pool = SleepingProd::new_eager(2, 200)?;
    let initial = pool.initial_state().to_bits();
    let mut changed = 0;
    for t in 1..=200 {
        pool.sleeping_play();
        let loss = [rng.gen(), rng.gen()];
        pool.sleeping_update(&loss)?;
        for s in t + 1..=200 {
            for k in 0..2 {
                changed += usize::from(pool.expert(s, k).map(|e| e.to_bits()) != Some(initial));
            }
        }
    }
    c.check(changed == 0, format!("{changed} asleep expert states changed"));

    // generated sequences: Lambda matches the analytic sum; Gamma matches a scan
    let mut param_failures = 0;
    for seed in 0..10u64 {
        let mut g = streams::stream(seed, Purpose::Generator);
        let seq = if seed % 2 == 0 {
            gen_switching(&SwitchingConfig::new(3, 300, 6, 0.3).with_variance(0.04), &mut g)?
        } else {
            gen_drifting(
                &DriftingConfig {
                    arms: 3,
                    horizon: 300,
                    drift: 2.0,
                    variance: 0.03,
                },
                &mut g,
            )?
        };
        let params = compute_params(&seq);
        let lambda: f64 = seq.rows().iter().flatten().map(|d| d.variance()).sum();
        let mut gamma = 1;
        for t in 2..=300 {
            gamma += usize::from(seq.mean_vector(t) != seq.mean_vector(t - 1));
        }
        param_failures += usize::from((params.variance_budget - lambda).abs() > 1e-12);
        param_failures += usize::from(params.gamma != gamma);
    }
    c.check(
        param_failures == 0,
        format!("{param_failures} mismatches of Gamma / Lambda against brute force"),
    );

    // CSV bytes are a function of (config, seed)
    let mut config = ExperimentConfig::new(
        EnvSpec::Switching {
            gamma: 3,
            gap: 0.3,
            variance: 0.05,
        },
        AlgSpec::RerunUcbv {
            delta: None,
            block: None,
        },
        2,
        500,
    );
    config.replications = 4;
    config.seed = 99;
    let a = traces_to_csv(&run_experiment(&config)?)?;
    let b = traces_to_csv(&run_experiment(&config)?)?;
    c.check(a == b, format!("CSV determinism over {} bytes", a.len()));

    // the learner trait objects behave like their concrete types
    let mut boxed: Box<dyn ExpertPolicy> = Box::new(GdExperts::new(2, EtaMode::Fixed(0.5))?);
    c.check(boxed.play().validate().is_ok(), "boxed learner plays a valid point".into());
    c.note(format!("{} suites registered", SUITES.len()));
    Ok(c)
}
