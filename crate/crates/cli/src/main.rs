//! `nsregret`: run experiments, sweeps, adversary constructions and the
//! validation suites from the command line.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nsregret::adversary::{
    adversary_rng, build_drifting_lowerbound, build_fullinfo_gamma_lowerbound,
    build_fullinfo_variance_lowerbound, build_switching_adversary, MIN_MC_RUNS,
};
use nsregret::banditalg::{FixedArm, RerunUcbV, RerunUcbVConfig, UniformRandom};
use nsregret::harness::{
    emit_plot, parse_traces, run_experiment, sweep, write_traces, AlgSpec, EnvSpec,
    ExperimentConfig, SweepConfig, Validator, SUITES,
};
use nsregret::{BanditPolicy, Error, Result};

#[derive(Parser)]
#[command(name = "nsregret", version, about = "Non-stationary bandit and experts regret simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its regret traces as CSV.
    Run(RunArgs),
    /// Run a grid of experiments, one summary row per cell.
    Sweep(SweepArgs),
    /// Build a lower-bound loss sequence.
    Adversary(AdversaryArgs),
    /// Run validation suites; exits non-zero if any fails.
    Validate(ValidateArgs),
    /// Render a trace CSV as an SVG plot.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum EnvKind {
    Switching,
    Drifting,
    Held,
    File,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// rerun-ucbv, gd-fixed, gd-adaptive, prod, prod-sleeping, uniform, fixed-arm[-k]
    #[arg(long)]
    alg: Option<String>,
    #[arg(long, value_enum)]
    env: Option<EnvKind>,
    /// Switch budget: the switching generator's Γ and gd-fixed's tuning Γ.
    #[arg(long)]
    gamma: Option<usize>,
    /// Gap between the best and the other arms (switching).
    #[arg(long)]
    gap: Option<f64>,
    /// Drift budget V (drifting).
    #[arg(long)]
    drift: Option<f64>,
    /// Per-step per-arm variance.
    #[arg(long)]
    variance: Option<f64>,
    /// Comma-separated mean losses of a held environment.
    #[arg(long, value_delimiter = ',')]
    losses: Option<Vec<f64>>,
    /// Sequence JSON file (implies --env file).
    #[arg(long)]
    env_file: Option<PathBuf>,
    #[arg(short = 'T', long = "horizon")]
    horizon: Option<usize>,
    #[arg(short = 'K', long = "arms")]
    arms: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Confidence parameter of rerun-ucbv.
    #[arg(long)]
    delta: Option<f64>,
    /// Block length of rerun-ucbv or gd-adaptive.
    #[arg(long)]
    block: Option<usize>,
    /// Arm of the fixed-arm baseline.
    #[arg(long)]
    arm: Option<usize>,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG plot output path.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON sweep config: envs, algs, T (list), K, replications, seed.
    #[arg(long)]
    config: PathBuf,
    #[arg(short = 'T', long = "horizons", value_delimiter = ',')]
    horizons: Option<Vec<usize>>,
    #[arg(short = 'K', long = "arms")]
    arms: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AdversaryKind {
    Switching,
    Drifting,
    FullinfoGamma,
    FullinfoVariance,
}

#[derive(Args)]
struct AdversaryArgs {
    #[arg(long, value_enum)]
    kind: AdversaryKind,
    /// Bandit learner the adaptive constructions target: rerun-ucbv, uniform, fixed-arm[-k].
    #[arg(long, default_value = "rerun-ucbv")]
    target_alg: String,
    #[arg(long, default_value_t = MIN_MC_RUNS)]
    mc_runs: usize,
    #[arg(short = 'T', long = "horizon")]
    horizon: usize,
    #[arg(short = 'K', long = "arms", default_value_t = 2)]
    arms: usize,
    /// Switch budget Γ.
    #[arg(long)]
    gamma: Option<usize>,
    /// Drift budget V.
    #[arg(long)]
    drift: Option<f64>,
    /// Variance budget Λ.
    #[arg(long)]
    variance: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sequence JSON output path.
    #[arg(long)]
    out: PathBuf,
    /// Diagnostics JSON path; defaults to `<out>.diagnostics.json`.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Suite name, or `all`.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Also write the reports as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "cumulative dynamic regret")]
    title: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args).map(|()| true),
        Command::Sweep(args) => cmd_sweep(args).map(|()| true),
        Command::Adversary(args) => cmd_adversary(args).map(|()| true),
        Command::Validate(args) => cmd_validate(args),
        Command::Plot(args) => cmd_plot(args).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn apply_alg_flags(mut alg: AlgSpec, args: &RunArgs) -> AlgSpec {
    match &mut alg {
        AlgSpec::RerunUcbv { delta, block } => {
            if args.delta.is_some() {
                *delta = args.delta;
            }
            if args.block.is_some() {
                *block = args.block;
            }
        }
        AlgSpec::GdFixed { gamma } => {
            if let Some(g) = args.gamma {
                *gamma = Some(g as f64);
            }
        }
        AlgSpec::GdAdaptive { block } => {
            if args.block.is_some() {
                *block = args.block;
            }
        }
        AlgSpec::FixedArm { arm } => {
            if let Some(a) = args.arm {
                *arm = a;
            }
        }
        AlgSpec::Prod | AlgSpec::ProdSleeping | AlgSpec::Uniform => {}
    }
    alg
}

fn build_env(kind: EnvKind, base: Option<&EnvSpec>, args: &RunArgs) -> Result<EnvSpec> {
    Ok(match kind {
        EnvKind::Switching => {
            let (g0, gap0, var0) = match base {
                Some(EnvSpec::Switching { gamma, gap, variance }) => (Some(*gamma), Some(*gap), *variance),
                _ => (None, None, 0.0),
            };
            EnvSpec::Switching {
                gamma: args
                    .gamma
                    .or(g0)
                    .ok_or_else(|| invalid("switching environment needs --gamma"))?,
                gap: args.gap.or(gap0).unwrap_or(0.5),
                variance: args.variance.unwrap_or(var0),
            }
        }
        EnvKind::Drifting => {
            let (d0, v0) = match base {
                Some(EnvSpec::Drifting { drift, variance }) => (Some(*drift), *variance),
                _ => (None, 0.0),
            };
            EnvSpec::Drifting {
                drift: args
                    .drift
                    .or(d0)
                    .ok_or_else(|| invalid("drifting environment needs --drift"))?,
                variance: args.variance.unwrap_or(v0),
            }
        }
        EnvKind::Held => {
            let base_losses = match base {
                Some(EnvSpec::Held { losses }) => Some(losses.clone()),
                _ => None,
            };
            EnvSpec::Held {
                losses: args
                    .losses
                    .clone()
                    .or(base_losses)
                    .ok_or_else(|| invalid("held environment needs --losses"))?,
            }
        }
        EnvKind::File => {
            let base_path = match base {
                Some(EnvSpec::File { path }) => Some(path.clone()),
                _ => None,
            };
            EnvSpec::File {
                path: args
                    .env_file
                    .clone()
                    .or(base_path)
                    .ok_or_else(|| invalid("file environment needs --env-file"))?,
            }
        }
    })
}

fn env_kind(env: &EnvSpec) -> EnvKind {
    match env {
        EnvSpec::Switching { .. } => EnvKind::Switching,
        EnvSpec::Drifting { .. } => EnvKind::Drifting,
        EnvSpec::Held { .. } => EnvKind::Held,
        EnvSpec::File { .. } => EnvKind::File,
    }
}

fn experiment_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let base = match &args.config {
        Some(path) => Some(ExperimentConfig::from_json(&fs::read_to_string(path)?)?),
        None => None,
    };
    let alg = match (&args.alg, &base) {
        (Some(name), _) => name.parse()?,
        (None, Some(b)) => b.alg.clone(),
        (None, None) => return Err(invalid("--alg is required without --config")),
    };
    let alg = apply_alg_flags(alg, args);
    let kind = match (args.env, &args.env_file, &base) {
        (Some(k), _, _) => k,
        (None, Some(_), _) => EnvKind::File,
        (None, None, Some(b)) => env_kind(&b.env),
        (None, None, None) => return Err(invalid("--env is required without --config")),
    };
    let env = build_env(kind, base.as_ref().map(|b| &b.env), args)?;

    // a sequence file fixes K and T
    let file_shape = match &env {
        EnvSpec::File { path } => {
            let seq = nsregret::DistributionSequence::from_json(&fs::read_to_string(path)?)?;
            Some((seq.arms(), seq.horizon()))
        }
        EnvSpec::Held { losses } => Some((losses.len(), 0)),
        _ => None,
    };
    let arms = args
        .arms
        .or(base.as_ref().map(|b| b.arms))
        .or(file_shape.map(|s| s.0))
        .ok_or_else(|| invalid("-K is required"))?;
    let horizon = args
        .horizon
        .or(base.as_ref().map(|b| b.horizon))
        .or(file_shape.map(|s| s.1).filter(|&t| t > 0))
        .ok_or_else(|| invalid("-T is required"))?;

    let mut config = ExperimentConfig::new(env, alg, arms, horizon);
    if let Some(b) = &base {
        config.replications = b.replications;
        config.seed = b.seed;
        config.csv = b.csv.clone();
        config.svg = b.svg.clone();
    }
    if let Some(r) = args.reps {
        config.replications = r;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if args.out.is_some() {
        config.csv = args.out.clone();
    }
    if args.plot.is_some() {
        config.svg = args.plot.clone();
    }
    config.validate()?;
    Ok(config)
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let config = experiment_config(&args)?;
    let traces = run_experiment(&config)?;
    let mut out = open_output(config.csv.as_deref())?;
    write_traces(&mut out, &traces)?;
    out.flush()?;
    if let Some(svg) = &config.svg {
        let title = format!("{} on {}", config.alg.id(), config.env.id());
        fs::write(svg, emit_plot(&traces, &title))?;
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let mut config: SweepConfig = serde_json::from_str(&fs::read_to_string(&args.config)?)?;
    if let Some(h) = args.horizons {
        config.horizons = h;
    }
    if let Some(k) = args.arms {
        config.arms = k;
    }
    if let Some(r) = args.reps {
        config.replications = r;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    let mut out = open_output(args.out.as_deref())?;
    sweep(&config, &mut out)?;
    out.flush()?;
    Ok(())
}

/// Builds target learners without seeing the sequence: rerun-ucbv is tuned
/// from the given budgets.
fn bandit_factory(
    name: &str,
    arms: usize,
    horizon: usize,
    drift: f64,
    variance: f64,
) -> Result<Box<dyn Fn() -> Box<dyn BanditPolicy> + Sync>> {
    let spec: AlgSpec = name.parse()?;
    Ok(match spec {
        AlgSpec::RerunUcbv { delta, block } => {
            let mut config = RerunUcbVConfig::from_budgets(arms, horizon, drift, variance)?;
            if let Some(d) = delta {
                config = config.with_delta(d);
            }
            if let Some(b) = block {
                config = config.with_block(b);
            }
            RerunUcbV::new(config.clone())?;
            Box::new(move || Box::new(RerunUcbV::new(config.clone()).expect("checked above")))
        }
        AlgSpec::Uniform => {
            UniformRandom::new(arms)?;
            Box::new(move || Box::new(UniformRandom::new(arms).expect("checked above")))
        }
        AlgSpec::FixedArm { arm } => {
            FixedArm::new(arms, arm)?;
            Box::new(move || Box::new(FixedArm::new(arms, arm).expect("checked above")))
        }
        other => {
            return Err(invalid(format!(
                "adversary targets bandit learners; '{}' is full-information",
                other.id()
            )))
        }
    })
}

fn cmd_adversary(args: AdversaryArgs) -> Result<()> {
    let mut rng = adversary_rng(args.seed);
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| invalid(format!("this construction needs --{flag}")));
    let gamma = || args.gamma.ok_or_else(|| invalid("this construction needs --gamma"));
    let (seq, diagnostics) = match args.kind {
        AdversaryKind::Switching => {
            if args.arms != 2 {
                return Err(invalid("the switching adversary uses K = 2"));
            }
            let g = gamma()?;
            let factory = bandit_factory(&args.target_alg, 2, args.horizon, g as f64, 0.0)?;
            let (seq, diag) = build_switching_adversary(&factory, args.horizon, g, args.mc_runs, &mut rng)?;
            for w in &diag.warnings {
                eprintln!("warning: {w}");
            }
            (seq, serde_json::to_value(diag)?)
        }
        AdversaryKind::Drifting => {
            let (drift, variance) = (need(args.drift, "drift")?, need(args.variance, "variance")?);
            let factory = bandit_factory(&args.target_alg, args.arms, args.horizon, drift, variance)?;
            let (seq, diag) = build_drifting_lowerbound(
                &factory,
                args.horizon,
                args.arms,
                drift,
                variance,
                args.mc_runs,
                &mut rng,
            )?;
            for w in &diag.warnings {
                eprintln!("warning: {w}");
            }
            (seq, serde_json::to_value(diag)?)
        }
        AdversaryKind::FullinfoGamma => {
            let (seq, diag) = build_fullinfo_gamma_lowerbound(args.arms, args.horizon, gamma()?, &mut rng)?;
            (seq, serde_json::to_value(diag)?)
        }
        AdversaryKind::FullinfoVariance => {
            let variance = need(args.variance, "variance")?;
            let (seq, diag) =
                build_fullinfo_variance_lowerbound(args.arms, args.horizon, gamma()?, variance, &mut rng)?;
            (seq, serde_json::to_value(diag)?)
        }
    };
    fs::write(&args.out, seq.to_json()?)?;
    let sidecar = args.diagnostics.unwrap_or_else(|| {
        let mut name = args.out.clone().into_os_string();
        name.push(".diagnostics.json");
        PathBuf::from(name)
    });
    let params = nsregret::compute_params(&seq);
    let doc = serde_json::json!({
        "kind": args.kind.to_possible_value().map(|v| v.get_name().to_string()),
        "target_alg": args.target_alg,
        "seed": args.seed,
        "params": params,
        "diagnostics": diagnostics,
    });
    fs::write(sidecar, serde_json::to_string_pretty(&doc)?)?;
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<bool> {
    let names: Vec<&str> = if args.suite == "all" {
        SUITES.to_vec()
    } else {
        let name = SUITES
            .iter()
            .find(|s| **s == args.suite)
            .ok_or_else(|| invalid(format!("unknown suite '{}'; expected all or one of {}", args.suite, SUITES.join(", "))))?;
        vec![*name]
    };
    let mut validator = Validator::new();
    let mut reports = Vec::new();
    for name in names {
        let report = validator.run(name)?;
        println!("{}", report.line());
        reports.push(report);
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("{}/{} suites passed", reports.len() - failed, reports.len());
    if let Some(path) = args.json {
        fs::write(path, serde_json::to_string_pretty(&reports)?)?;
    }
    Ok(failed == 0)
}

fn cmd_plot(args: PlotArgs) -> Result<()> {
    let traces = parse_traces(&fs::read_to_string(&args.input)?)?;
    fs::write(&args.out, emit_plot(&traces, &args.title))?;
    Ok(())
}
