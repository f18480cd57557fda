//! Experiment runner: drives learners through environments, measures dynamic
//! pseudo-regret, and writes CSV traces, sweep tables and SVG plots.

pub mod config;
pub mod output;
pub mod plot;
pub mod run;
pub mod suites;
pub mod sweep;

pub use config::{run_experiment, AlgSpec, EnvSpec, ExperimentConfig};
pub use output::{format_sig, parse_traces, traces_to_csv, write_traces, TRACE_HEADER};
pub use plot::emit_plot;
pub use run::{
    mean_trace, replicate, run_bandit, run_bandit_observed, run_fullinfo, run_fullinfo_observed,
    run_learner, summarize, summarize_final, RegretTrace, RunLabel, Summary,
};
pub use suites::{run_all, run_suite, SuiteReport, Validator, SUITES};
pub use sweep::{sweep, SweepConfig, SweepRow};
