//! Parameter grids: one summary row per (environment, learner, horizon).

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::config::{run_experiment, AlgSpec, EnvSpec, ExperimentConfig};
use super::output::format_sig;
use super::run::summarize_final;

pub const SWEEP_HEADER: &str = "alg,env,T,K,replications,mean_final_regret,std_error";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub envs: Vec<EnvSpec>,
    pub algs: Vec<AlgSpec>,
    #[serde(rename = "T")]
    pub horizons: Vec<usize>,
    #[serde(rename = "K")]
    pub arms: usize,
    #[serde(default = "one")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alg: String,
    pub env: String,
    pub horizon: usize,
    pub arms: usize,
    pub replications: usize,
    pub mean_final_regret: f64,
    pub std_error: f64,
}

impl SweepRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.alg,
            self.env,
            self.horizon,
            self.arms,
            self.replications,
            format_sig(self.mean_final_regret),
            format_sig(self.std_error)
        )
    }
}

/// Runs the Cartesian product env x alg x T, writing each row as soon as it is
/// done. Every cell uses the same base seed.
pub fn sweep<W: Write>(config: &SweepConfig, out: &mut W) -> Result<Vec<SweepRow>> {
    writeln!(out, "{SWEEP_HEADER}")?;
    let mut rows = Vec::new();
    for env in &config.envs {
        for alg in &config.algs {
            for &horizon in &config.horizons {
                let mut cell = ExperimentConfig::new(env.clone(), alg.clone(), config.arms, horizon);
                cell.replications = config.replications;
                cell.seed = config.seed;
                let traces = run_experiment(&cell)?;
                let s = summarize_final(&traces);
                let row = SweepRow {
                    alg: alg.id(),
                    env: env.id(),
                    horizon,
                    arms: config.arms,
                    replications: s.replications,
                    mean_final_regret: s.mean,
                    std_error: s.std_error,
                };
                writeln!(out, "{}", row.to_csv())?;
                out.flush()?;
                rows.push(row);
            }
        }
    }
    Ok(rows)
}
