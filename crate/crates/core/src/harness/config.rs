//! Experiment descriptions: which learner, which environment, how many runs.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::banditalg::{FixedArm, RerunUcbV, RerunUcbVConfig, UniformRandom};
use crate::envmodel::{
    compute_params, gen_drifting, gen_switching, DistributionSequence, DriftingConfig,
    SwitchingConfig,
};
use crate::error::{Error, Result};
use crate::gdexperts::{theorem3_eta, theorem4_block, EtaMode, GdExperts};
use crate::policy::Learner;
use crate::prodexperts::{ProdExperts, SleepingProd};
use crate::streams::{self, Purpose};

use super::run::{replicate, run_learner, RegretTrace, RunLabel};

/// A learner and its tuning. Unset tuning knobs are derived from the
/// environment's `(Gamma, V, Lambda)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum AlgSpec {
    RerunUcbv {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        block: Option<usize>,
    },
    GdFixed {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma: Option<f64>,
    },
    GdAdaptive {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        block: Option<usize>,
    },
    Prod,
    ProdSleeping,
    Uniform,
    FixedArm {
        arm: usize,
    },
}

impl AlgSpec {
    pub const NAMES: [&'static str; 7] = [
        "rerun-ucbv",
        "gd-fixed",
        "gd-adaptive",
        "prod",
        "prod-sleeping",
        "uniform",
        "fixed-arm",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::RerunUcbv { .. } => "rerun-ucbv",
            Self::GdFixed { .. } => "gd-fixed",
            Self::GdAdaptive { .. } => "gd-adaptive",
            Self::Prod => "prod",
            Self::ProdSleeping => "prod-sleeping",
            Self::Uniform => "uniform",
            Self::FixedArm { .. } => "fixed-arm",
        }
    }

    /// Label used in emitted output.
    pub fn id(&self) -> String {
        match self {
            Self::FixedArm { arm } => format!("fixed-arm-{arm}"),
            other => other.name().to_string(),
        }
    }

    pub fn is_bandit(&self) -> bool {
        matches!(self, Self::RerunUcbv { .. } | Self::Uniform | Self::FixedArm { .. })
    }

    /// Builds a fresh learner tuned for `seq`.
    pub fn build(&self, seq: &DistributionSequence) -> Result<Learner> {
        let (arms, horizon) = (seq.arms(), seq.horizon());
        let params = compute_params(seq);
        Ok(match *self {
            Self::RerunUcbv { delta, block } => {
                let mut config = RerunUcbVConfig::from_budgets(
                    arms,
                    horizon,
                    params.drift,
                    params.variance_budget,
                )?;
                if let Some(d) = delta {
                    config = config.with_delta(d);
                }
                if let Some(b) = block {
                    config = config.with_block(b);
                }
                Learner::Bandit(Box::new(RerunUcbV::new(config)?))
            }
            Self::GdFixed { gamma } => {
                let g = gamma.unwrap_or(params.gamma as f64);
                let eta = theorem3_eta(g, params.variance_budget, arms)?;
                Learner::FullInfo(Box::new(GdExperts::new(arms, EtaMode::Fixed(eta))?))
            }
            Self::GdAdaptive { block } => {
                let block = match block {
                    Some(b) => b,
                    None => theorem4_block(params.variance_budget, params.drift, horizon)?,
                };
                Learner::FullInfo(Box::new(GdExperts::new(arms, EtaMode::Adaptive { block })?))
            }
            Self::Prod => Learner::FullInfo(Box::new(ProdExperts::new(arms, horizon)?)),
            Self::ProdSleeping => Learner::FullInfo(Box::new(SleepingProd::new(arms, horizon)?)),
            Self::Uniform => Learner::Bandit(Box::new(UniformRandom::new(arms)?)),
            Self::FixedArm { arm } => Learner::Bandit(Box::new(FixedArm::new(arms, arm)?)),
        })
    }
}

impl fmt::Display for AlgSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for AlgSpec {
    type Err = Error;

    /// Accepts the bare names with default tuning, plus `fixed-arm-<k>`.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "rerun-ucbv" => Self::RerunUcbv {
                delta: None,
                block: None,
            },
            "gd-fixed" => Self::GdFixed { gamma: None },
            "gd-adaptive" => Self::GdAdaptive { block: None },
            "prod" => Self::Prod,
            "prod-sleeping" => Self::ProdSleeping,
            "uniform" => Self::Uniform,
            "fixed-arm" => Self::FixedArm { arm: 0 },
            other => match other.strip_prefix("fixed-arm-").map(str::parse) {
                Some(Ok(arm)) => Self::FixedArm { arm },
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown algorithm '{other}'; expected one of {}",
                        Self::NAMES.join(", ")
                    )))
                }
            },
        })
    }
}

/// Where the loss sequence comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EnvSpec {
    Switching {
        gamma: usize,
        gap: f64,
        #[serde(default)]
        variance: f64,
    },
    Drifting {
        drift: f64,
        variance: f64,
    },
    /// The same mean vector every step, as point masses.
    Held {
        losses: Vec<f64>,
    },
    File {
        path: PathBuf,
    },
}

impl EnvSpec {
    pub fn id(&self) -> String {
        match self {
            Self::Switching { gamma, gap, variance } if *variance > 0.0 => {
                format!("switching-g{gamma}-gap{gap}-var{variance}")
            }
            Self::Switching { gamma, gap, .. } => format!("switching-g{gamma}-gap{gap}"),
            Self::Drifting { drift, variance } => format!("drifting-v{drift}-var{variance}"),
            Self::Held { .. } => "held".into(),
            Self::File { path } => format!(
                "file-{}",
                path.file_stem()
                    .map(|s| s.to_string_lossy().replace(',', "_"))
                    .unwrap_or_default()
            ),
        }
    }

    /// Materialises the environment. Random generators draw from the
    /// generator stream of `seed`.
    pub fn build(&self, arms: usize, horizon: usize, seed: u64) -> Result<DistributionSequence> {
        let mut rng = streams::stream(seed, Purpose::Generator);
        match self {
            Self::Switching { gamma, gap, variance } => gen_switching(
                &SwitchingConfig::new(arms, horizon, *gamma, *gap).with_variance(*variance),
                &mut rng,
            ),
            Self::Drifting { drift, variance } => gen_drifting(
                &DriftingConfig {
                    arms,
                    horizon,
                    drift: *drift,
                    variance: *variance,
                },
                &mut rng,
            ),
            Self::Held { losses } => {
                if losses.len() != arms {
                    return Err(Error::ArmMismatch {
                        expected: arms,
                        actual: losses.len(),
                    });
                }
                DistributionSequence::from_point_masses(&vec![losses.clone(); horizon])
            }
            Self::File { path } => {
                let seq = DistributionSequence::from_json(&std::fs::read_to_string(path)?)?;
                if seq.arms() != arms {
                    return Err(Error::ArmMismatch {
                        expected: arms,
                        actual: seq.arms(),
                    });
                }
                if seq.horizon() != horizon {
                    return Err(Error::HorizonMismatch {
                        expected: horizon,
                        actual: seq.horizon(),
                    });
                }
                Ok(seq)
            }
        }
    }

    /// Whether every replication sees the same sequence.
    pub fn is_fixed(&self) -> bool {
        matches!(self, Self::Held { .. } | Self::File { .. })
    }
}

fn default_replications() -> usize {
    1
}

/// One experiment: a learner against an environment, replicated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub env: EnvSpec,
    pub alg: AlgSpec,
    #[serde(rename = "T")]
    pub horizon: usize,
    #[serde(rename = "K")]
    pub arms: usize,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(env: EnvSpec, alg: AlgSpec, arms: usize, horizon: usize) -> Self {
        Self {
            env,
            alg,
            horizon,
            arms,
            replications: 1,
            seed: 0,
            csv: None,
            svg: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.arms == 0 || self.horizon == 0 {
            return Err(Error::InvalidParameter("K and T must be positive".into()));
        }
        if self.replications == 0 {
            return Err(Error::InvalidParameter("replications must be >= 1".into()));
        }
        Ok(())
    }
}

/// Runs every replication. Replication `rep` uses seed `seed + rep` for the
/// environment draw, the loss samples and the learner.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RegretTrace>> {
    config.validate()?;
    let fixed = if config.env.is_fixed() {
        Some(config.env.build(config.arms, config.horizon, config.seed)?)
    } else {
        None
    };
    let (alg_id, env_id) = (config.alg.id(), config.env.id());
    replicate(config.replications, config.seed, |rep, seed| {
        let seq = match &fixed {
            Some(seq) => seq.clone(),
            None => config.env.build(config.arms, config.horizon, seed)?,
        };
        let mut learner = config.alg.build(&seq)?;
        run_learner(&mut learner, &seq, &RunLabel::new(alg_id.clone(), env_id.clone(), seed, rep))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alg_names_round_trip() {
        for name in AlgSpec::NAMES {
            let spec: AlgSpec = name.parse().unwrap();
            assert_eq!(spec.name(), name);
        }
        assert_eq!("fixed-arm-3".parse::<AlgSpec>().unwrap(), AlgSpec::FixedArm { arm: 3 });
        assert!("exp3".parse::<AlgSpec>().is_err());
    }

    #[test]
    fn config_json() {
        let text = r#"{
            "env": {"kind": "switching", "gamma": 4, "gap": 0.5},
            "alg": {"name": "rerun-ucbv", "delta": 0.01},
            "T": 200, "K": 3, "replications": 2, "seed": 5
        }"#;
        let config = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(config.horizon, 200);
        assert_eq!(
            config.alg,
            AlgSpec::RerunUcbv {
                delta: Some(0.01),
                block: None
            }
        );
        let back: ExperimentConfig =
            serde_json::from_str(&serde_json::to_string(&config).unwrap()).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn every_learner_runs() {
        for name in AlgSpec::NAMES {
            let mut config = ExperimentConfig::new(
                EnvSpec::Switching {
                    gamma: 3,
                    gap: 0.4,
                    variance: 0.01,
                },
                name.parse().unwrap(),
                3,
                120,
            );
            config.replications = 2;
            let traces = run_experiment(&config).unwrap();
            assert_eq!(traces.len(), 2);
            for t in &traces {
                assert_eq!(t.len(), 120);
                assert!(t.is_monotone());
                assert_eq!(t.label.alg, config.alg.id());
            }
        }
    }

    #[test]
    fn experiments_are_deterministic() {
        let mut config = ExperimentConfig::new(
            EnvSpec::Drifting {
                drift: 2.0,
                variance: 0.05,
            },
            "rerun-ucbv".parse().unwrap(),
            2,
            300,
        );
        config.replications = 3;
        config.seed = 77;
        assert_eq!(run_experiment(&config).unwrap(), run_experiment(&config).unwrap());
    }

    #[test]
    fn held_env_checks_arms() {
        let env = EnvSpec::Held {
            losses: vec![0.5, 1.0],
        };
        assert!(env.build(3, 10, 0).is_err());
        assert_eq!(env.build(2, 10, 0).unwrap().horizon(), 10);
    }
}
