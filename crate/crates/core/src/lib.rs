//! Non-stationary bandits and experts with dynamic regret.
//!
//! - [`envmodel`]: loss-distribution sequences and their `(Gamma, V, Lambda)`.
//! - [`bernstein`]: running statistics and the empirical-Bernstein radius.
//! - [`banditalg`]: Rerun-UCB-V and baseline bandit policies.
//! - [`gdexperts`]: optimistic gradient descent on the simplex.
//! - [`prodexperts`]: Optimistic-Adapt-ML-Prod and its sleeping-experts form.
//! - [`adversary`]: lower-bound environments built against a learner.
//! - [`harness`]: simulation, replication, CSV, plots and validation suites.

pub mod adversary;
pub mod banditalg;
pub mod bernstein;
pub mod envmodel;
pub mod error;
pub mod gdexperts;
pub mod harness;
pub mod policy;
pub mod prodexperts;
pub mod streams;

pub use envmodel::{compute_params, ArmDistribution, DistributionSequence, NonStationarityParams};
pub use error::{Error, Result};
pub use gdexperts::SimplexPoint;
pub use harness::{RegretTrace, RunLabel};
pub use policy::{BanditPolicy, ExpertPolicy, Learner};
