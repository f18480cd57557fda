//! Learner interfaces shared by the algorithms, the adversaries and the
//! harness.

use rand::RngCore;

use crate::error::Result;
use crate::gdexperts::SimplexPoint;

/// A learner that picks one arm per step and only sees that arm's loss.
pub trait BanditPolicy: Send + Sync {
    fn arms(&self) -> usize;

    fn select(&mut self, rng: &mut dyn RngCore) -> usize;

    fn observe(&mut self, arm: usize, loss: f64) -> Result<()>;

    /// Horizon the policy was tuned for, if any.
    fn horizon(&self) -> Option<usize> {
        None
    }

    fn clone_box(&self) -> Box<dyn BanditPolicy>;
}

/// A learner that plays a distribution over arms and sees the whole loss
/// vector.
pub trait ExpertPolicy: Send + Sync {
    fn arms(&self) -> usize;

    fn play(&mut self) -> SimplexPoint;

    fn update(&mut self, loss: &[f64]) -> Result<()>;

    fn horizon(&self) -> Option<usize> {
        None
    }

    fn clone_box(&self) -> Box<dyn ExpertPolicy>;
}

impl Clone for Box<dyn BanditPolicy> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}

impl Clone for Box<dyn ExpertPolicy> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}

/// Either kind of learner.
#[derive(Clone)]
pub enum Learner {
    Bandit(Box<dyn BanditPolicy>),
    FullInfo(Box<dyn ExpertPolicy>),
}

impl Learner {
    pub fn arms(&self) -> usize {
        match self {
            Self::Bandit(p) => p.arms(),
            Self::FullInfo(p) => p.arms(),
        }
    }

    pub fn is_bandit(&self) -> bool {
        matches!(self, Self::Bandit(_))
    }
}

impl std::fmt::Debug for Learner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Bandit(p) => write!(f, "Learner::Bandit(K={})", p.arms()),
            Self::FullInfo(p) => write!(f, "Learner::FullInfo(K={})", p.arms()),
        }
    }
}
