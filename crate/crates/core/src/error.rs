use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is outside [{low}, {high}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        low: f64,
        high: f64,
    },

    #[error("step {step} is outside [1, {horizon}]")]
    StepOutOfRange { step: usize, horizon: usize },

    #[error("arm {arm} is outside [0, {arms})")]
    ArmOutOfRange { arm: usize, arms: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("distributions do not share a two-point support")]
    SupportMismatch,

    #[error("horizon mismatch: policy expects {expected} steps, sequence has {actual}")]
    HorizonMismatch { expected: usize, actual: usize },

    #[error("arm-count mismatch: policy expects {expected} arms, sequence has {actual}")]
    ArmMismatch { expected: usize, actual: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit(what: &'static str, value: f64) -> Result<()> {
    check_range(what, value, 0.0, 1.0)
}

pub(crate) fn check_range(what: &'static str, value: f64, low: f64, high: f64) -> Result<()> {
    if value.is_finite() && value >= low && value <= high {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what,
            value,
            low,
            high,
        })
    }
}
