//! Per-arm running statistics and the empirical-Bernstein confidence radius.

use crate::error::{check_unit, Error, Result};

/// Count, mean and sum of squared deviations, updated in one pass.
///
/// `empirical_variance` is the unbiased sample variance `m2 / (n - 1)`, which
/// equals the unordered pairwise form `sum_{i<j} (x_i - x_j)^2 / (n (n - 1))`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(&mut self, x: f64) -> Result<()> {
        check_unit("loss", x)?;
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
        // guard the last-bit rounding of the recurrence
        self.m2 = self.m2.max(0.0);
        Ok(())
    }

    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let mut stats = Self::new();
        for &x in samples {
            stats.update(x)?;
        }
        Ok(stats)
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    /// Empirical mean; zero before any sample.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    /// Zero for `n <= 1`.
    pub fn empirical_variance(&self) -> f64 {
        if self.n <= 1 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }
}

/// `sqrt(2 v ln(2/delta) / n) + 7 ln(2/delta) / (3 (n - 1))`.
pub fn rho(n: u64, v_hat: f64, delta: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "confidence radius needs n >= 2, got {n}"
        )));
    }
    if !(v_hat >= 0.0 && v_hat.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "empirical variance must be finite and nonnegative, got {v_hat}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::OutOfRange {
            what: "delta",
            value: delta,
            low: 0.0,
            high: 1.0,
        });
    }
    let log_term = (2.0 / delta).ln();
    let n = n as f64;
    Ok((2.0 * v_hat * log_term / n).sqrt() + 7.0 * log_term / (3.0 * (n - 1.0)))
}
