//! Non-stationary loss environments.
//!
//! A [`DistributionSequence`] is a `T x K` grid of per-step, per-arm loss
//! distributions. Its non-stationarity is summarised by
//! [`NonStationarityParams`]: the switch count `gamma`, the total drift `V` and
//! the total variance `Lambda`.
//!
//! The drift sum starts from an all-zero mean vector before step 1, so `V`
//! always includes `||mu_1||_inf`. A constant sequence therefore has
//! `V = max_i mu_{1,i}`, not zero.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, check_unit, Error, Result};
use crate::streams::{self, Purpose};

/// Loss distribution of a single arm at a single step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArmDistribution {
    PointMass { value: f64 },
    TwoPoint { low: f64, high: f64, p_high: f64 },
}

impl ArmDistribution {
    pub fn point_mass(value: f64) -> Result<Self> {
        check_unit("point-mass value", value)?;
        Ok(Self::PointMass { value })
    }

    pub fn two_point(low: f64, high: f64, p_high: f64) -> Result<Self> {
        check_unit("two-point low", low)?;
        check_unit("two-point high", high)?;
        check_unit("two-point p_high", p_high)?;
        if low > high {
            return Err(Error::InvalidParameter(format!(
                "two-point low {low} exceeds high {high}"
            )));
        }
        Ok(Self::TwoPoint { low, high, p_high })
    }

    /// Two-point distribution with the given mean and variance, placed
    /// symmetrically at `mean +- sqrt(variance)`. Zero variance yields a point
    /// mass.
    pub fn centered(mean: f64, variance: f64) -> Result<Self> {
        check_range("variance", variance, 0.0, 0.25)?;
        if variance == 0.0 {
            return Self::point_mass(mean);
        }
        let spread = variance.sqrt();
        Self::two_point(mean - spread, mean + spread, 0.5)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::PointMass { value } => Self::point_mass(value).map(|_| ()),
            Self::TwoPoint { low, high, p_high } => Self::two_point(low, high, p_high).map(|_| ()),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::PointMass { value } => value,
            Self::TwoPoint { low, high, p_high } => p_high * high + (1.0 - p_high) * low,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Self::PointMass { .. } => 0.0,
            Self::TwoPoint { low, high, p_high } => {
                let width = high - low;
                p_high * (1.0 - p_high) * width * width
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::PointMass { value } => value,
            Self::TwoPoint { low, high, p_high } => {
                let u: f64 = rng.gen();
                if u < p_high {
                    high
                } else {
                    low
                }
            }
        }
    }
}

/// `(Gamma, V, Lambda)` of a distribution sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonStationarityParams {
    pub gamma: usize,
    pub drift: f64,
    pub variance_budget: f64,
}

#[derive(Serialize, Deserialize)]
struct RawSequence {
    #[serde(rename = "K")]
    arms: usize,
    #[serde(rename = "T")]
    horizon: usize,
    grid: Vec<Vec<ArmDistribution>>,
}

/// A `T x K` grid of loss distributions. Steps are 1-based in the public API.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSequence", into = "RawSequence")]
pub struct DistributionSequence {
    arms: usize,
    grid: Vec<Vec<ArmDistribution>>,
    means: Vec<f64>,
}

impl TryFrom<RawSequence> for DistributionSequence {
    type Error = Error;

    fn try_from(raw: RawSequence) -> Result<Self> {
        if raw.grid.len() != raw.horizon {
            return Err(Error::InvalidParameter(format!(
                "grid has {} rows but T = {}",
                raw.grid.len(),
                raw.horizon
            )));
        }
        let seq = Self::new(raw.grid)?;
        if seq.arms != raw.arms {
            return Err(Error::ArmMismatch {
                expected: raw.arms,
                actual: seq.arms,
            });
        }
        Ok(seq)
    }
}

impl From<DistributionSequence> for RawSequence {
    fn from(seq: DistributionSequence) -> Self {
        RawSequence {
            arms: seq.arms,
            horizon: seq.grid.len(),
            grid: seq.grid,
        }
    }
}

impl DistributionSequence {
    pub fn new(grid: Vec<Vec<ArmDistribution>>) -> Result<Self> {
        let arms = grid.first().map(Vec::len).unwrap_or(0);
        if grid.is_empty() || arms == 0 {
            return Err(Error::InvalidParameter(
                "a sequence needs at least one step and one arm".into(),
            ));
        }
        let mut means = Vec::with_capacity(grid.len() * arms);
        for (t, row) in grid.iter().enumerate() {
            if row.len() != arms {
                return Err(Error::InvalidParameter(format!(
                    "row {} has {} arms, expected {arms}",
                    t + 1,
                    row.len()
                )));
            }
            for dist in row {
                dist.validate()?;
                means.push(dist.mean());
            }
        }
        Ok(Self { arms, grid, means })
    }

    /// Deterministic sequence from a `T x K` table of losses.
    pub fn from_point_masses(rows: &[Vec<f64>]) -> Result<Self> {
        let grid = rows
            .iter()
            .map(|row| row.iter().map(|&v| ArmDistribution::point_mass(v)).collect())
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid)
    }

    /// Sequence with the given mean table and a common per-arm variance.
    pub fn from_means(rows: &[Vec<f64>], variance: f64) -> Result<Self> {
        let grid = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&m| ArmDistribution::centered(m, variance))
                    .collect()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid)
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn horizon(&self) -> usize {
        self.grid.len()
    }

    fn check_step(&self, t: usize) -> Result<()> {
        if t == 0 || t > self.horizon() {
            Err(Error::StepOutOfRange {
                step: t,
                horizon: self.horizon(),
            })
        } else {
            Ok(())
        }
    }

    pub fn row(&self, t: usize) -> Result<&[ArmDistribution]> {
        self.check_step(t)?;
        Ok(&self.grid[t - 1])
    }

    /// `mu_t`. Panics if `t` is outside `[1, T]`.
    pub fn mean_vector(&self, t: usize) -> &[f64] {
        assert!(t >= 1 && t <= self.horizon(), "step {t} out of range");
        &self.means[(t - 1) * self.arms..t * self.arms]
    }

    /// `min_i mu_{t,i}`.
    pub fn best_mean(&self, t: usize) -> f64 {
        self.mean_vector(t)
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// `u*_t`, lowest index on ties.
    pub fn best_arm(&self, t: usize) -> usize {
        argmin(self.mean_vector(t))
    }

    pub fn rows(&self) -> &[Vec<ArmDistribution>] {
        &self.grid
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Index of the smallest entry, lowest index on ties.
pub fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}

pub fn compute_params(seq: &DistributionSequence) -> NonStationarityParams {
    let mut gamma = 1;
    let mut drift = 0.0;
    let mut variance_budget = 0.0;
    let zero = vec![0.0; seq.arms()];
    for t in 1..=seq.horizon() {
        let current = seq.mean_vector(t);
        let previous = if t == 1 {
            &zero[..]
        } else {
            seq.mean_vector(t - 1)
        };
        if t > 1 && current != previous {
            gamma += 1;
        }
        drift += current
            .iter()
            .zip(previous)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        variance_budget += seq.grid[t - 1]
            .iter()
            .map(ArmDistribution::variance)
            .sum::<f64>();
    }
    NonStationarityParams {
        gamma,
        drift,
        variance_budget,
    }
}

/// Draws `l_t`, one independent draw per arm in arm order.
pub fn sample_losses<R: Rng + ?Sized>(
    seq: &DistributionSequence,
    t: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    Ok(seq.row(t)?.iter().map(|d| d.sample(rng)).collect())
}

/// Loss source whose realisation at `(t, i)` depends only on the seed, not on
/// the order in which steps are requested.
#[derive(Debug, Clone)]
pub struct LossSampler {
    rng: ChaCha8Rng,
}

impl LossSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: streams::stream(seed, Purpose::Environment),
        }
    }

    pub fn sample(&mut self, seq: &DistributionSequence, t: usize) -> Result<Vec<f64>> {
        seq.check_step(t)?;
        // one u64 (two 32-bit words) per coordinate
        let words_per_step = 2 * seq.arms() as u128;
        self.rng.set_word_pos((t as u128 - 1) * words_per_step);
        sample_losses(seq, t, &mut self.rng)
    }
}

/// The pair `(P, Q)` on `{0, 2 sigma}`: `Q` has mean `sigma` and variance
/// `sigma^2`, `P` has mean `sigma - epsilon`.
pub fn lemma1_pair(sigma: f64, epsilon: f64) -> Result<(ArmDistribution, ArmDistribution)> {
    if !(sigma > 0.0 && sigma <= 0.5) {
        return Err(Error::OutOfRange {
            what: "sigma",
            value: sigma,
            low: 0.0,
            high: 0.5,
        });
    }
    let max_eps = sigma / std::f64::consts::SQRT_2;
    if !(epsilon > 0.0 && epsilon <= max_eps * (1.0 + 1e-12)) {
        return Err(Error::OutOfRange {
            what: "epsilon",
            value: epsilon,
            low: 0.0,
            high: max_eps,
        });
    }
    let high = 2.0 * sigma;
    let q = ArmDistribution::two_point(0.0, high, 0.5)?;
    let p = ArmDistribution::two_point(0.0, high, (sigma - epsilon) / high)?;
    Ok((p, q))
}

/// `KL(Q, P)` in bits, for two-point distributions on a common support.
/// Returns `f64::INFINITY` when `Q` puts mass where `P` has none.
pub fn kl_two_point(q: &ArmDistribution, p: &ArmDistribution) -> Result<f64> {
    let (
        ArmDistribution::TwoPoint {
            low: ql,
            high: qh,
            p_high: qp,
        },
        ArmDistribution::TwoPoint {
            low: pl,
            high: ph,
            p_high: pp,
        },
    ) = (*q, *p)
    else {
        return Err(Error::SupportMismatch);
    };
    if ql != pl || qh != ph {
        return Err(Error::SupportMismatch);
    }
    let term = |qx: f64, px: f64| -> f64 {
        if qx == 0.0 {
            0.0
        } else if px == 0.0 {
            f64::INFINITY
        } else {
            qx * (qx / px).log2()
        }
    };
    Ok(term(qp, pp) + term(1.0 - qp, 1.0 - pp))
}

/// Splits `total` steps into `parts` contiguous intervals whose lengths differ
/// by at most one; the earliest intervals take the remainder.
pub fn partition(total: usize, parts: usize) -> Vec<(usize, usize)> {
    assert!(parts >= 1 && parts <= total, "cannot split {total} into {parts}");
    let base = total / parts;
    let extra = total % parts;
    let mut out = Vec::with_capacity(parts);
    let mut start = 1;
    for j in 0..parts {
        let len = base + usize::from(j < extra);
        out.push((start, len));
        start += len;
    }
    out
}

/// Piecewise-stationary environment: `gamma` intervals, each with a uniformly
/// drawn best arm whose mean sits `gap` below the others.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchingConfig {
    pub arms: usize,
    pub horizon: usize,
    pub gamma: usize,
    pub gap: f64,
    /// Per-step, per-arm variance. Zero gives point masses.
    #[serde(default)]
    pub variance: f64,
}

impl SwitchingConfig {
    pub fn new(arms: usize, horizon: usize, gamma: usize, gap: f64) -> Self {
        Self {
            arms,
            horizon,
            gamma,
            gap,
            variance: 0.0,
        }
    }

    pub fn with_variance(mut self, variance: f64) -> Self {
        self.variance = variance;
        self
    }

    /// Means used inside an interval: `(best, others)`.
    pub fn levels(&self) -> (f64, f64) {
        ((1.0 - self.gap) / 2.0, (1.0 + self.gap) / 2.0)
    }
}

pub fn gen_switching<R: Rng + ?Sized>(
    config: &SwitchingConfig,
    rng: &mut R,
) -> Result<DistributionSequence> {
    let SwitchingConfig {
        arms,
        horizon,
        gamma,
        gap,
        variance,
    } = *config;
    if arms == 0 || horizon == 0 {
        return Err(Error::InvalidParameter("K and T must be positive".into()));
    }
    if gamma == 0 || gamma > horizon {
        return Err(Error::InvalidParameter(format!(
            "gamma = {gamma} must lie in [1, T = {horizon}]"
        )));
    }
    if !(gap > 0.0 && gap < 1.0) {
        return Err(Error::OutOfRange {
            what: "gap",
            value: gap,
            low: 0.0,
            high: 1.0,
        });
    }
    let (best, other) = config.levels();
    let spread = variance.max(0.0).sqrt();
    if spread > best {
        return Err(Error::InvalidParameter(format!(
            "variance {variance} does not fit a gap of {gap} inside [0, 1]"
        )));
    }
    let best_dist = ArmDistribution::centered(best, variance)?;
    let other_dist = ArmDistribution::centered(other, variance)?;

    let mut grid = Vec::with_capacity(horizon);
    let mut previous: Option<usize> = None;
    for (_, len) in partition(horizon, gamma) {
        // adjacent intervals must differ, so draw among the other arms
        let chosen = match previous {
            Some(prev) if arms > 1 => {
                let pick = rng.gen_range(0..arms - 1);
                if pick >= prev {
                    pick + 1
                } else {
                    pick
                }
            }
            _ => rng.gen_range(0..arms),
        };
        let row: Vec<ArmDistribution> = (0..arms)
            .map(|i| if i == chosen { best_dist } else { other_dist })
            .collect();
        grid.extend(std::iter::repeat_n(row, len));
        previous = Some(chosen);
    }
    DistributionSequence::new(grid)
}

/// Drifting environment: per-arm means follow a reflected walk inside
/// `[s, 1 - s]` (`s = sqrt(variance)`) with persistent directions, scaled so the
/// total drift lands in `[0.9 V, V]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftingConfig {
    pub arms: usize,
    pub horizon: usize,
    pub drift: f64,
    pub variance: f64,
}

pub fn gen_drifting<R: Rng + ?Sized>(
    config: &DriftingConfig,
    rng: &mut R,
) -> Result<DistributionSequence> {
    let DriftingConfig {
        arms,
        horizon,
        drift,
        variance,
    } = *config;
    if arms == 0 || horizon == 0 {
        return Err(Error::InvalidParameter("K and T must be positive".into()));
    }
    check_range("variance", variance, 0.0, 0.25)?;
    let spread = variance.sqrt();
    let (floor, ceil) = (spread, 1.0 - spread);
    if !(drift.is_finite() && drift >= floor) {
        return Err(Error::InvalidParameter(format!(
            "drift budget {drift} cannot cover the first mean vector (>= {floor})"
        )));
    }

    // Spend at most half the budget on ||mu_1||_inf when possible.
    let start_high = ceil.min((drift / 2.0).max(floor));
    let start: Vec<f64> = (0..arms)
        .map(|_| {
            if start_high > floor {
                rng.gen_range(floor..=start_high)
            } else {
                floor
            }
        })
        .collect();
    let first = start.iter().copied().fold(0.0, f64::max);
    let remaining = drift - first;
    let lower_target = 0.9 * drift - first;

    // Raw walk with persistent per-arm directions.
    let flip = (8.0 / horizon as f64).min(0.5);
    let mut direction: Vec<f64> = (0..arms)
        .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
        .collect();
    let mut raw = Vec::with_capacity(horizon.saturating_sub(1) * arms);
    for _ in 1..horizon {
        for d in direction.iter_mut() {
            if rng.gen::<f64>() < flip {
                *d = -*d;
            }
            let magnitude: f64 = rng.gen_range(0.0..1.0);
            raw.push(*d * magnitude);
        }
    }

    let build = |scale: f64| -> Vec<Vec<f64>> {
        let mut rows = Vec::with_capacity(horizon);
        rows.push(start.clone());
        for t in 1..horizon {
            let prev = &rows[t - 1];
            let row: Vec<f64> = (0..arms)
                .map(|i| reflect(prev[i] + scale * raw[(t - 1) * arms + i], floor, ceil))
                .collect();
            rows.push(row);
        }
        rows
    };
    let walk_drift = |rows: &[Vec<f64>]| -> f64 {
        rows.windows(2)
            .map(|w| {
                w[1].iter()
                    .zip(&w[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .sum()
    };

    // the first mean vector alone may already satisfy the lower target
    let rows = if lower_target <= 0.0 {
        build(0.0)
    } else {
        if horizon < 2 || ceil <= floor {
            return Err(Error::InvalidParameter(format!(
                "drift budget {drift} is unreachable with T = {horizon} and variance {variance}"
            )));
        }
        let mut lo = 0.0;
        let mut hi = 1.0 / horizon as f64;
        let mut rows = build(hi);
        let mut measured = walk_drift(&rows);
        let mut found = measured >= lower_target && measured <= remaining;
        let mut grow = 0;
        while !found && measured < lower_target {
            lo = hi;
            hi *= 2.0;
            rows = build(hi);
            measured = walk_drift(&rows);
            found = measured >= lower_target && measured <= remaining;
            grow += 1;
            if grow > 64 {
                return Err(Error::InvalidParameter(format!(
                    "drift budget {drift} is unreachable with T = {horizon} and variance {variance}"
                )));
            }
        }
        let mut iterations = 0;
        while !found {
            let mid = 0.5 * (lo + hi);
            rows = build(mid);
            measured = walk_drift(&rows);
            if measured > remaining {
                hi = mid;
            } else if measured < lower_target {
                lo = mid;
            } else {
                found = true;
            }
            iterations += 1;
            if iterations > 200 {
                return Err(Error::Invariant(format!(
                    "drift search did not converge for budget {drift}"
                )));
            }
        }
        rows
    };
    DistributionSequence::from_means(&rows, variance)
}

/// Folds `x` into `[low, high]` by mirror reflection.
fn reflect(x: f64, low: f64, high: f64) -> f64 {
    let width = high - low;
    if width <= 0.0 {
        return low;
    }
    let period = 2.0 * width;
    let mut y = (x - low).rem_euclid(period);
    if y > width {
        y = period - y;
    }
    (low + y).clamp(low, high)
}
