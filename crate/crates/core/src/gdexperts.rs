//! Optimistic gradient descent over the probability simplex.
//!
//! Each step plays `project(x_t - (eta_t / 2) l_{t-1})`, using the previous
//! loss vector as a guess for the next one, and then moves the mirror point to
//! `x_{t+1} = project(x_t - (eta_t / 2) l_t)`. Both argmins of the proximal
//! problem `<l, x> + ||x - x_t||^2 / eta` reduce to this Euclidean projection.
//!
//! Two learning-rate schedules are provided: a constant rate, and a rate that
//! restarts every `B` steps and otherwise follows
//! `1 / sqrt(4 * sum ||l_tau - l_{tau-1}||_2^2)` over the current interval. The
//! restarted rate begins each interval at infinity, which plays the vertex of
//! the previous loss vector's smallest coordinate. Only the rate restarts; the
//! mirror point carries over.

use crate::banditalg::{check_loss_vector, clamp_block};
use crate::envmodel::argmin;
use crate::error::{Error, Result};
use crate::policy::ExpertPolicy;

/// A probability vector over `K` arms.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint(Vec<f64>);

impl SimplexPoint {
    pub const TOLERANCE: f64 = 1e-9;

    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let point = Self(weights);
        point.validate()?;
        Ok(point)
    }

    pub fn uniform(arms: usize) -> Self {
        Self(vec![1.0 / arms as f64; arms])
    }

    pub fn vertex(arms: usize, index: usize) -> Self {
        let mut w = vec![0.0; arms];
        w[index] = 1.0;
        Self(w)
    }

    pub(crate) fn from_normalized(weights: Vec<f64>) -> Self {
        Self(weights)
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.is_empty() {
            return Err(Error::Invariant("empty simplex point".into()));
        }
        if self.0.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Invariant(format!(
                "simplex point has a negative or non-finite weight: {:?}",
                self.0
            )));
        }
        let total: f64 = self.0.iter().sum();
        if (total - 1.0).abs() > Self::TOLERANCE {
            return Err(Error::Invariant(format!(
                "simplex point sums to {total}"
            )));
        }
        Ok(())
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, v: &[f64]) -> f64 {
        self.0.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Euclidean projection onto the probability simplex by sort-and-threshold.
pub fn project_simplex(y: &[f64]) -> SimplexPoint {
    assert!(!y.is_empty(), "cannot project an empty vector");
    assert!(y.iter().all(|v| v.is_finite()), "non-finite input {y:?}");
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    SimplexPoint(y.iter().map(|&v| (v - theta).max(0.0)).collect())
}

/// Constant rate `sqrt(Gamma / (Lambda + K Gamma))`.
pub fn theorem3_eta(gamma: f64, variance: f64, arms: usize) -> Result<f64> {
    if !(gamma >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma must be at least 1, got {gamma}"
        )));
    }
    if !(variance >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "variance budget must be nonnegative, got {variance}"
        )));
    }
    Ok((gamma / (variance + arms as f64 * gamma)).sqrt())
}

/// Restart length `cbrt(Lambda T / V^2)` when `Lambda T > V^2`, else 1;
/// rounded and clamped to `[1, T]`. Zero drift means a single interval.
pub fn theorem4_block(variance: f64, drift: f64, horizon: usize) -> Result<usize> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("T must be positive".into()));
    }
    if !(drift >= 0.0) || !(variance >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "drift {drift} and variance {variance} must be nonnegative"
        )));
    }
    if drift == 0.0 {
        return Ok(horizon);
    }
    let product = variance * horizon as f64;
    if product > drift * drift {
        Ok(clamp_block((product / (drift * drift)).cbrt(), horizon))
    } else {
        Ok(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaMode {
    Fixed(f64),
    /// Rate restarts every `block` steps.
    Adaptive { block: usize },
}

#[derive(Debug, Clone)]
pub struct GdExperts {
    x: Vec<f64>,
    last_loss: Vec<f64>,
    mode: EtaMode,
    dev_accum: f64,
    steps: usize,
    interval_start: usize,
}

impl GdExperts {
    pub fn new(arms: usize, mode: EtaMode) -> Result<Self> {
        if arms == 0 {
            return Err(Error::InvalidParameter("K must be positive".into()));
        }
        match mode {
            EtaMode::Fixed(eta) if !(eta > 0.0 && eta.is_finite()) => {
                return Err(Error::InvalidParameter(format!(
                    "fixed learning rate must be positive and finite, got {eta}"
                )))
            }
            EtaMode::Adaptive { block: 0 } => {
                return Err(Error::InvalidParameter("restart length must be >= 1".into()))
            }
            _ => {}
        }
        Ok(Self {
            x: vec![1.0 / arms as f64; arms],
            last_loss: vec![0.0; arms],
            mode,
            dev_accum: 0.0,
            steps: 0,
            interval_start: 1,
        })
    }

    pub fn mirror_point(&self) -> &[f64] {
        &self.x
    }

    pub fn last_loss(&self) -> &[f64] {
        &self.last_loss
    }

    pub fn dev_accum(&self) -> f64 {
        self.dev_accum
    }

    pub fn interval_start(&self) -> usize {
        self.interval_start
    }

    /// Current learning rate; `None` stands for the infinite rate.
    pub fn eta(&self) -> Option<f64> {
        match self.mode {
            EtaMode::Fixed(eta) => Some(eta),
            EtaMode::Adaptive { .. } if self.dev_accum == 0.0 => None,
            EtaMode::Adaptive { .. } => Some(1.0 / (4.0 * self.dev_accum).sqrt()),
        }
    }

    pub fn play_point(&self) -> SimplexPoint {
        match self.eta() {
            None => SimplexPoint::vertex(self.x.len(), argmin(&self.last_loss)),
            Some(eta) => project_simplex(&step(&self.x, &self.last_loss, eta)),
        }
    }

    pub fn update_with(&mut self, loss: &[f64]) -> Result<()> {
        check_loss_vector(self.x.len(), loss)?;
        self.x = match self.eta() {
            // limit of the proximal step: nearest point of the minimising face
            None => {
                let best = loss.iter().copied().fold(f64::INFINITY, f64::min);
                let face: Vec<usize> = (0..loss.len()).filter(|&i| loss[i] == best).collect();
                let restricted: Vec<f64> = face.iter().map(|&i| self.x[i]).collect();
                let projected = project_simplex(&restricted);
                let mut next = vec![0.0; loss.len()];
                for (&i, &w) in face.iter().zip(projected.weights()) {
                    next[i] = w;
                }
                next
            }
            Some(eta) => project_simplex(&step(&self.x, loss, eta)).into_inner(),
        };
        if let EtaMode::Adaptive { block } = self.mode {
            self.dev_accum += loss
                .iter()
                .zip(&self.last_loss)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
            self.steps += 1;
            if self.steps % block == 0 {
                self.dev_accum = 0.0;
                self.interval_start = self.steps + 1;
            }
        } else {
            self.steps += 1;
        }
        self.last_loss.copy_from_slice(loss);
        Ok(())
    }
}

fn step(x: &[f64], loss: &[f64], eta: f64) -> Vec<f64> {
    x.iter().zip(loss).map(|(xi, li)| xi - 0.5 * eta * li).collect()
}

impl ExpertPolicy for GdExperts {
    fn arms(&self) -> usize {
        self.x.len()
    }

    fn play(&mut self) -> SimplexPoint {
        self.play_point()
    }

    fn update(&mut self, loss: &[f64]) -> Result<()> {
        self.update_with(loss)
    }

    fn clone_box(&self) -> Box<dyn ExpertPolicy> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Exhaustive search over the simplex grid with spacing 1/resolution.
    fn grid_projection(y: &[f64], resolution: usize) -> Vec<f64> {
        let h = 1.0 / resolution as f64;
        let dist = |x: &[f64]| -> f64 { x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum() };
        let mut best = vec![0.0; y.len()];
        let mut best_d = f64::INFINITY;
        match y.len() {
            1 => return vec![1.0],
            2 => {
                for a in 0..=resolution {
                    let x = [a as f64 * h, (resolution - a) as f64 * h];
                    let d = dist(&x);
                    if d < best_d {
                        best_d = d;
                        best = x.to_vec();
                    }
                }
            }
            3 => {
                for a in 0..=resolution {
                    for b in 0..=resolution - a {
                        let x = [a as f64 * h, b as f64 * h, (resolution - a - b) as f64 * h];
                        let d = dist(&x);
                        if d < best_d {
                            best_d = d;
                            best = x.to_vec();
                        }
                    }
                }
            }
            k => panic!("grid oracle only handles K <= 3, got {k}"),
        }
        best
    }

    #[test]
    fn projection_is_idempotent_on_simplex() {
        let y = [0.2, 0.5, 0.3];
        let p = project_simplex(&y);
        for (a, b) in p.weights().iter().zip(&y) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn projection_symmetric_case() {
        assert_eq!(project_simplex(&[0.9, 0.9]).weights(), &[0.5, 0.5]);
    }

    #[test]
    fn projection_hits_vertex() {
        let y = [1.2, 0.2, -0.4];
        let p = project_simplex(&y);
        for (a, b) in p.weights().iter().zip([1.0, 0.0, 0.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let oracle = grid_projection(&y, 1000);
        for (a, b) in p.weights().iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-3);
        }
    }

    #[test]
    fn play_first_step_is_uniform() {
        let mut gd = GdExperts::new(3, EtaMode::Fixed(0.7)).unwrap();
        assert_eq!(gd.play(), SimplexPoint::uniform(3));
    }

    #[test]
    fn infinite_rate_plays_vertex() {
        let mut gd = GdExperts::new(2, EtaMode::Adaptive { block: 1 }).unwrap();
        gd.last_loss = vec![0.2, 0.7];
        assert_eq!(gd.eta(), None);
        assert_eq!(gd.play().weights(), &[1.0, 0.0]);
    }

    #[test]
    fn one_step_projection() {
        let mut gd = GdExperts::new(2, EtaMode::Fixed(1.0)).unwrap();
        gd.last_loss = vec![1.0, 0.0];
        // (0.5, 0.5) - 0.5 * (1, 0) = (0, 0.5) -> theta = -0.25
        let p = gd.play();
        assert!((p.weights()[0] - 0.25).abs() < 1e-15);
        assert!((p.weights()[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn repeated_loss_keeps_infinite_rate() {
        let mut gd = GdExperts::new(2, EtaMode::Adaptive { block: 100 }).unwrap();
        gd.last_loss = vec![0.3, 0.6];
        gd.update_with(&[0.3, 0.6]).unwrap();
        assert_eq!(gd.dev_accum(), 0.0);
        assert_eq!(gd.eta(), None);
        let p = gd.play();
        assert_eq!(p.weights(), &[1.0, 0.0]);
        assert_eq!(p.dot(&[0.3, 0.6]), 0.3);
    }

    #[test]
    fn adaptive_rate_from_deviation() {
        let mut gd = GdExperts::new(2, EtaMode::Adaptive { block: 100 }).unwrap();
        gd.update_with(&[0.25, 0.0]).unwrap();
        assert!((gd.dev_accum() - 0.0625).abs() < 1e-15);
        assert!((gd.eta().unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn interval_restart_resets_rate_not_iterate() {
        let mut gd = GdExperts::new(2, EtaMode::Adaptive { block: 3 }).unwrap();
        for loss in [[0.1, 0.9], [0.2, 0.8], [0.4, 0.5]] {
            gd.update_with(&loss).unwrap();
        }
        assert_eq!(gd.dev_accum(), 0.0);
        assert_eq!(gd.interval_start(), 4);
        assert_eq!(gd.eta(), None);
        let x_before = gd.mirror_point().to_vec();
        assert!(x_before.iter().all(|&w| w >= 0.0));
        // the first deviation of the new interval crosses the boundary
        gd.update_with(&[0.4, 0.7]).unwrap();
        assert!((gd.dev_accum() - 0.04).abs() < 1e-15);
    }

    #[test]
    fn constant_losses_converge_monotonically() {
        let mut gd = GdExperts::new(3, EtaMode::Fixed(0.3)).unwrap();
        let loss = [0.2, 0.5, 0.9];
        let mut previous = gd.mirror_point()[0];
        for _ in 0..50 {
            gd.update_with(&loss).unwrap();
            let w = gd.mirror_point()[0];
            assert!(w >= previous - 1e-15);
            previous = w;
        }
        assert!((previous - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_losses() {
        let mut gd = GdExperts::new(2, EtaMode::Fixed(0.5)).unwrap();
        assert!(gd.update_with(&[0.1, 1.2]).is_err());
        assert!(gd.update_with(&[0.1]).is_err());
        assert!(GdExperts::new(2, EtaMode::Fixed(0.0)).is_err());
        assert!(GdExperts::new(0, EtaMode::Fixed(1.0)).is_err());
    }

    #[test]
    fn theorem3_rate() {
        assert!((theorem3_eta(2.0, 0.0, 2).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(theorem3_eta(1.0, 0.0, 1).unwrap(), 1.0);
        assert!(theorem3_eta(1.0, 1e12, 2).unwrap() < 1e-5);
        assert!(theorem3_eta(0.5, 0.0, 2).is_err());
    }

    #[test]
    fn theorem4_restart_length() {
        assert_eq!(theorem4_block(8.0, 2.0, 1000).unwrap(), 13);
        assert_eq!(theorem4_block(0.001, 2.0, 1000).unwrap(), 1);
        assert_eq!(theorem4_block(5.0, 0.0, 1000).unwrap(), 1000);
    }

    proptest! {
        #[test]
        fn projection_matches_grid_oracle(y in proptest::collection::vec(-1.5f64..1.5, 1..=3)) {
            let p = project_simplex(&y);
            prop_assert!(p.validate().is_ok());
            let oracle = grid_projection(&y, 1000);
            for (a, b) in p.weights().iter().zip(&oracle) {
                prop_assert!((a - b).abs() <= 1e-3, "{:?} vs {:?}", p.weights(), oracle);
            }
        }

        #[test]
        fn played_points_are_valid(losses in proptest::collection::vec(proptest::collection::vec(0.0f64..=1.0, 4), 1..40), adaptive in any::<bool>()) {
            let mode = if adaptive { EtaMode::Adaptive { block: 7 } } else { EtaMode::Fixed(0.4) };
            let mut gd = GdExperts::new(4, mode).unwrap();
            for loss in &losses {
                prop_assert!(gd.play().validate().is_ok());
                gd.update_with(loss).unwrap();
                prop_assert!(gd.dev_accum() >= 0.0);
            }
        }
    }
}
