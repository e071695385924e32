//! Recursive least squares without forgetting, plus a windowed
//! persistent-excitation monitor.
//!
//! One update with regressor `φ` and scalar target `y`:
//!
//! ```text
//! v  = P φ                    q² MACs
//! s  = 1 + φ'v                q  MACs
//! e  = y − φ'θ                q  MACs
//! g  = v / s                  (q divisions)
//! θ += g e                    q  MACs
//! P −= g v'                   q² MACs (full matrix)
//! P  = (P + P') / 2           (halving adds)
//! ```
//!
//! A multiply-accumulate (MAC) is one fused `a·b + c`. Divisions and the
//! symmetrization pass are not MACs, so an update costs exactly
//! [`update_macs`]`(q) = 2q² + 3q` MACs.

use alloc::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::linalg;

pub const DEFAULT_P0_SCALE: f64 = 1e3;
pub const DEFAULT_PE_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RlsError {
    #[error("regressor has length {found}, estimator expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite regressor or target")]
    NonFinite,
    #[error("covariance lost positive definiteness; reset required")]
    CovarianceLost,
    #[error("covariance scale must be positive, got {0}")]
    InvalidScale(f64),
    #[error("persistent-excitation check needs {need} samples, window holds {have}")]
    InsufficientSamples { have: usize, need: usize },
}

/// MACs performed by one [`RlsEstimator::update`] on `q` parameters.
pub const fn update_macs(q: usize) -> u64 {
    let q = q as u64;
    2 * q * q + 3 * q
}

#[derive(Debug, Clone, PartialEq)]
pub struct RlsEstimator {
    theta: DVector<f64>,
    cov: DMatrix<f64>,
    updates_seen: u64,
    macs: u64,
}

impl RlsEstimator {
    /// Zero estimate with covariance `p0_scale · I`.
    pub fn new(q: usize, p0_scale: f64) -> Result<Self, RlsError> {
        Self::with_theta(DVector::zeros(q), p0_scale)
    }

    pub fn with_theta(theta: DVector<f64>, p0_scale: f64) -> Result<Self, RlsError> {
        if !(p0_scale > 0.0 && p0_scale.is_finite()) {
            return Err(RlsError::InvalidScale(p0_scale));
        }
        let q = theta.len();
        Ok(Self {
            theta,
            cov: DMatrix::identity(q, q) * p0_scale,
            updates_seen: 0,
            macs: 0,
        })
    }

    pub fn num_params(&self) -> usize {
        self.theta.len()
    }

    pub fn theta(&self) -> &DVector<f64> {
        &self.theta
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn updates_seen(&self) -> u64 {
        self.updates_seen
    }

    /// MACs spent in [`update`](Self::update) since construction.
    pub fn macs(&self) -> u64 {
        self.macs
    }

    /// Sets the covariance to `p0_scale · I`; the estimate is kept.
    pub fn reset_covariance(&mut self, p0_scale: f64) -> Result<(), RlsError> {
        if !(p0_scale > 0.0 && p0_scale.is_finite()) {
            return Err(RlsError::InvalidScale(p0_scale));
        }
        let q = self.num_params();
        self.cov = DMatrix::identity(q, q) * p0_scale;
        Ok(())
    }

    /// One RLS step. Returns the a-priori prediction error `y − φ'θ`.
    pub fn update(&mut self, phi: &DVector<f64>, target: f64) -> Result<f64, RlsError> {
        let q = self.num_params();
        if phi.len() != q {
            return Err(RlsError::DimensionMismatch {
                expected: q,
                found: phi.len(),
            });
        }
        if !target.is_finite() || phi.iter().any(|v| !v.is_finite()) {
            return Err(RlsError::NonFinite);
        }
        let phi = phi.as_slice();

        let mut v = DVector::<f64>::zeros(q);
        for i in 0..q {
            let mut acc = 0.0;
            for (j, &pj) in phi.iter().enumerate() {
                acc += self.cov[(i, j)] * pj;
            }
            v[i] = acc;
        }
        let mut denom = 1.0;
        let mut prediction = 0.0;
        for i in 0..q {
            denom += phi[i] * v[i];
            prediction += phi[i] * self.theta[i];
        }
        if !(denom > 0.0) || !denom.is_finite() {
            return Err(RlsError::CovarianceLost);
        }
        let innovation = target - prediction;
        let gain = v.map(|vi| vi / denom);
        for i in 0..q {
            self.theta[i] += gain[i] * innovation;
        }
        for j in 0..q {
            for i in 0..q {
                self.cov[(i, j)] -= gain[i] * v[j];
            }
        }
        for i in 0..q {
            for j in (i + 1)..q {
                let avg = 0.5 * (self.cov[(i, j)] + self.cov[(j, i)]);
                self.cov[(i, j)] = avg;
                self.cov[(j, i)] = avg;
            }
        }
        self.updates_seen += 1;
        self.macs += update_macs(q);
        if (0..q).any(|i| !(self.cov[(i, i)] > 0.0)) {
            return Err(RlsError::CovarianceLost);
        }
        Ok(innovation)
    }
}

/// Eigen-extremes of a windowed regressor average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeReport {
    pub alpha: f64,
    pub beta: f64,
    pub satisfied: bool,
}

/// Ring buffer of the most recent regressors.
#[derive(Debug, Clone)]
pub struct PeMonitor {
    capacity: usize,
    window: VecDeque<DVector<f64>>,
}

impl PeMonitor {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            window: VecDeque::with_capacity(capacity),
        }
    }

    pub fn push(&mut self, phi: DVector<f64>) {
        if self.capacity == 0 {
            return;
        }
        if self.window.len() == self.capacity {
            self.window.pop_front();
        }
        self.window.push_back(phi);
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    pub fn clear(&mut self) {
        self.window.clear();
    }

    /// Min/max eigenvalue of `(1/M) Σ φφ'` over the last `m` regressors;
    /// satisfied when the minimum reaches `pe_floor`.
    pub fn check(&self, m: usize, pe_floor: f64) -> Result<PeReport, RlsError> {
        if m == 0 || self.window.len() < m {
            return Err(RlsError::InsufficientSamples {
                have: self.window.len(),
                need: m.max(1),
            });
        }
        let q = self.window[0].len();
        let mut avg = DMatrix::<f64>::zeros(q, q);
        for phi in self.window.iter().skip(self.window.len() - m) {
            avg.ger(1.0, phi, phi, 1.0);
        }
        avg /= m as f64;
        let (alpha, beta) = linalg::symmetric_extremes(&avg);
        Ok(PeReport {
            alpha,
            beta,
            satisfied: alpha >= pe_floor,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(v)
    }

    #[test]
    fn zero_innovation_leaves_estimate() {
        let mut est = RlsEstimator::with_theta(dv(&[0.5, -1.0]), 10.0).unwrap();
        let phi = dv(&[2.0, 3.0]);
        let target = phi.dot(est.theta());
        est.update(&phi, target).unwrap();
        assert_eq!(est.theta(), &dv(&[0.5, -1.0]));
    }

    #[test]
    fn two_samples_interpolate() {
        let mut est = RlsEstimator::new(2, 1e6).unwrap();
        est.update(&dv(&[1.0, 0.0]), 1.0).unwrap();
        est.update(&dv(&[0.0, 1.0]), 2.0).unwrap();
        assert!((est.theta() - dv(&[1.0, 2.0])).norm() < 1e-4);
    }

    #[test]
    fn scalar_step_closed_form() {
        let (p0, c) = (4.0, 3.0);
        let mut est = RlsEstimator::new(1, p0).unwrap();
        est.update(&dv(&[1.0]), c).unwrap();
        assert!((est.theta()[0] - c * p0 / (1.0 + p0)).abs() < 1e-15);
        assert!((est.covariance()[(0, 0)] - p0 / (1.0 + p0)).abs() < 1e-15);
    }

    #[test]
    fn reset_touches_covariance_only() {
        let mut est = RlsEstimator::new(3, 5.0).unwrap();
        est.update(&dv(&[1.0, 2.0, 0.5]), 4.0).unwrap();
        let before = est.theta().clone();
        est.reset_covariance(1000.0).unwrap();
        assert_eq!(est.theta(), &before);
        assert_eq!(est.covariance(), &(DMatrix::identity(3, 3) * 1000.0));
        let (lo, hi) = linalg::symmetric_extremes(est.covariance());
        assert_eq!((lo, hi), (1000.0, 1000.0));
        assert_eq!(est.reset_covariance(0.0), Err(RlsError::InvalidScale(0.0)));
    }

    #[test]
    fn update_errors() {
        let mut est = RlsEstimator::new(2, 1.0).unwrap();
        assert_eq!(
            est.update(&dv(&[1.0]), 0.0),
            Err(RlsError::DimensionMismatch { expected: 2, found: 1 })
        );
        assert_eq!(est.update(&dv(&[1.0, f64::NAN]), 0.0), Err(RlsError::NonFinite));
        assert_eq!(est.update(&dv(&[1.0, 1.0]), f64::INFINITY), Err(RlsError::NonFinite));
        assert_eq!(est.updates_seen(), 0);
        assert_eq!(est.macs(), 0);
    }

    #[test]
    fn mac_counter_tracks_updates() {
        let mut est = RlsEstimator::new(4, 1.0).unwrap();
        for k in 0..7 {
            est.update(&dv(&[1.0, k as f64, 0.5, -1.0]), 1.0).unwrap();
        }
        assert_eq!(est.macs(), 7 * update_macs(4));
        assert_eq!(update_macs(1), 5);
    }

    #[test]
    fn pe_examples() {
        let q = 4;
        let mut mon = PeMonitor::new(q);
        for i in 0..q {
            let mut e = DVector::zeros(q);
            e[i] = 1.0;
            mon.push(e);
        }
        let rep = mon.check(q, DEFAULT_PE_FLOOR).unwrap();
        assert!((rep.alpha - 0.25).abs() < 1e-15 && (rep.beta - 0.25).abs() < 1e-15);
        assert!(rep.satisfied);

        let mut mon = PeMonitor::new(5);
        for _ in 0..5 {
            mon.push(dv(&[1.0, 0.0, 0.0]));
        }
        let rep = mon.check(5, DEFAULT_PE_FLOOR).unwrap();
        assert!(rep.alpha.abs() < 1e-15);
        assert!(!rep.satisfied);

        let mut mon = PeMonitor::new(3);
        for _ in 0..3 {
            mon.push(DVector::zeros(2));
        }
        let rep = mon.check(3, DEFAULT_PE_FLOOR).unwrap();
        assert_eq!((rep.alpha, rep.beta, rep.satisfied), (0.0, 0.0, false));

        assert_eq!(
            PeMonitor::new(3).check(3, DEFAULT_PE_FLOOR),
            Err(RlsError::InsufficientSamples { have: 0, need: 3 })
        );
    }

    #[test]
    fn pe_window_keeps_latest() {
        let mut mon = PeMonitor::new(2);
        mon.push(dv(&[10.0]));
        mon.push(dv(&[1.0]));
        mon.push(dv(&[1.0]));
        assert_eq!(mon.len(), 2);
        assert_eq!(mon.check(2, 0.0).unwrap().beta, 1.0);
    }

    #[test]
    fn exact_targets_recovered_after_q_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let q = 6;
        let truth = DVector::from_fn(q, |_, _| rng.random_range(-3.0..3.0));
        let mut est = RlsEstimator::new(q, 1e6).unwrap();
        for _ in 0..q {
            let phi = DVector::from_fn(q, |_, _| rng.random_range(-1.0..1.0));
            let y = phi.dot(&truth);
            est.update(&phi, y).unwrap();
        }
        assert!((est.theta() - &truth).norm() < 1e-3 * truth.norm());
    }

    proptest! {
        #[test]
        fn sample_order_does_not_matter_at_convergence(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let q = 3;
            let truth = DVector::from_fn(q, |_, _| rng.random_range(-2.0..2.0));
            let samples: Vec<_> = (0..12)
                .map(|_| {
                    let phi = DVector::from_fn(q, |_, _| rng.random_range(-1.0..1.0));
                    let y = phi.dot(&truth);
                    (phi, y)
                })
                .collect();
            let mut fwd = RlsEstimator::new(q, 1e6).unwrap();
            let mut rev = RlsEstimator::new(q, 1e6).unwrap();
            for (phi, y) in &samples {
                fwd.update(phi, *y).unwrap();
            }
            for (phi, y) in samples.iter().rev() {
                rev.update(phi, *y).unwrap();
            }
            prop_assert!((fwd.theta() - rev.theta()).norm() < 1e-6);
        }
    }
}
