//! Discounted discrete algebraic Riccati equation, solved by value iteration.
//!
//! This is the ground truth every learned gain is compared against. It is
//! deliberately simple: `P_{j+1} = Qbar + γA'P_jA − γ²A'P_jB(Rbar + γB'P_jB)⁻¹B'P_jA`
//! from `P_0 = Qbar` until the update is below tolerance.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::linalg;
use crate::model::{CostWeights, LtiModel, ModelError};

/// Residual tolerance, scaled by `max(1, ‖P‖_F)`.
pub const TOL_DARE: f64 = 1e-12;
pub const MAX_ITER: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RiccatiError {
    #[error("Riccati iteration did not converge after {iterations} steps (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("Rbar + γB'PB is numerically singular")]
    Singular,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiSolution {
    /// Cost-to-go matrix.
    pub p: DMatrix<f64>,
    /// Optimal gain for `u = -K* x`.
    pub kstar: DMatrix<f64>,
    pub iterations: usize,
    /// `‖P − Ric(P)‖_F` at the returned `P`.
    pub residual: f64,
}

impl RiccatiSolution {
    /// The optimum in the learners' `u = K x` convention, i.e. `-K*`.
    pub fn feedback_gain(&self) -> DMatrix<f64> {
        -&self.kstar
    }
}

/// One application of the discounted Riccati map.
pub fn riccati_map(
    model: &LtiModel,
    w: &CostWeights,
    p: &DMatrix<f64>,
) -> Result<DMatrix<f64>, RiccatiError> {
    let (a, b, g) = (model.a(), model.b(), w.gamma());
    let bpa = b.transpose() * p * a;
    let s = w.rbar() + b.transpose() * p * b * g;
    let chol = linalg::symmetrize(&s).cholesky().ok_or(RiccatiError::Singular)?;
    let next = w.qbar() + a.transpose() * p * a * g - bpa.transpose() * chol.solve(&bpa) * (g * g);
    Ok(linalg::symmetrize(&next))
}

/// `γ (Rbar + γB'PB)⁻¹ B'PA`.
pub fn optimal_gain(
    model: &LtiModel,
    w: &CostWeights,
    p: &DMatrix<f64>,
) -> Result<DMatrix<f64>, RiccatiError> {
    let (a, b, g) = (model.a(), model.b(), w.gamma());
    let s = w.rbar() + b.transpose() * p * b * g;
    let chol = linalg::symmetrize(&s).cholesky().ok_or(RiccatiError::Singular)?;
    Ok(chol.solve(&(b.transpose() * p * a)) * g)
}

pub fn solve_dare(model: &LtiModel, w: &CostWeights) -> Result<RiccatiSolution, RiccatiError> {
    solve_dare_with(model, w, TOL_DARE, MAX_ITER)
}

pub fn solve_dare_with(
    model: &LtiModel,
    w: &CostWeights,
    tol: f64,
    max_iter: usize,
) -> Result<RiccatiSolution, RiccatiError> {
    w.check_against(model)?;
    let mut p = w.qbar().clone();
    let mut residual = f64::INFINITY;
    for it in 0..max_iter {
        let next = riccati_map(model, w, &p)?;
        residual = linalg::fro_distance(&next, &p);
        if !residual.is_finite() {
            break;
        }
        if residual <= tol * p.norm().max(1.0) {
            let kstar = optimal_gain(model, w, &p)?;
            return Ok(RiccatiSolution {
                p,
                kstar,
                iterations: it,
                residual,
            });
        }
        p = next;
    }
    Err(RiccatiError::NotConverged {
        iterations: max_iter,
        residual,
    })
}

/// `ρ(A + B K)` for a gain in the `u = K x` convention; below 1 means
/// stabilizing. Pass `-K*` to evaluate a textbook LQR gain.
pub fn closed_loop_spectral_radius(model: &LtiModel, gain: &DMatrix<f64>) -> f64 {
    linalg::spectral_radius(&model.closed_loop(gain))
}
