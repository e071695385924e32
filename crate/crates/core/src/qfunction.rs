//! Quadratic Q-functions `Q(x, u) = z' H z`, `z = [x; u]`.
//!
//! # Parameter layout
//!
//! A symmetric `p×p` matrix `H` (`p = n + m`) is packed into
//! `θ ∈ R^{p(p+1)/2}` by walking the upper triangle row by row:
//! `(0,0), (0,1), …, (0,p−1), (1,1), (1,2), …, (p−1,p−1)`. Diagonal
//! entries are stored as-is and off-diagonal entries doubled, so with the
//! basis `z̄ = [z_i z_j]_{i≤j}` in the same order the identity
//! `z̄'θ = z'Hz` is exact. This order is also the one used when parameter
//! vectors are serialized.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::linalg;
use crate::model::{CostWeights, LtiModel, TOL_SYM};

/// Threshold below which `H₂₂` counts as not positive definite (scaled by
/// `max(1, max|H₂₂|)`).
pub const TOL_PD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QError {
    #[error("H is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("parameter vector has length {found}, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("H22 is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
}

/// Number of free parameters of a symmetric `(n+m)`-square matrix.
pub const fn param_count(n: usize, m: usize) -> usize {
    let p = n + m;
    p * (p + 1) / 2
}

/// Quadratic basis `[z_i z_j]_{i≤j}` in row-major upper-triangle order.
pub fn quad_basis(z: &DVector<f64>) -> DVector<f64> {
    let p = z.len();
    let mut out = Vec::with_capacity(p * (p + 1) / 2);
    for i in 0..p {
        for j in i..p {
            out.push(z[i] * z[j]);
        }
    }
    DVector::from_vec(out)
}

/// Packed parameters of a symmetric Q-function matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QParamVector {
    theta: DVector<f64>,
    n: usize,
    m: usize,
}

impl QParamVector {
    pub fn new(theta: DVector<f64>, n: usize, m: usize) -> Result<Self, QError> {
        let expected = param_count(n, m);
        if theta.len() != expected {
            return Err(QError::LengthMismatch {
                expected,
                found: theta.len(),
            });
        }
        Ok(Self { theta, n, m })
    }

    pub fn theta(&self) -> &DVector<f64> {
        &self.theta
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.theta
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n, self.m)
    }
}

/// Symmetric `H` with its `(n, m)` block split.
#[derive(Debug, Clone, PartialEq)]
pub struct HMatrix {
    h: DMatrix<f64>,
    n: usize,
    m: usize,
}

impl HMatrix {
    pub fn new(h: DMatrix<f64>, n: usize, m: usize) -> Result<Self, QError> {
        let p = n + m;
        if h.nrows() != p || h.ncols() != p {
            return Err(QError::LengthMismatch {
                expected: p * p,
                found: h.len(),
            });
        }
        if !linalg::is_symmetric(&h, TOL_SYM) {
            return Err(QError::NotSymmetric(linalg::asymmetry(&h)));
        }
        Ok(Self { h, n, m })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    pub fn h11(&self) -> DMatrix<f64> {
        self.h.view((0, 0), (self.n, self.n)).into_owned()
    }

    pub fn h12(&self) -> DMatrix<f64> {
        self.h.view((0, self.n), (self.n, self.m)).into_owned()
    }

    pub fn h21(&self) -> DMatrix<f64> {
        self.h.view((self.n, 0), (self.m, self.n)).into_owned()
    }

    pub fn h22(&self) -> DMatrix<f64> {
        self.h.view((self.n, self.n), (self.m, self.m)).into_owned()
    }

    /// `z' H z`.
    pub fn eval(&self, z: &DVector<f64>) -> f64 {
        linalg::quad_form(&self.h, z)
    }
}

pub fn h_to_theta(h: &HMatrix) -> QParamVector {
    let p = h.n + h.m;
    let mut theta = Vec::with_capacity(p * (p + 1) / 2);
    for i in 0..p {
        theta.push(h.h[(i, i)]);
        for j in (i + 1)..p {
            // h_ij + h_ji == 2 h_ij; summing keeps tolerated asymmetry out of θ
            theta.push(h.h[(i, j)] + h.h[(j, i)]);
        }
    }
    QParamVector {
        theta: DVector::from_vec(theta),
        n: h.n,
        m: h.m,
    }
}

pub fn theta_to_h(theta: &QParamVector) -> HMatrix {
    let p = theta.n + theta.m;
    let mut h = DMatrix::zeros(p, p);
    let mut k = 0;
    for i in 0..p {
        h[(i, i)] = theta.theta[k];
        k += 1;
        for j in (i + 1)..p {
            let half = theta.theta[k] * 0.5;
            h[(i, j)] = half;
            h[(j, i)] = half;
            k += 1;
        }
    }
    HMatrix {
        h,
        n: theta.n,
        m: theta.m,
    }
}

/// The `P`-dependent part of `H`: `[[γA'PA, γA'PB], [γB'PA, γB'PB]]`.
fn cost_to_go_terms(model: &LtiModel, gamma: f64, p: &DMatrix<f64>) -> DMatrix<f64> {
    let (a, b) = (model.a(), model.b());
    let (n, m) = (model.state_dim(), model.input_dim());
    let mut h = DMatrix::zeros(n + m, n + m);
    let pa = p * a;
    let pb = p * b;
    h.view_mut((0, 0), (n, n)).copy_from(&(a.transpose() * &pa * gamma));
    let h12 = a.transpose() * &pb * gamma;
    h.view_mut((0, n), (n, m)).copy_from(&h12);
    h.view_mut((n, 0), (m, n)).copy_from(&h12.transpose());
    h.view_mut((n, n), (m, m)).copy_from(&(b.transpose() * &pb * gamma));
    h
}

/// `H` implied by a cost-to-go `P`:
/// `[[Qbar + γA'PA, γA'PB], [γB'PA, Rbar + γB'PB]]`.
pub fn true_h(model: &LtiModel, w: &CostWeights, p: &DMatrix<f64>) -> HMatrix {
    let (n, m) = (model.state_dim(), model.input_dim());
    let mut h = cost_to_go_terms(model, w.gamma(), p);
    let mut h11 = h.view_mut((0, 0), (n, n));
    h11 += w.qbar();
    let mut h22 = h.view_mut((n, n), (m, m));
    h22 += w.rbar();
    HMatrix {
        h: linalg::symmetrize(&h),
        n,
        m,
    }
}

/// Greedy gain `−H₂₂⁻¹H₂₁` (applied as `u = K x`).
///
/// A non-positive-definite `H₂₂` is reported as
/// [`QError::NotPositiveDefinite`]; learners treat it as "keep the previous
/// gain".
pub fn gain_from_h(h: &HMatrix) -> Result<DMatrix<f64>, QError> {
    let h22 = linalg::symmetrize(&h.h22());
    let (min_eigenvalue, _) = linalg::symmetric_extremes(&h22);
    if !(min_eigenvalue > TOL_PD * h22.amax().max(1.0)) {
        return Err(QError::NotPositiveDefinite { min_eigenvalue });
    }
    let chol = h22
        .cholesky()
        .ok_or(QError::NotPositiveDefinite { min_eigenvalue })?;
    Ok(-chol.solve(&h.h21()))
}

/// Per-agent reward and Q-function matrices over
/// `y = [x_i; u_i; x_{j1}; …; x_{jd}]` (neighbors ascending).
///
/// The matrix is `(n + m + d·n)` square: the `(2,2)` block is `m×m`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributedQBlocks {
    pub degree: usize,
    pub n: usize,
    pub m: usize,
    /// Reward weight: `y' Q y` is the agent's stage cost plus its coupling terms.
    pub reward: DMatrix<f64>,
}

impl DistributedQBlocks {
    pub fn dim(&self) -> usize {
        self.n + self.m + self.degree * self.n
    }

    /// `H⁽ⁱ⁾` for a cost-to-go `P`: the reward matrix with the `P`-dependent
    /// terms added to the leading `z` block.
    pub fn h_matrix(&self, model: &LtiModel, w: &CostWeights, p: &DMatrix<f64>) -> DMatrix<f64> {
        let rows = self.n + self.m;
        let mut out = self.reward.clone();
        let mut block = out.view_mut((0, 0), (rows, rows));
        block += cost_to_go_terms(model, w.gamma(), p);
        out
    }
}

pub fn build_q_blocks(model: &LtiModel, w: &CostWeights, degree: usize) -> DistributedQBlocks {
    let (n, m) = (model.state_dim(), model.input_dim());
    let dim = n + m + degree * n;
    let qbar = w.qbar();
    let mut q = DMatrix::zeros(dim, dim);
    q.view_mut((0, 0), (n, n)).copy_from(&(qbar * (degree as f64 + 1.0)));
    q.view_mut((n, n), (m, m)).copy_from(w.rbar());
    for k in 0..degree {
        let off = n + m + k * n;
        q.view_mut((off, off), (n, n)).copy_from(qbar);
        q.view_mut((0, off), (n, n)).copy_from(&(-qbar));
        q.view_mut((off, 0), (n, n)).copy_from(&(-qbar));
    }
    DistributedQBlocks {
        degree,
        n,
        m,
        reward: q,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riccati::solve_dare;
    use proptest::prelude::*;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(v)
    }

    #[test]
    fn basis_examples() {
        assert_eq!(quad_basis(&dv(&[3.0, 2.0])), dv(&[9.0, 6.0, 4.0]));
        assert_eq!(quad_basis(&dv(&[5.0])), dv(&[25.0]));
        assert_eq!(quad_basis(&DVector::from_element(8, 1.0)).len(), 36);
        assert_eq!(param_count(5, 3), 36);
    }

    #[test]
    fn packing_examples() {
        let eye = HMatrix::new(DMatrix::identity(2, 2), 1, 1).unwrap();
        assert_eq!(h_to_theta(&eye).theta, dv(&[1.0, 0.0, 1.0]));
        let h = HMatrix::new(DMatrix::from_row_slice(2, 2, &[2., 1., 1., 3.]), 1, 1).unwrap();
        assert_eq!(h_to_theta(&h).theta, dv(&[2.0, 2.0, 3.0]));

        let t = QParamVector::new(dv(&[1.0, 0.0, 1.0]), 1, 1).unwrap();
        assert_eq!(theta_to_h(&t).h, DMatrix::identity(2, 2));
        let t = QParamVector::new(dv(&[2.0, 2.0, 3.0]), 1, 1).unwrap();
        assert_eq!(theta_to_h(&t).h, DMatrix::from_row_slice(2, 2, &[2., 1., 1., 3.]));
    }

    #[test]
    fn packing_errors() {
        assert_eq!(
            QParamVector::new(dv(&[1.0, 2.0]), 1, 1),
            Err(QError::LengthMismatch { expected: 3, found: 2 })
        );
        assert!(matches!(
            HMatrix::new(DMatrix::from_row_slice(2, 2, &[1., 1., 0., 1.]), 1, 1),
            Err(QError::NotSymmetric(_))
        ));
    }

    #[test]
    fn true_h_limits() {
        let model = LtiModel::new(
            DMatrix::from_row_slice(2, 2, &[0.5, 1.0, 0.0, 0.7]),
            DMatrix::from_row_slice(2, 1, &[0.0, 1.0]),
        )
        .unwrap();
        let w = CostWeights::new(
            DMatrix::from_row_slice(2, 2, &[2., 0.1, 0.1, 1.]),
            DMatrix::from_element(1, 1, 0.4),
            0.9,
        )
        .unwrap();
        let mut blockdiag = DMatrix::zeros(3, 3);
        blockdiag.view_mut((0, 0), (2, 2)).copy_from(w.qbar());
        blockdiag[(2, 2)] = 0.4;
        assert_eq!(true_h(&model, &w, &DMatrix::zeros(2, 2)).h, blockdiag);

        let myopic = CostWeights::unchecked(w.qbar().clone(), w.rbar().clone(), 0.0);
        let p = DMatrix::from_row_slice(2, 2, &[3., 1., 1., 2.]);
        assert_eq!(true_h(&model, &myopic, &p).h, blockdiag);
    }

    #[test]
    fn scalar_h_and_gain_from_riccati() {
        let model = LtiModel::scalar(0.9, 1.0).unwrap();
        let w = CostWeights::scalar(1.0, 1.0, 1.0).unwrap();
        let sol = solve_dare(&model, &w).unwrap();
        let p = sol.p[(0, 0)];
        let h = true_h(&model, &w, &sol.p);
        assert!((h.h[(0, 0)] - (1.0 + 0.81 * p)).abs() < 1e-12);
        assert!((h.h[(0, 1)] - 0.9 * p).abs() < 1e-12);
        assert!((h.h[(1, 1)] - (1.0 + p)).abs() < 1e-12);
        assert!((h.h[(0, 0)] - 2.20196).abs() < 1e-5);
        let k = gain_from_h(&h).unwrap();
        assert!((k[(0, 0)] + 0.53767).abs() < 1e-5);
        assert!((k[(0, 0)] + sol.kstar[(0, 0)]).abs() < 1e-12);
    }

    #[test]
    fn gain_edge_cases() {
        let mut m = DMatrix::identity(3, 3);
        m[(0, 0)] = 7.0;
        let h = HMatrix::new(m, 2, 1).unwrap();
        assert_eq!(gain_from_h(&h).unwrap(), DMatrix::zeros(1, 2));
        let mut singular = DMatrix::identity(2, 2);
        singular[(1, 1)] = 0.0;
        let h = HMatrix::new(singular, 1, 1).unwrap();
        assert!(matches!(gain_from_h(&h), Err(QError::NotPositiveDefinite { .. })));
        let mut negative = DMatrix::identity(2, 2);
        negative[(1, 1)] = -2.0;
        let h = HMatrix::new(negative, 1, 1).unwrap();
        assert!(matches!(gain_from_h(&h), Err(QError::NotPositiveDefinite { .. })));
    }

    #[test]
    fn q_blocks_examples() {
        let model = LtiModel::scalar(0.9, 1.0).unwrap();
        let w = CostWeights::scalar(1.0, 1.0, 1.0).unwrap();
        assert_eq!(build_q_blocks(&model, &w, 0).reward, DMatrix::identity(2, 2));
        assert_eq!(
            build_q_blocks(&model, &w, 1).reward,
            DMatrix::from_row_slice(3, 3, &[2., 0., -1., 0., 1., 0., -1., 0., 1.])
        );
    }

    #[test]
    fn q_blocks_with_wider_input() {
        // n = 2, m = 1: (2,2) block is 1×1, matrix is n + m + d·n square
        let model = LtiModel::new(DMatrix::identity(2, 2), DMatrix::from_row_slice(2, 1, &[0., 1.])).unwrap();
        let w = CostWeights::identity(2, 1, 1.0).unwrap();
        let blocks = build_q_blocks(&model, &w, 2);
        assert_eq!(blocks.dim(), 7);
        assert_eq!(blocks.reward.nrows(), 7);
    }

    fn random_spd(vals: &[f64], k: usize) -> DMatrix<f64> {
        let f = DMatrix::from_row_slice(k, k, &vals[..k * k]);
        &f * f.transpose() + DMatrix::identity(k, k) * 0.1
    }

    proptest! {
        #[test]
        fn reward_quadratic_form_is_stage_plus_coupling(
            y in proptest::collection::vec(-2.0f64..2.0, 9),
            f in proptest::collection::vec(-1.0f64..1.0, 4),
        ) {
            // n = 2, m = 1, degree 2 → y has 2 + 1 + 4 = 7 entries
            let model = LtiModel::new(DMatrix::identity(2, 2), DMatrix::from_row_slice(2, 1, &[0., 1.])).unwrap();
            let w = CostWeights::new(random_spd(&f, 2), DMatrix::from_element(1, 1, 0.6), 1.0).unwrap();
            let blocks = build_q_blocks(&model, &w, 2);
            let y = DVector::from_row_slice(&y[..7]);
            let x = y.rows(0, 2).into_owned();
            let u = y.rows(2, 1).into_owned();
            let mut oracle = w.stage_cost(&x, &u);
            for k in 0..2 {
                let d = &x - y.rows(3 + 2 * k, 2);
                oracle += linalg::quad_form(w.qbar(), &d);
            }
            let got = linalg::quad_form(&blocks.reward, &y);
            prop_assert!((got - oracle).abs() <= 1e-12 * oracle.abs().max(1.0));
            prop_assert!(got >= -1e-12);
        }

        #[test]
        fn basis_times_theta_is_quadratic_form(
            vals in proptest::collection::vec(-5.0f64..5.0, 64),
            z in proptest::collection::vec(-3.0f64..3.0, 8),
        ) {
            let raw = DMatrix::from_row_slice(8, 8, &vals);
            let h = HMatrix::new(linalg::symmetrize(&raw), 5, 3).unwrap();
            let z = DVector::from_vec(z);
            let lhs = quad_basis(&z).dot(h_to_theta(&h).theta());
            let rhs = h.eval(&z);
            let scale = z.norm_squared() * h.h.amax();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1.0));
        }

        #[test]
        fn unpack_inverts_pack(vals in proptest::collection::vec(-5.0f64..5.0, 64)) {
            let raw = DMatrix::from_row_slice(8, 8, &vals);
            let h = HMatrix::new(linalg::symmetrize(&raw), 4, 4).unwrap();
            let back = theta_to_h(&h_to_theta(&h));
            prop_assert_eq!(back.h, h.h);
        }
    }

    #[test]
    fn distributed_h_splits_into_central_h_plus_coupling() {
        let model = LtiModel::new(
            DMatrix::from_row_slice(2, 2, &[0.9, 0.2, 0.0, 0.5]),
            DMatrix::from_row_slice(2, 1, &[0.0, 1.0]),
        )
        .unwrap();
        let w = CostWeights::identity(2, 1, 0.95).unwrap();
        let sol = solve_dare(&model, &w).unwrap();
        let blocks = build_q_blocks(&model, &w, 1);
        let hi = blocks.h_matrix(&model, &w, &sol.p);
        let hc = true_h(&model, &w, &sol.p);
        let y = dv(&[0.3, -1.2, 0.7, 2.0, 0.4]);
        let z = y.rows(0, 3).into_owned();
        let d = y.rows(0, 2) - y.rows(3, 2);
        let expected = hc.eval(&z) + linalg::quad_form(w.qbar(), &d);
        assert!((linalg::quad_form(&hi, &y) - expected).abs() < 1e-12);
        // only the leading z block differs from the reward matrix
        let diff = &hi - &blocks.reward;
        assert!(diff.view((3, 0), (2, 5)).iter().all(|&v| v == 0.0));
    }
}
