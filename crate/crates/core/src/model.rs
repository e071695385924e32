//! Agent dynamics, cost weights, the interaction graph and the stacked
//! network-level LQR problem.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::linalg;

/// Relative singular-value threshold used for controllability rank.
pub const TOL_RANK: f64 = 1e-9;
/// Symmetry / semidefiniteness slack.
pub const TOL_SYM: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{what}: expected {expected_rows}x{expected_cols}, found {rows}x{cols}")]
    Shape {
        what: &'static str,
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },
    #[error("dimension must be at least 1 ({0})")]
    EmptyDimension(&'static str),
    #[error("{0} is not symmetric")]
    NotSymmetric(&'static str),
    #[error("{what} is not positive {kind} (min eigenvalue {min_eigenvalue:e})")]
    Definiteness {
        what: &'static str,
        kind: &'static str,
        min_eigenvalue: f64,
    },
    #[error("discount must lie in (0, 1], got {0}")]
    Discount(f64),
    #[error("{0} contains non-finite entries")]
    NonFinite(&'static str),
    #[error("graph needs at least one agent")]
    NoAgents,
    #[error("self-loop on agent {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("agent index {index} out of range for {num_agents} agents")]
    AgentOutOfRange { index: usize, num_agents: usize },
}

fn check_shape(
    what: &'static str,
    m: &DMatrix<f64>,
    rows: usize,
    cols: usize,
) -> Result<(), ModelError> {
    if m.nrows() != rows || m.ncols() != cols {
        return Err(ModelError::Shape {
            what,
            expected_rows: rows,
            expected_cols: cols,
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFinite(what));
    }
    Ok(())
}

/// Identical agent dynamics `x+ = A x + B u`.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiModel {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

impl LtiModel {
    /// Validates shapes only; controllability is a separate query because
    /// some callers deliberately build uncontrollable pairs.
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self, ModelError> {
        let n = a.nrows();
        if n == 0 {
            return Err(ModelError::EmptyDimension("state"));
        }
        if b.ncols() == 0 {
            return Err(ModelError::EmptyDimension("input"));
        }
        check_shape("A", &a, n, n)?;
        check_shape("B", &b, n, b.ncols())?;
        Ok(Self { a, b })
    }

    pub fn scalar(a: f64, b: f64) -> Result<Self, ModelError> {
        Self::new(DMatrix::from_element(1, 1, a), DMatrix::from_element(1, 1, b))
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    /// `[B AB ... A^(n-1) B]`.
    pub fn controllability_matrix(&self) -> DMatrix<f64> {
        let n = self.state_dim();
        let m = self.input_dim();
        let mut c = DMatrix::zeros(n, n * m);
        let mut block = self.b.clone();
        for k in 0..n {
            c.view_mut((0, k * m), (n, m)).copy_from(&block);
            block = &self.a * block;
        }
        c
    }

    /// Closed-loop matrix `A + B K` for a gain in the `u = K x` convention.
    pub fn closed_loop(&self, gain: &DMatrix<f64>) -> DMatrix<f64> {
        &self.a + &self.b * gain
    }

    pub fn propagate(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        &self.a * x + &self.b * u
    }
}

/// True iff `rank [B AB ... A^(n-1)B] = n`, with rank measured relative to the
/// largest singular value ([`TOL_RANK`]).
pub fn controllability_check(model: &LtiModel) -> bool {
    linalg::rank(&model.controllability_matrix(), TOL_RANK) == model.state_dim()
}

/// Stage-cost weights `Qbar ⪰ 0`, `Rbar ≻ 0` and discount `gamma ∈ (0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostWeights {
    qbar: DMatrix<f64>,
    rbar: DMatrix<f64>,
    gamma: f64,
}

impl CostWeights {
    pub fn new(qbar: DMatrix<f64>, rbar: DMatrix<f64>, gamma: f64) -> Result<Self, ModelError> {
        check_shape("Qbar", &qbar, qbar.nrows(), qbar.nrows())?;
        check_shape("Rbar", &rbar, rbar.nrows(), rbar.nrows())?;
        if qbar.nrows() == 0 || rbar.nrows() == 0 {
            return Err(ModelError::EmptyDimension("weights"));
        }
        if !linalg::is_symmetric(&qbar, TOL_SYM) {
            return Err(ModelError::NotSymmetric("Qbar"));
        }
        if !linalg::is_symmetric(&rbar, TOL_SYM) {
            return Err(ModelError::NotSymmetric("Rbar"));
        }
        let (qmin, _) = linalg::symmetric_extremes(&qbar);
        if qmin < -TOL_SYM * qbar.amax().max(1.0) {
            return Err(ModelError::Definiteness {
                what: "Qbar",
                kind: "semidefinite",
                min_eigenvalue: qmin,
            });
        }
        let (rmin, _) = linalg::symmetric_extremes(&rbar);
        if rmin <= 0.0 {
            return Err(ModelError::Definiteness {
                what: "Rbar",
                kind: "definite",
                min_eigenvalue: rmin,
            });
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(ModelError::Discount(gamma));
        }
        Ok(Self { qbar, rbar, gamma })
    }

    /// `Qbar = I_n`, `Rbar = I_m`.
    pub fn identity(n: usize, m: usize, gamma: f64) -> Result<Self, ModelError> {
        Self::new(DMatrix::identity(n, n), DMatrix::identity(m, m), gamma)
    }

    pub fn scalar(q: f64, r: f64, gamma: f64) -> Result<Self, ModelError> {
        Self::new(DMatrix::from_element(1, 1, q), DMatrix::from_element(1, 1, r), gamma)
    }

    /// Bypasses validation; used by tests that probe the `gamma = 0` limit.
    #[cfg(test)]
    pub(crate) fn unchecked(qbar: DMatrix<f64>, rbar: DMatrix<f64>, gamma: f64) -> Self {
        Self { qbar, rbar, gamma }
    }

    pub fn qbar(&self) -> &DMatrix<f64> {
        &self.qbar
    }

    pub fn rbar(&self) -> &DMatrix<f64> {
        &self.rbar
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Errors unless the weights match the model's state and input sizes.
    pub fn check_against(&self, model: &LtiModel) -> Result<(), ModelError> {
        let n = model.state_dim();
        let m = model.input_dim();
        check_shape("Qbar", &self.qbar, n, n)?;
        check_shape("Rbar", &self.rbar, m, m)
    }

    /// `x' Qbar x + u' Rbar u`.
    pub fn stage_cost(&self, x: &DVector<f64>, u: &DVector<f64>) -> f64 {
        linalg::quad_form(&self.qbar, x) + linalg::quad_form(&self.rbar, u)
    }
}

/// Undirected, unweighted agent topology. Neighbor lists are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionGraph {
    neighbors: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl InteractionGraph {
    pub fn new(num_agents: usize, edges: &[(usize, usize)]) -> Result<Self, ModelError> {
        if num_agents == 0 {
            return Err(ModelError::NoAgents);
        }
        let mut sets: Vec<BTreeSet<usize>> = (0..num_agents).map(|_| BTreeSet::new()).collect();
        let mut canonical = Vec::with_capacity(edges.len());
        for &(i, j) in edges {
            for index in [i, j] {
                if index >= num_agents {
                    return Err(ModelError::AgentOutOfRange { index, num_agents });
                }
            }
            if i == j {
                return Err(ModelError::SelfLoop(i));
            }
            if !sets[i].insert(j) {
                return Err(ModelError::DuplicateEdge(i, j));
            }
            sets[j].insert(i);
            canonical.push((i.min(j), i.max(j)));
        }
        canonical.sort_unstable();
        Ok(Self {
            neighbors: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
            edges: canonical,
        })
    }

    pub fn edgeless(num_agents: usize) -> Result<Self, ModelError> {
        Self::new(num_agents, &[])
    }

    pub fn path(num_agents: usize) -> Result<Self, ModelError> {
        let edges: Vec<_> = (1..num_agents).map(|i| (i - 1, i)).collect();
        Self::new(num_agents, &edges)
    }

    /// Ring over all agents. Fewer than three agents degenerates to a path.
    pub fn cycle(num_agents: usize) -> Result<Self, ModelError> {
        let mut edges: Vec<_> = (1..num_agents).map(|i| (i - 1, i)).collect();
        if num_agents >= 3 {
            edges.push((num_agents - 1, 0));
        }
        Self::new(num_agents, &edges)
    }

    pub fn complete(num_agents: usize) -> Result<Self, ModelError> {
        let mut edges = Vec::new();
        for i in 0..num_agents {
            for j in (i + 1)..num_agents {
                edges.push((i, j));
            }
        }
        Self::new(num_agents, &edges)
    }

    /// Agent 0 is the hub.
    pub fn star(num_agents: usize) -> Result<Self, ModelError> {
        let edges: Vec<_> = (1..num_agents).map(|i| (0, i)).collect();
        Self::new(num_agents, &edges)
    }

    pub fn num_agents(&self) -> usize {
        self.neighbors.len()
    }

    /// Edges as `(min, max)` pairs in ascending order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Neighbors of agent `i` in ascending index order.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    /// `L = D - Adj`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let n = self.num_agents();
        let mut l = DMatrix::zeros(n, n);
        for (i, nbrs) in self.neighbors.iter().enumerate() {
            l[(i, i)] = nbrs.len() as f64;
            for &j in nbrs {
                l[(i, j)] = -1.0;
            }
        }
        l
    }
}

/// Free-function form of [`InteractionGraph::laplacian`].
pub fn laplacian(g: &InteractionGraph) -> DMatrix<f64> {
    g.laplacian()
}

/// The stacked network problem: block-diagonal dynamics and the
/// Laplacian-coupled state weight.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalProblem {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
    num_agents: usize,
}

impl GlobalProblem {
    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    /// `x' Q x + u' R u` on the stacked state and input.
    pub fn cost(&self, x: &DVector<f64>, u: &DVector<f64>) -> Result<f64, ModelError> {
        if x.len() != self.q.nrows() {
            return Err(ModelError::Shape {
                what: "stacked state",
                expected_rows: self.q.nrows(),
                expected_cols: 1,
                rows: x.len(),
                cols: 1,
            });
        }
        if u.len() != self.r.nrows() {
            return Err(ModelError::Shape {
                what: "stacked input",
                expected_rows: self.r.nrows(),
                expected_cols: 1,
                rows: u.len(),
                cols: 1,
            });
        }
        Ok(linalg::quad_form(&self.q, x) + linalg::quad_form(&self.r, u))
    }

    /// The stacked problem as a single model plus weights, e.g. for a
    /// centralized learner.
    pub fn as_single_agent(&self, gamma: f64) -> Result<(LtiModel, CostWeights), ModelError> {
        Ok((
            LtiModel::new(self.a.clone(), self.b.clone())?,
            CostWeights::new(self.q.clone(), self.r.clone(), gamma)?,
        ))
    }
}

/// `A~ = I_N ⊗ A`, `B~ = I_N ⊗ B`, `Q~ = (L + I_N) ⊗ Qbar`, `R~ = I_N ⊗ Rbar`.
pub fn assemble_global(
    model: &LtiModel,
    w: &CostWeights,
    g: &InteractionGraph,
) -> Result<GlobalProblem, ModelError> {
    w.check_against(model)?;
    let n_agents = g.num_agents();
    let eye = DMatrix::<f64>::identity(n_agents, n_agents);
    let coupling = g.laplacian() + &eye;
    Ok(GlobalProblem {
        a: eye.kronecker(model.a()),
        b: eye.kronecker(model.b()),
        q: coupling.kronecker(w.qbar()),
        r: eye.kronecker(w.rbar()),
        num_agents: n_agents,
    })
}

/// Free-function form of [`GlobalProblem::cost`].
pub fn global_cost(
    problem: &GlobalProblem,
    x: &DVector<f64>,
    u: &DVector<f64>,
) -> Result<f64, ModelError> {
    problem.cost(x, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn dm(r: usize, c: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(r, c, v)
    }

    #[test]
    fn laplacian_examples() {
        assert_eq!(InteractionGraph::edgeless(3).unwrap().laplacian(), DMatrix::zeros(3, 3));
        assert_eq!(
            InteractionGraph::path(3).unwrap().laplacian(),
            dm(3, 3, &[1., -1., 0., -1., 2., -1., 0., -1., 1.])
        );
        assert_eq!(
            InteractionGraph::complete(3).unwrap().laplacian(),
            dm(3, 3, &[2., -1., -1., -1., 2., -1., -1., -1., 2.])
        );
    }

    #[test]
    fn graph_validation() {
        assert_eq!(InteractionGraph::new(3, &[(1, 1)]), Err(ModelError::SelfLoop(1)));
        assert_eq!(
            InteractionGraph::new(3, &[(0, 1), (1, 0)]),
            Err(ModelError::DuplicateEdge(1, 0))
        );
        assert_eq!(
            InteractionGraph::new(2, &[(0, 2)]),
            Err(ModelError::AgentOutOfRange { index: 2, num_agents: 2 })
        );
        assert_eq!(InteractionGraph::new(0, &[]), Err(ModelError::NoAgents));
    }

    #[test]
    fn generators() {
        let star = InteractionGraph::star(4).unwrap();
        assert_eq!(star.neighbors(0), &[1, 2, 3]);
        assert_eq!(star.degree(2), 1);
        let ring = InteractionGraph::cycle(4).unwrap();
        assert!((0..4).all(|i| ring.degree(i) == 2));
        assert_eq!(ring.neighbors(0), &[1, 3]);
        assert_eq!(InteractionGraph::cycle(2).unwrap().edges(), &[(0, 1)]);
    }

    #[test]
    fn controllability_examples() {
        assert!(controllability_check(&LtiModel::scalar(0.9, 1.0).unwrap()));
        let uncontrollable = LtiModel::new(DMatrix::identity(2, 2), dm(2, 1, &[1., 0.])).unwrap();
        assert!(!controllability_check(&uncontrollable));
        let chain = LtiModel::new(dm(2, 2, &[0., 1., 0., 0.]), dm(2, 1, &[0., 1.])).unwrap();
        assert!(controllability_check(&chain));
    }

    #[test]
    fn weights_validation() {
        assert!(matches!(CostWeights::scalar(1.0, 0.0, 1.0), Err(ModelError::Definiteness { .. })));
        assert!(matches!(CostWeights::scalar(-1.0, 1.0, 1.0), Err(ModelError::Definiteness { .. })));
        assert_eq!(CostWeights::scalar(1.0, 1.0, 0.0), Err(ModelError::Discount(0.0)));
        assert_eq!(CostWeights::scalar(1.0, 1.0, 1.5), Err(ModelError::Discount(1.5)));
        assert_eq!(
            CostWeights::new(dm(2, 2, &[1., 0.5, 0., 1.]), DMatrix::identity(1, 1), 1.0),
            Err(ModelError::NotSymmetric("Qbar"))
        );
    }

    #[test]
    fn assemble_single_agent_is_identity_embedding() {
        let model = LtiModel::new(dm(2, 2, &[0.5, 0.1, 0.0, 0.3]), dm(2, 1, &[0., 1.])).unwrap();
        let w = CostWeights::new(dm(2, 2, &[2., 0.5, 0.5, 1.]), dm(1, 1, &[3.]), 1.0).unwrap();
        let gp = assemble_global(&model, &w, &InteractionGraph::edgeless(1).unwrap()).unwrap();
        assert_eq!(&gp.a, model.a());
        assert_eq!(&gp.b, model.b());
        assert_eq!(&gp.q, w.qbar());
        assert_eq!(&gp.r, w.rbar());
    }

    #[test]
    fn assemble_two_agents_single_edge() {
        let model = LtiModel::new(DMatrix::identity(2, 2) * 0.5, DMatrix::identity(2, 2)).unwrap();
        let w = CostWeights::identity(2, 2, 1.0).unwrap();
        let gp = assemble_global(&model, &w, &InteractionGraph::path(2).unwrap()).unwrap();
        #[rustfmt::skip]
        let expected = dm(4, 4, &[
            2., 0., -1., 0.,
            0., 2., 0., -1.,
            -1., 0., 2., 0.,
            0., -1., 0., 2.,
        ]);
        assert_eq!(gp.q, expected);
        // off-diagonal blocks of the dynamics are exactly zero
        assert!(gp.a.view((0, 2), (2, 2)).iter().all(|&v| v == 0.0));
        assert!(gp.b.view((2, 0), (2, 2)).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cost_at_origin_and_at_consensus() {
        let model = LtiModel::scalar(0.9, 1.0).unwrap();
        let w = CostWeights::scalar(2.0, 1.0, 1.0).unwrap();
        let gp = assemble_global(&model, &w, &InteractionGraph::complete(3).unwrap()).unwrap();
        assert_eq!(gp.cost(&DVector::zeros(3), &DVector::zeros(3)).unwrap(), 0.0);
        let x = DVector::from_element(3, 1.5);
        let c = gp.cost(&x, &DVector::zeros(3)).unwrap();
        assert!((c - 3.0 * 2.0 * 2.25).abs() < 1e-12);
        assert!(gp.cost(&DVector::zeros(2), &DVector::zeros(3)).is_err());
    }

    /// Own stage costs plus one weighted state-difference term per edge.
    /// `(L + I) ⊗ Qbar` counts each undirected edge once; the ordered
    /// double sum over `j ∈ N(i)` would count it twice.
    fn explicit_cost(
        w: &CostWeights,
        g: &InteractionGraph,
        xs: &[DVector<f64>],
        us: &[DVector<f64>],
    ) -> f64 {
        let mut total = 0.0;
        for i in 0..g.num_agents() {
            total += w.stage_cost(&xs[i], &us[i]);
        }
        for &(i, j) in g.edges() {
            let d = &xs[i] - &xs[j];
            total += linalg::quad_form(w.qbar(), &d);
        }
        total
    }

    fn stack(vs: &[DVector<f64>]) -> DVector<f64> {
        let mut out = vec![];
        for v in vs {
            out.extend(v.iter().copied());
        }
        DVector::from_vec(out)
    }

    proptest! {
        #[test]
        fn laplacian_rows_sum_to_zero_and_psd(
            n in 1usize..8,
            mask in proptest::collection::vec(any::<bool>(), 28),
        ) {
            let mut edges = vec![];
            let mut k = 0;
            for i in 0..n {
                for j in (i + 1)..n {
                    if mask[k] { edges.push((i, j)); }
                    k += 1;
                }
            }
            let g = InteractionGraph::new(n, &edges).unwrap();
            let l = g.laplacian();
            for r in 0..n {
                prop_assert_eq!(l.row(r).sum(), 0.0);
            }
            prop_assert!(linalg::symmetric_extremes(&l).0 >= -1e-10);
            for i in 0..n {
                for &j in g.neighbors(i) {
                    prop_assert!(g.neighbors(j).contains(&i));
                }
            }
        }

        #[test]
        fn stacked_cost_matches_pairwise_sum(
            vals in proptest::collection::vec(-3.0f64..3.0, 30),
            qvals in proptest::collection::vec(-1.0f64..1.0, 4),
        ) {
            // path-3 graph, n = 2, m = 1
            let g = InteractionGraph::path(3).unwrap();
            let f = dm(2, 2, &qvals);
            let qbar = &f * f.transpose();
            let w = CostWeights::new(qbar, dm(1, 1, &[0.7]), 1.0).unwrap();
            let model = LtiModel::new(DMatrix::identity(2, 2), dm(2, 1, &[0., 1.])).unwrap();
            let xs: Vec<_> = (0..3).map(|i| DVector::from_row_slice(&vals[2 * i..2 * i + 2])).collect();
            let us: Vec<_> = (0..3).map(|i| DVector::from_row_slice(&vals[10 + i..11 + i])).collect();
            let gp = assemble_global(&model, &w, &g).unwrap();
            let via_kron = gp.cost(&stack(&xs), &stack(&us)).unwrap();
            let oracle = explicit_cost(&w, &g, &xs, &us);
            prop_assert!((via_kron - oracle).abs() <= 1e-10 * oracle.abs().max(1.0));
            prop_assert!(linalg::symmetric_extremes(&gp.q).0 >= -1e-10);
        }
    }

    #[test]
    fn random_three_node_coupled_weight_is_psd() {
        let g = InteractionGraph::new(3, &[(0, 2), (1, 2)]).unwrap();
        let f = dm(2, 2, &[0.3, -1.2, 0.8, 0.1]);
        let w = CostWeights::new(&f * f.transpose(), DMatrix::identity(1, 1), 1.0).unwrap();
        let model = LtiModel::new(DMatrix::identity(2, 2), dm(2, 1, &[1., 0.])).unwrap();
        let gp = assemble_global(&model, &w, &g).unwrap();
        let (min, _) = linalg::symmetric_extremes(&gp.q);
        assert!(min >= -1e-12, "min eigenvalue {min}");
    }
}
