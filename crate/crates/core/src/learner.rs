//! Q-learning policy iteration: the single-agent (centralized) baseline and
//! the distributed variant in which every agent learns its own Q-function
//! from its own state, input and the states of its graph neighbors.
//!
//! Each policy-iteration round `k`:
//!
//! 1. reset every agent's RLS covariance to `p0_scale · I` (the estimate is
//!    carried over from the previous round);
//! 2. for `M` global time steps, apply `u_t = K_k x_t + e_t`, advance the
//!    network and feed the regressor `φ_t = z̄_t − γ z̄_{t+1}` with target
//!    `ξ_t` into RLS, where `z_{t+1}` pairs `x_{t+1}` with the *policy*
//!    action `K_k x_{t+1}`;
//! 3. unpack `Ĥ` and set `K_{k+1} = −Ĥ₂₂⁻¹ Ĥ₂₁`.
//!
//! For agent `i` the target is its stage cost plus the discounted coupling
//! at `t+1`:
//! `ξ_t = x_t'Q̄x_t + u_t'R̄u_t + γ Σ_{j∈N(i)} (x_{t+1} − x^j_{t+1})'Q̄(x_{t+1} − x^j_{t+1})`.
//! The neighbor blocks of the agent's Q-function are known constants, so
//! only the `(n+m)`-dimensional `z` block is estimated.
//!
//! Gains are stored in the `u = K x` convention throughout.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::linalg;
use crate::model::{controllability_check, CostWeights, InteractionGraph, LtiModel, ModelError};
use crate::qfunction::{self, param_count, QError, QParamVector};
use crate::riccati::{self, RiccatiError};
use crate::rls::{self, PeMonitor, PeReport, RlsError, RlsEstimator};
use crate::sim::{self, ExcitationConfig, NetworkState, SimError, TrajectoryRow};

pub const DEFAULT_MAX_ITERATIONS: usize = 100;
pub const DEFAULT_STOP_TOL: f64 = 1e-6;
pub const DEFAULT_INITIAL_STATE_STD: f64 = 1.0;

/// One violated configuration field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub field: &'static str,
    pub reason: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

/// Newtype so a list of issues can be displayed on one line.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssues(pub Vec<ConfigIssue>);

impl fmt::Display for ConfigIssues {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnerError {
    #[error("invalid learner configuration: {0}")]
    InvalidConfig(ConfigIssues),
    #[error("(A, B) is not controllable")]
    NotControllable,
    #[error("initial gain of agent {agent} is not stabilizing (ρ(A + BK₀) = {spectral_radius})")]
    NotStabilizing { agent: usize, spectral_radius: f64 },
    #[error("agent {agent}: {source}")]
    Rls { agent: usize, source: RlsError },
    #[error("neighbor data missing for agent {agent} (neighbor {neighbor})")]
    MissingNeighbor { agent: usize, neighbor: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Riccati(#[from] RiccatiError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Q(#[from] QError),
}

/// How agents start.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialStates {
    /// I.i.d. Gaussian entries, drawn from the excitation seed.
    Random { std: f64 },
    Given(Vec<DVector<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig {
    /// `M`, samples collected per policy-iteration round.
    pub samples_per_iteration: usize,
    pub max_iterations: usize,
    pub p0_scale: f64,
    pub excitation: ExcitationConfig,
    /// Stop once every agent's `‖K_{k+1} − K_k‖_F` falls below this.
    pub stop_tol: f64,
    pub pe_floor: f64,
    /// One gain per agent; `None` means zero gains (requires `ρ(A) < 1`).
    pub initial_gains: Option<Vec<DMatrix<f64>>>,
    /// One packed `θ̂` per agent; `None` starts from zero.
    pub initial_theta: Option<Vec<DVector<f64>>>,
    pub initial_states: InitialStates,
    pub record_trajectory: bool,
    pub blowup_bound: f64,
}

impl LearnerConfig {
    /// Defaults for an agent with `n` states and `m` inputs: `M` is three
    /// times the parameter count.
    pub fn for_dims(n: usize, m: usize) -> Self {
        Self {
            samples_per_iteration: 3 * param_count(n, m),
            max_iterations: DEFAULT_MAX_ITERATIONS,
            p0_scale: rls::DEFAULT_P0_SCALE,
            excitation: ExcitationConfig::default(),
            stop_tol: DEFAULT_STOP_TOL,
            pe_floor: rls::DEFAULT_PE_FLOOR,
            initial_gains: None,
            initial_theta: None,
            initial_states: InitialStates::Random {
                std: DEFAULT_INITIAL_STATE_STD,
            },
            record_trajectory: false,
            blowup_bound: sim::DEFAULT_BLOWUP_BOUND,
        }
    }

    /// Checks every field against an `(n, m)` agent and `num_agents`
    /// agents, reporting all violations at once.
    pub fn validate(&self, n: usize, m: usize, num_agents: usize) -> Result<(), LearnerError> {
        let mut issues = Vec::new();
        let mut push = |field: &'static str, reason: String| issues.push(ConfigIssue { field, reason });
        let q = param_count(n, m);
        if self.samples_per_iteration < q {
            push(
                "samples_per_iteration",
                alloc::format!("{} is below the parameter count {q}", self.samples_per_iteration),
            );
        }
        if self.max_iterations == 0 {
            push("max_iterations", "must be at least 1".into());
        }
        if !(self.p0_scale > 0.0 && self.p0_scale.is_finite()) {
            push("p0_scale", alloc::format!("must be positive, got {}", self.p0_scale));
        }
        if !(self.stop_tol > 0.0) {
            push("stop_tol", alloc::format!("must be positive, got {}", self.stop_tol));
        }
        if !(self.excitation.std > 0.0 && self.excitation.std.is_finite()) {
            push("excitation.std", alloc::format!("must be positive, got {}", self.excitation.std));
        }
        if !(self.blowup_bound > 0.0) {
            push("blowup_bound", "must be positive".into());
        }
        if let Some(gains) = &self.initial_gains {
            if gains.len() != num_agents {
                push("initial_gains", alloc::format!("{} gains for {num_agents} agents", gains.len()));
            } else if gains.iter().any(|k| k.nrows() != m || k.ncols() != n) {
                push("initial_gains", alloc::format!("every gain must be {m}x{n}"));
            }
        }
        if let Some(thetas) = &self.initial_theta {
            if thetas.len() != num_agents || thetas.iter().any(|t| t.len() != q) {
                push("initial_theta", alloc::format!("need {num_agents} vectors of length {q}"));
            }
        }
        match &self.initial_states {
            InitialStates::Random { std } if !(*std >= 0.0 && std.is_finite()) => {
                push("initial_states.std", alloc::format!("must be non-negative, got {std}"));
            }
            InitialStates::Given(xs) if xs.len() != num_agents || xs.iter().any(|x| x.len() != n) => {
                push("initial_states", alloc::format!("need {num_agents} vectors of length {n}"));
            }
            _ => {}
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(LearnerError::InvalidConfig(ConfigIssues(issues)))
        }
    }
}

/// Monotonic clock used to stamp iterations; `no_std` builds use [`NoClock`].
pub trait Clock {
    /// Seconds since an arbitrary origin.
    fn now(&self) -> f64;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Centralized,
    Distributed,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// The round's regressor average fell below the PE floor.
    WeakExcitation { k: usize, agent: usize, alpha: f64 },
    /// `Ĥ₂₂` was not positive definite; the agent kept its previous gain.
    SkippedUpdate { k: usize, agent: usize, min_eigenvalue: f64 },
    /// RLS covariance lost definiteness and was reset mid-round.
    CovarianceReset { k: usize, agent: usize, t: u64 },
}

/// Per-agent outcome of one round.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentIteration {
    /// Gain produced by this round.
    pub gain: DMatrix<f64>,
    pub theta: DVector<f64>,
    /// `‖K − K_ref‖_F` against the run's reference gain.
    pub gain_error: f64,
    pub pe: PeReport,
    /// `‖θ̂(M) − θ̂(0)‖` within the round.
    pub theta_delta: f64,
    pub updated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 1-based round index.
    pub k: usize,
    pub agents: Vec<AgentIteration>,
    /// `max_{i,j} ‖K_i − K_j‖_F` after the round.
    pub gain_spread: f64,
    /// Mean consensus gap over the round's `M` post-step states.
    pub consensus_gap_mean: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnRun {
    pub engine: Engine,
    pub num_agents: usize,
    pub state_dim: usize,
    pub input_dim: usize,
    /// Oracle optimum `−K*` in the `u = K x` convention.
    pub reference_gain: DMatrix<f64>,
    pub initial_gains: Vec<DMatrix<f64>>,
    pub iterations: Vec<IterationRecord>,
    pub converged: bool,
    /// Total RLS multiply-accumulates across all agents.
    pub rls_macs: u64,
    pub steps: u64,
    pub warnings: Vec<Warning>,
    pub trajectory: Vec<TrajectoryRow>,
    pub wall_time_s: f64,
}

impl LearnRun {
    pub fn final_gains(&self) -> Vec<DMatrix<f64>> {
        match self.iterations.last() {
            Some(rec) => rec.agents.iter().map(|a| a.gain.clone()).collect(),
            None => self.initial_gains.clone(),
        }
    }

    /// Largest final per-agent distance to the reference gain.
    pub fn final_gain_error(&self) -> f64 {
        self.final_gains()
            .iter()
            .map(|k| linalg::fro_distance(k, &self.reference_gain))
            .fold(0.0, f64::max)
    }

    pub fn final_gain_spread(&self) -> f64 {
        self.iterations.last().map_or(0.0, |r| r.gain_spread)
    }
}

/// `‖K_k^{(i)} − reference‖_F` for every round `k` and agent `i`, in the
/// order `(k, agent)`.
pub fn gain_error_series(run: &LearnRun, reference: &DMatrix<f64>) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for rec in &run.iterations {
        for (i, a) in rec.agents.iter().enumerate() {
            out.push((rec.k, i, linalg::fro_distance(&a.gain, reference)));
        }
    }
    out
}

/// `ξ_t` for agent `i`: its own stage cost plus `γ` times the coupling
/// penalty at `t+1`. `next_states` holds every agent's `x_{t+1}`.
pub fn agent_reward_target(
    w: &CostWeights,
    g: &InteractionGraph,
    agent: usize,
    x: &DVector<f64>,
    u: &DVector<f64>,
    next_states: &[DVector<f64>],
) -> Result<f64, LearnerError> {
    let own_next = next_states.get(agent).ok_or(LearnerError::MissingNeighbor {
        agent,
        neighbor: agent,
    })?;
    let mut coupling = 0.0;
    for &j in g.neighbors(agent) {
        let xj = next_states
            .get(j)
            .ok_or(LearnerError::MissingNeighbor { agent, neighbor: j })?;
        coupling += linalg::quad_form(w.qbar(), &(own_next - xj));
    }
    Ok(w.stage_cost(x, u) + w.gamma() * coupling)
}

fn stack(x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
    let mut z = DVector::zeros(x.len() + u.len());
    z.rows_mut(0, x.len()).copy_from(x);
    z.rows_mut(x.len(), u.len()).copy_from(u);
    z
}

/// `z̄(x, u) − γ z̄(x₊, K x₊)`.
fn regressor(
    x: &DVector<f64>,
    u: &DVector<f64>,
    x_next: &DVector<f64>,
    gain: &DMatrix<f64>,
    gamma: f64,
) -> DVector<f64> {
    let now = qfunction::quad_basis(&stack(x, u));
    let next = qfunction::quad_basis(&stack(x_next, &(gain * x_next)));
    now - next * gamma
}

/// Estimation state owned by one learning agent.
struct AgentLearner {
    rls: RlsEstimator,
    monitor: PeMonitor,
    gain: DMatrix<f64>,
    theta_start: DVector<f64>,
}

impl AgentLearner {
    fn new(theta: DVector<f64>, gain: DMatrix<f64>, cfg: &LearnerConfig) -> Result<Self, RlsError> {
        Ok(Self {
            theta_start: theta.clone(),
            rls: RlsEstimator::with_theta(theta, cfg.p0_scale)?,
            monitor: PeMonitor::new(cfg.samples_per_iteration),
            gain,
        })
    }

    fn begin_round(&mut self, p0_scale: f64) -> Result<(), RlsError> {
        self.rls.reset_covariance(p0_scale)?;
        self.monitor.clear();
        self.theta_start = self.rls.theta().clone();
        Ok(())
    }

    /// Feeds one sample; a lost covariance is reset and reported as `true`.
    fn observe(&mut self, phi: DVector<f64>, target: f64, p0_scale: f64) -> Result<bool, RlsError> {
        let reset = match self.rls.update(&phi, target) {
            Ok(_) => false,
            Err(RlsError::CovarianceLost) => {
                self.rls.reset_covariance(p0_scale)?;
                true
            }
            Err(e) => return Err(e),
        };
        self.monitor.push(phi);
        Ok(reset)
    }

    /// Policy improvement. Returns the gain change, or the `H₂₂` eigenvalue
    /// that blocked the update.
    fn end_round(
        &mut self,
        n: usize,
        m: usize,
        cfg: &LearnerConfig,
        reference: &DMatrix<f64>,
    ) -> Result<(AgentIteration, Result<f64, f64>), LearnerError> {
        let samples = cfg.samples_per_iteration;
        let pe = self.monitor.check(samples, cfg.pe_floor).unwrap_or(PeReport {
            alpha: 0.0,
            beta: 0.0,
            satisfied: false,
        });
        let theta = self.rls.theta().clone();
        let h = qfunction::theta_to_h(&QParamVector::new(theta.clone(), n, m)?);
        let outcome = match qfunction::gain_from_h(&h) {
            Ok(next) if next.iter().all(|v| v.is_finite()) => {
                let change = linalg::fro_distance(&next, &self.gain);
                self.gain = next;
                Ok(change)
            }
            Ok(_) => Err(f64::NAN),
            Err(QError::NotPositiveDefinite { min_eigenvalue }) => Err(min_eigenvalue),
            Err(e) => return Err(e.into()),
        };
        let record = AgentIteration {
            gain: self.gain.clone(),
            theta_delta: (&theta - &self.theta_start).norm(),
            theta,
            gain_error: linalg::fro_distance(&self.gain, reference),
            pe,
            updated: outcome.is_ok(),
        };
        Ok((record, outcome))
    }
}

fn gain_spread(gains: &[&DMatrix<f64>]) -> f64 {
    let mut spread = 0.0_f64;
    for i in 0..gains.len() {
        for j in (i + 1)..gains.len() {
            spread = spread.max(linalg::fro_distance(gains[i], gains[j]));
        }
    }
    spread
}

/// Shared set-up: validation, the oracle reference gain, initial gains,
/// learners and network.
struct Setup {
    n: usize,
    m: usize,
    reference: DMatrix<f64>,
    initial_gains: Vec<DMatrix<f64>>,
    learners: Vec<AgentLearner>,
    net: NetworkState,
}

fn prepare(
    model: &LtiModel,
    w: &CostWeights,
    num_agents: usize,
    cfg: &LearnerConfig,
) -> Result<Setup, LearnerError> {
    let (n, m) = (model.state_dim(), model.input_dim());
    w.check_against(model)?;
    cfg.validate(n, m, num_agents)?;
    if !controllability_check(model) {
        return Err(LearnerError::NotControllable);
    }
    let initial_gains = cfg
        .initial_gains
        .clone()
        .unwrap_or_else(|| alloc::vec![DMatrix::zeros(m, n); num_agents]);
    for (agent, k0) in initial_gains.iter().enumerate() {
        let spectral_radius = riccati::closed_loop_spectral_radius(model, k0);
        if !(spectral_radius < 1.0) {
            return Err(LearnerError::NotStabilizing {
                agent,
                spectral_radius,
            });
        }
    }
    let reference = riccati::solve_dare(model, w)?.feedback_gain();
    let q = param_count(n, m);
    let mut learners = Vec::with_capacity(num_agents);
    for (agent, k0) in initial_gains.iter().enumerate() {
        let theta = cfg
            .initial_theta
            .as_ref()
            .map_or_else(|| DVector::zeros(q), |t| t[agent].clone());
        learners.push(AgentLearner::new(theta, k0.clone(), cfg).map_err(|source| LearnerError::Rls { agent, source })?);
    }
    let states = match &cfg.initial_states {
        InitialStates::Random { std } => sim::random_initial_states(cfg.excitation.seed, num_agents, n, *std),
        InitialStates::Given(xs) => xs.clone(),
    };
    Ok(Setup {
        n,
        m,
        reference,
        initial_gains,
        learners,
        net: NetworkState::new(states).with_blowup_bound(cfg.blowup_bound),
    })
}

pub fn distributed_policy_iteration_timed(
    model: &LtiModel,
    w: &CostWeights,
    graph: &InteractionGraph,
    cfg: &LearnerConfig,
    clock: &dyn Clock,
) -> Result<LearnRun, LearnerError> {
    let started = clock.now();
    let num_agents = graph.num_agents();
    let Setup {
        n,
        m,
        reference,
        initial_gains,
        mut learners,
        mut net,
    } = prepare(model, w, num_agents, cfg)?;
    let gamma = w.gamma();
    let mut iterations = Vec::new();
    let mut warnings = Vec::new();
    let mut trajectory = Vec::new();
    let mut converged = false;

    for k in 1..=cfg.max_iterations {
        let round_start = clock.now();
        for (agent, l) in learners.iter_mut().enumerate() {
            l.begin_round(cfg.p0_scale)
                .map_err(|source| LearnerError::Rls { agent, source })?;
        }
        let mut gap_sum = 0.0;
        for _ in 0..cfg.samples_per_iteration {
            let t = net.t();
            let noise = sim::draw_excitation(&cfg.excitation, t, m, num_agents)?;
            let inputs: Vec<DVector<f64>> = learners
                .iter()
                .zip(net.states())
                .zip(&noise)
                .map(|((l, x), e)| &l.gain * x + e)
                .collect();
            let current: Vec<DVector<f64>> = net.states().to_vec();
            net.step(model, &inputs)?;
            gap_sum += net.consensus_gap();
            if cfg.record_trajectory {
                for (agent, (x, u)) in current.iter().zip(&inputs).enumerate() {
                    trajectory.push(TrajectoryRow {
                        t,
                        agent,
                        x: x.clone(),
                        u: u.clone(),
                    });
                }
            }
            for (agent, l) in learners.iter_mut().enumerate() {
                let (x, u) = (&current[agent], &inputs[agent]);
                let target = agent_reward_target(w, graph, agent, x, u, net.states())?;
                let phi = regressor(x, u, net.state(agent), &l.gain, gamma);
                let reset = l
                    .observe(phi, target, cfg.p0_scale)
                    .map_err(|source| LearnerError::Rls { agent, source })?;
                if reset {
                    warnings.push(Warning::CovarianceReset { k, agent, t });
                }
            }
        }

        let mut agents = Vec::with_capacity(num_agents);
        let mut all_settled = true;
        for (agent, l) in learners.iter_mut().enumerate() {
            let (record, outcome) = l.end_round(n, m, cfg, &reference)?;
            if !record.pe.satisfied {
                warnings.push(Warning::WeakExcitation {
                    k,
                    agent,
                    alpha: record.pe.alpha,
                });
            }
            match outcome {
                Ok(change) => all_settled &= change < cfg.stop_tol,
                Err(min_eigenvalue) => {
                    all_settled = false;
                    warnings.push(Warning::SkippedUpdate { k, agent, min_eigenvalue });
                }
            }
            agents.push(record);
        }
        let gains: Vec<&DMatrix<f64>> = agents.iter().map(|a| &a.gain).collect();
        iterations.push(IterationRecord {
            k,
            gain_spread: gain_spread(&gains),
            consensus_gap_mean: gap_sum / cfg.samples_per_iteration as f64,
            agents,
            wall_time_s: clock.now() - round_start,
        });
        if all_settled {
            converged = true;
            break;
        }
    }

    Ok(LearnRun {
        engine: Engine::Distributed,
        num_agents,
        state_dim: n,
        input_dim: m,
        reference_gain: reference,
        initial_gains,
        iterations,
        converged,
        rls_macs: learners.iter().map(|l| l.rls.macs()).sum(),
        steps: net.t(),
        warnings,
        trajectory,
        wall_time_s: clock.now() - started,
    })
}

/// Single-agent Q-learning policy iteration on `(model, w)`. For a stacked
/// network problem pass the assembled global model and weights.
pub fn centralized_policy_iteration(
    model: &LtiModel,
    w: &CostWeights,
    cfg: &LearnerConfig,
) -> Result<LearnRun, LearnerError> {
    centralized_policy_iteration_timed(model, w, cfg, &NoClock)
}

pub fn centralized_policy_iteration_timed(
    model: &LtiModel,
    w: &CostWeights,
    cfg: &LearnerConfig,
    clock: &dyn Clock,
) -> Result<LearnRun, LearnerError> {
    let started = clock.now();
    let Setup {
        n,
        m,
        reference,
        initial_gains,
        mut learners,
        mut net,
    } = prepare(model, w, 1, cfg)?;
    let learner = &mut learners[0];
    let gamma = w.gamma();
    let rls_err = |source| LearnerError::Rls { agent: 0, source };
    let mut iterations = Vec::new();
    let mut warnings = Vec::new();
    let mut trajectory = Vec::new();
    let mut converged = false;

    for k in 1..=cfg.max_iterations {
        let round_start = clock.now();
        learner.begin_round(cfg.p0_scale).map_err(rls_err)?;
        for _ in 0..cfg.samples_per_iteration {
            let t = net.t();
            let e = sim::draw_excitation(&cfg.excitation, t, m, 1)?.swap_remove(0);
            let x = net.state(0).clone();
            let u = &learner.gain * &x + e;
            net.step(model, core::slice::from_ref(&u))?;
            let target = w.stage_cost(&x, &u);
            let phi = regressor(&x, &u, net.state(0), &learner.gain, gamma);
            if cfg.record_trajectory {
                trajectory.push(TrajectoryRow { t, agent: 0, x, u });
            }
            if learner.observe(phi, target, cfg.p0_scale).map_err(rls_err)? {
                warnings.push(Warning::CovarianceReset { k, agent: 0, t });
            }
        }
        let (record, outcome) = learner.end_round(n, m, cfg, &reference)?;
        if !record.pe.satisfied {
            warnings.push(Warning::WeakExcitation {
                k,
                agent: 0,
                alpha: record.pe.alpha,
            });
        }
        let settled = match outcome {
            Ok(change) => change < cfg.stop_tol,
            Err(min_eigenvalue) => {
                warnings.push(Warning::SkippedUpdate {
                    k,
                    agent: 0,
                    min_eigenvalue,
                });
                false
            }
        };
        iterations.push(IterationRecord {
            k,
            agents: alloc::vec![record],
            gain_spread: 0.0,
            consensus_gap_mean: 0.0,
            wall_time_s: clock.now() - round_start,
        });
        if settled {
            converged = true;
            break;
        }
    }

    Ok(LearnRun {
        engine: Engine::Centralized,
        num_agents: 1,
        state_dim: n,
        input_dim: m,
        reference_gain: reference,
        initial_gains,
        iterations,
        converged,
        rls_macs: learner.rls.macs(),
        steps: net.t(),
        warnings,
        trajectory,
        wall_time_s: clock.now() - started,
    })
}

/// Distributed policy iteration: one learner per graph node, shared clock
/// and (by default) shared excitation.
pub fn distributed_policy_iteration(
    model: &LtiModel,
    w: &CostWeights,
    g: &InteractionGraph,
    cfg: &LearnerConfig,
) -> Result<LearnRun, LearnerError> {
    distributed_policy_iteration_timed(model, w, g, cfg, &NoClock)
}

/// Packed `θ*` of the true Q-function at the Riccati solution.
pub fn optimal_theta(model: &LtiModel, w: &CostWeights) -> Result<DVector<f64>, LearnerError> {
    let sol = riccati::solve_dare(model, w)?;
    Ok(qfunction::h_to_theta(&qfunction::true_h(model, w, &sol.p)).into_inner())
}
