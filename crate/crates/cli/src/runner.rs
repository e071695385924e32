//! Executes a [`Scenario`]: distributed and stacked centralized learning,
//! operation-count benchmarks and wall-time comparison.

use std::path::PathBuf;
use std::time::Instant;

use dql_core::bench::{saving_report, OpCountReport};
use dql_core::learner::{
    centralized_policy_iteration_timed, distributed_policy_iteration_timed, Clock, Engine, InitialStates, LearnRun,
    LearnerConfig, LearnerError,
};
use dql_core::model::{assemble_global, CostWeights, InteractionGraph, LtiModel, ModelError};
use dql_core::qfunction::param_count;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::config::{ConfigError, Mode, Scenario};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("missing artifact {0}")]
    MissingArtifact(PathBuf),
}

/// Anything that can end a CLI invocation early.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Run(#[from] RunError),
}

impl CliError {
    /// `2` for configuration problems, `3` for failures during a run.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(_) => 3,
        }
    }
}

/// Wall clock measured from construction.
#[derive(Debug, Clone, Copy)]
pub struct StdClock {
    origin: Instant,
}

impl StdClock {
    pub fn start() -> Self {
        Self { origin: Instant::now() }
    }
}

impl Default for StdClock {
    fn default() -> Self {
        Self::start()
    }
}

impl Clock for StdClock {
    fn now(&self) -> f64 {
        self.origin.elapsed().as_secs_f64()
    }
}

/// The stacked problem `(I⊗A, I⊗B, (L+I)⊗Qbar, I⊗Rbar)` with a learner
/// configuration translated to it: block-diagonal starting gain and
/// concatenated initial states.
pub fn stacked_problem(
    model: &LtiModel,
    w: &CostWeights,
    g: &InteractionGraph,
    cfg: &LearnerConfig,
    central_samples: usize,
) -> Result<(LtiModel, CostWeights, LearnerConfig), ModelError> {
    let problem = assemble_global(model, w, g)?;
    let (central_model, central_w) = problem.as_single_agent(w.gamma())?;
    let (n, m, count) = (model.state_dim(), model.input_dim(), g.num_agents());
    let mut central = cfg.clone();
    central.samples_per_iteration = central_samples;
    central.initial_theta = None;
    central.initial_gains = cfg.initial_gains.as_ref().map(|gains| {
        let mut k = DMatrix::zeros(count * m, count * n);
        for (i, gi) in gains.iter().enumerate() {
            k.view_mut((i * m, i * n), (m, n)).copy_from(gi);
        }
        vec![k]
    });
    if let InitialStates::Given(xs) = &cfg.initial_states {
        let stacked = DVector::from_iterator(count * n, xs.iter().flat_map(|x| x.iter().copied()));
        central.initial_states = InitialStates::Given(vec![stacked]);
    }
    Ok((central_model, central_w, central))
}

/// Default centralized `M`: the per-agent `M` when it already covers the
/// stacked parameter count, otherwise three times that count.
pub fn default_central_samples(samples: usize, num_agents: usize, n: usize, m: usize) -> usize {
    let qc = param_count(num_agents * n, num_agents * m);
    if samples >= qc {
        samples
    } else {
        3 * qc
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Timing {
    pub engine: Engine,
    pub iterations: usize,
    pub converged: bool,
    pub total_s: f64,
    pub per_iteration_s: f64,
    pub rls_macs: u64,
}

impl Timing {
    fn of(run: &LearnRun) -> Self {
        let iterations = run.iterations.len();
        Self {
            engine: run.engine,
            iterations,
            converged: run.converged,
            total_s: run.wall_time_s,
            per_iteration_s: run.wall_time_s / iterations.max(1) as f64,
            rls_macs: run.rls_macs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WallTimeReport {
    pub num_agents: usize,
    /// `N(n+m)`.
    pub central_dim: usize,
    pub distributed: Timing,
    /// `None` when the stacked dimension exceeds the cap.
    pub centralized: Option<Timing>,
    pub notice: Option<String>,
}

/// Runs both engines on one scenario and seed, one after the other, and
/// reports their wall times. Timings are informative only.
pub fn wall_time_comparison(
    model: &LtiModel,
    w: &CostWeights,
    g: &InteractionGraph,
    cfg: &LearnerConfig,
    central_samples: usize,
    max_central_dim: usize,
) -> Result<WallTimeReport, RunError> {
    let num_agents = g.num_agents();
    let central_dim = num_agents * (model.state_dim() + model.input_dim());
    let dist = distributed_policy_iteration_timed(model, w, g, cfg, &StdClock::start())?;
    let (centralized, notice) = if central_dim <= max_central_dim {
        let (cm, cw, ccfg) = stacked_problem(model, w, g, cfg, central_samples)?;
        let run = centralized_policy_iteration_timed(&cm, &cw, &ccfg, &StdClock::start())?;
        (Some(Timing::of(&run)), None)
    } else {
        (
            None,
            Some(format!(
                "N={num_agents}: centralized learner skipped (stacked dimension {central_dim} exceeds cap {max_central_dim})"
            )),
        )
    };
    Ok(WallTimeReport {
        num_agents,
        central_dim,
        distributed: Timing::of(&dist),
        centralized,
        notice,
    })
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub distributed: Option<LearnRun>,
    pub centralized: Option<LearnRun>,
    pub bench: Vec<OpCountReport>,
    pub wall_times: Vec<WallTimeReport>,
    pub notices: Vec<String>,
}

fn run_centralized(s: &Scenario) -> Result<LearnRun, RunError> {
    let (cm, cw, ccfg) = stacked_problem(&s.model, &s.weights, &s.graph, &s.learner, s.central_samples)?;
    Ok(centralized_policy_iteration_timed(&cm, &cw, &ccfg, &StdClock::start())?)
}

/// Runs the scenario's mode without touching the file system.
pub fn execute(s: &Scenario) -> Result<Outcome, RunError> {
    let mut out = Outcome::default();
    let cap = s.config.bench.max_central_dim;
    match s.config.mode {
        Mode::Distributed => {
            out.distributed = Some(distributed_policy_iteration_timed(
                &s.model,
                &s.weights,
                &s.graph,
                &s.learner,
                &StdClock::start(),
            )?);
        }
        Mode::Centralized => out.centralized = Some(run_centralized(s)?),
        Mode::Both => {
            out.distributed = Some(distributed_policy_iteration_timed(
                &s.model,
                &s.weights,
                &s.graph,
                &s.learner,
                &StdClock::start(),
            )?);
            if s.central_dim() <= cap {
                out.centralized = Some(run_centralized(s)?);
            } else {
                out.notices.push(format!(
                    "centralized learner skipped (stacked dimension {} exceeds cap {cap})",
                    s.central_dim()
                ));
            }
        }
        Mode::Bench => bench(s, &mut out)?,
    }
    Ok(out)
}

fn bench(s: &Scenario, out: &mut Outcome) -> Result<(), RunError> {
    let (n, m) = (s.model.state_dim(), s.model.input_dim());
    let b = &s.config.bench;
    for (i, &count) in b.agents.iter().enumerate() {
        let samples = s.bench_samples(i);
        out.bench.push(saving_report(count, n, m, samples, b.iterations));

        let central_dim = count * (n + m);
        if central_dim > b.max_central_dim {
            out.notices.push(format!(
                "N={count}: wall-time comparison skipped (stacked dimension {central_dim} exceeds cap {})",
                b.max_central_dim
            ));
            continue;
        }
        let g = InteractionGraph::path(count)?;
        let mut cfg = s.learner.clone();
        cfg.samples_per_iteration = samples;
        cfg.record_trajectory = false;
        cfg.initial_gains = cfg.initial_gains.map(|gains| vec![gains[0].clone(); count]);
        if let InitialStates::Given(_) = cfg.initial_states {
            cfg.initial_states = InitialStates::Random { std: 1.0 };
        }
        let central_samples = default_central_samples(samples, count, n, m);
        let report = wall_time_comparison(&s.model, &s.weights, &g, &cfg, central_samples, b.max_central_dim)?;
        out.wall_times.push(report);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use dql_core::linalg;

    fn scalar() -> (LtiModel, CostWeights) {
        (LtiModel::scalar(0.9, 1.0).unwrap(), CostWeights::scalar(1.0, 1.0, 1.0).unwrap())
    }

    #[test]
    fn stacking_one_agent_changes_nothing() {
        let (model, w) = scalar();
        let g = InteractionGraph::edgeless(1).unwrap();
        let cfg = LearnerConfig::for_dims(1, 1);
        let (cm, cw, ccfg) = stacked_problem(&model, &w, &g, &cfg, cfg.samples_per_iteration).unwrap();
        assert_eq!(cm, model);
        assert_eq!(cw, w);
        assert_eq!(ccfg, cfg);
    }

    #[test]
    fn stacked_gain_and_states_are_block_structured() {
        let (model, w) = scalar();
        let g = InteractionGraph::path(2).unwrap();
        let mut cfg = LearnerConfig::for_dims(1, 1);
        cfg.initial_gains = Some(vec![DMatrix::from_element(1, 1, -0.1), DMatrix::from_element(1, 1, -0.2)]);
        cfg.initial_states = InitialStates::Given(vec![DVector::from_element(1, 1.0), DVector::from_element(1, 2.0)]);
        let (cm, _, ccfg) = stacked_problem(&model, &w, &g, &cfg, 30).unwrap();
        assert_eq!(cm.state_dim(), 2);
        let k = &ccfg.initial_gains.unwrap()[0];
        assert_eq!(k, &DMatrix::from_row_slice(2, 2, &[-0.1, 0.0, 0.0, -0.2]));
        assert_eq!(ccfg.initial_states, InitialStates::Given(vec![DVector::from_row_slice(&[1.0, 2.0])]));
        assert_eq!(ccfg.samples_per_iteration, 30);
    }

    #[test]
    fn central_sample_default() {
        assert_eq!(default_central_samples(50, 1, 5, 3), 50);
        assert_eq!(default_central_samples(50, 2, 5, 3), 3 * 136);
    }

    #[test]
    fn single_agent_wall_time_runs_identical_work() {
        let (model, w) = scalar();
        let g = InteractionGraph::edgeless(1).unwrap();
        let cfg = LearnerConfig::for_dims(1, 1);
        let r = wall_time_comparison(&model, &w, &g, &cfg, cfg.samples_per_iteration, 16).unwrap();
        let c = r.centralized.unwrap();
        assert_eq!(c.rls_macs, r.distributed.rls_macs);
        assert_eq!(c.iterations, r.distributed.iterations);
    }

    #[test]
    fn four_scalar_agents_spend_fewer_operations() {
        let (model, w) = scalar();
        let g = InteractionGraph::path(4).unwrap();
        let mut cfg = LearnerConfig::for_dims(1, 1);
        cfg.max_iterations = 3;
        cfg.stop_tol = 1e-300;
        let central_samples = default_central_samples(cfg.samples_per_iteration, 4, 1, 1);
        let r = wall_time_comparison(&model, &w, &g, &cfg, central_samples, 16).unwrap();
        let c = r.centralized.unwrap();
        let counted = saving_report(4, 1, 1, cfg.samples_per_iteration, 3);
        assert_eq!(r.distributed.rls_macs, counted.distributed_ops);
        // the stacked learner needs more samples per round, so scale to equal M
        let per_sample_central = c.rls_macs as f64 / (c.iterations * central_samples) as f64;
        let per_sample_dist = r.distributed.rls_macs as f64 / (r.distributed.iterations * cfg.samples_per_iteration) as f64;
        let measured = 100.0 * (1.0 - per_sample_dist / per_sample_central);
        assert!((measured - counted.measured_saving_pct).abs() < 1e-9);
    }

    #[test]
    fn stacked_learner_matches_stacked_riccati() {
        let (model, w) = scalar();
        let g = InteractionGraph::path(2).unwrap();
        let cfg = LearnerConfig::for_dims(1, 1);
        let samples = default_central_samples(cfg.samples_per_iteration, 2, 1, 1);
        let (cm, cw, ccfg) = stacked_problem(&model, &w, &g, &cfg, samples).unwrap();
        let run = centralized_policy_iteration_timed(&cm, &cw, &ccfg, &StdClock::start()).unwrap();
        let oracle = dql_core::riccati::solve_dare(&cm, &cw).unwrap().feedback_gain();
        assert!(linalg::fro_distance(&run.final_gains()[0], &oracle) < 1e-4);
    }
}
