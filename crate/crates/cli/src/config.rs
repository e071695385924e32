//! JSON experiment configuration and its validation into a runnable
//! [`Scenario`].

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use dql_core::learner::{InitialStates, LearnerConfig, LearnerError};
use dql_core::model::{controllability_check, CostWeights, InteractionGraph, LtiModel};
use dql_core::qfunction::param_count;
use dql_core::sim::ExcitationConfig;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::edgelist;
use crate::generate::{self, DEFAULT_SPECTRAL_RADIUS};

/// Row-major nested arrays, e.g. `[[0.9, 0.1], [0.0, 0.8]]`.
pub type Rows = Vec<Vec<f64>>;

pub const DEFAULT_MAX_CENTRAL_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSpec,
    #[serde(default)]
    pub weights: WeightSpec,
    pub graph: GraphSpec,
    #[serde(default)]
    pub learner: LearnerSpec,
    #[serde(default)]
    pub mode: Mode,
    /// Drives the excitation and the random initial states.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Also write `trajectories.csv`.
    #[serde(default)]
    pub trajectories: bool,
    #[serde(default)]
    pub bench: BenchSpec,
}

fn default_out() -> PathBuf {
    PathBuf::from("dql-out")
}

/// Agent dynamics: either inline `a`/`b` or a generator seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub n: usize,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral_radius: Option<f64>,
}

/// Missing `q` / `r` default to identities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Rows>,
    #[serde(default = "one")]
    pub gamma: f64,
}

impl Default for WeightSpec {
    fn default() -> Self {
        Self {
            q: None,
            r: None,
            gamma: 1.0,
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GraphSpec {
    Path { agents: usize },
    Cycle { agents: usize },
    Complete { agents: usize },
    /// Agent 0 is the hub.
    Star { agents: usize },
    Edgeless { agents: usize },
    Edges { agents: usize, edges: Vec<[usize; 2]> },
    /// Edge-list file, relative to the working directory.
    File {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        agents: Option<usize>,
    },
}

impl GraphSpec {
    pub fn build(&self) -> Result<InteractionGraph, String> {
        let g = match self {
            GraphSpec::Path { agents } => InteractionGraph::path(*agents),
            GraphSpec::Cycle { agents } => InteractionGraph::cycle(*agents),
            GraphSpec::Complete { agents } => InteractionGraph::complete(*agents),
            GraphSpec::Star { agents } => InteractionGraph::star(*agents),
            GraphSpec::Edgeless { agents } => InteractionGraph::edgeless(*agents),
            GraphSpec::Edges { agents, edges } => {
                let pairs: Vec<(usize, usize)> = edges.iter().map(|e| (e[0], e[1])).collect();
                InteractionGraph::new(*agents, &pairs)
            }
            GraphSpec::File { path, agents } => {
                return edgelist::read_edge_list(path, *agents).map_err(|e| e.to_string());
            }
        };
        g.map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSpec {
    /// `M`; defaults to three times the per-agent parameter count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_per_iteration: Option<usize>,
    /// `M` for the stacked centralized learner; defaults to
    /// `samples_per_iteration` when that covers the stacked parameter
    /// count, otherwise three times that count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub central_samples_per_iteration: Option<usize>,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_p0")]
    pub p0_scale: f64,
    #[serde(default = "one")]
    pub excitation_std: f64,
    #[serde(default = "yes")]
    pub shared_excitation: bool,
    #[serde(default = "default_stop_tol")]
    pub stop_tol: f64,
    #[serde(default = "default_pe_floor")]
    pub pe_floor: f64,
    #[serde(default = "one")]
    pub initial_state_std: f64,
    /// One row per agent; overrides `initial_state_std`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_states: Option<Rows>,
    /// Shared starting gain `K₀` (`m × n`, policy `u = K x`); zero if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_gain: Option<Rows>,
}

fn default_max_iterations() -> usize {
    dql_core::learner::DEFAULT_MAX_ITERATIONS
}
fn default_p0() -> f64 {
    dql_core::rls::DEFAULT_P0_SCALE
}
fn default_stop_tol() -> f64 {
    dql_core::learner::DEFAULT_STOP_TOL
}
fn default_pe_floor() -> f64 {
    dql_core::rls::DEFAULT_PE_FLOOR
}
fn yes() -> bool {
    true
}

impl Default for LearnerSpec {
    fn default() -> Self {
        Self {
            samples_per_iteration: None,
            central_samples_per_iteration: None,
            max_iterations: default_max_iterations(),
            p0_scale: default_p0(),
            excitation_std: 1.0,
            shared_excitation: true,
            stop_tol: default_stop_tol(),
            pe_floor: default_pe_floor(),
            initial_state_std: 1.0,
            initial_states: None,
            initial_gain: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Distributed,
    Centralized,
    Both,
    Bench,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "distributed" => Ok(Mode::Distributed),
            "centralized" => Ok(Mode::Centralized),
            "both" => Ok(Mode::Both),
            "bench" => Ok(Mode::Bench),
            other => Err(format!(
                "unknown mode {other:?} (expected distributed, centralized, both or bench)"
            )),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Distributed => "distributed",
            Mode::Centralized => "centralized",
            Mode::Both => "both",
            Mode::Bench => "bench",
        })
    }
}

/// Operation-count and wall-time benchmark settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    #[serde(default = "default_bench_agents")]
    pub agents: Vec<usize>,
    /// `M` per entry of `agents`; empty means the learner's `M` throughout.
    #[serde(default)]
    pub samples: Vec<usize>,
    /// Rounds counted per scenario.
    #[serde(default = "default_bench_iterations")]
    pub iterations: usize,
    /// Largest stacked dimension `N(n+m)` for which the centralized learner
    /// is actually run.
    #[serde(default = "default_cap")]
    pub max_central_dim: usize,
}

fn default_bench_agents() -> Vec<usize> {
    vec![2, 3, 5, 8, 100]
}
fn default_bench_iterations() -> usize {
    10
}
fn default_cap() -> usize {
    DEFAULT_MAX_CENTRAL_DIM
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            agents: default_bench_agents(),
            samples: Vec::new(),
            iterations: default_bench_iterations(),
            max_central_dim: default_cap(),
        }
    }
}

/// Every violated field, one entry each.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub issues: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration:")?;
        for issue in &self.issues {
            writeln!(f, "  - {issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    fn single(issue: String) -> Self {
        Self { issues: vec![issue] }
    }
}

/// A validated configuration with every model object built.
#[derive(Debug, Clone)]
pub struct Scenario {
    /// The configuration as given (after flag overrides); echoed into the summary.
    pub config: ExperimentConfig,
    pub model: LtiModel,
    pub weights: CostWeights,
    pub graph: InteractionGraph,
    pub learner: LearnerConfig,
    pub central_samples: usize,
}

impl Scenario {
    pub fn num_agents(&self) -> usize {
        self.graph.num_agents()
    }

    /// `N(n+m)`, the stacked problem's `z` dimension.
    pub fn central_dim(&self) -> usize {
        self.num_agents() * (self.model.state_dim() + self.model.input_dim())
    }

    /// `M` for `N` agents in bench mode.
    pub fn bench_samples(&self, index: usize) -> usize {
        self.config
            .bench
            .samples
            .get(index)
            .copied()
            .unwrap_or(self.learner.samples_per_iteration)
    }
}

fn matrix(rows: &Rows, nrows: usize, ncols: usize, field: &str, issues: &mut Vec<String>) -> Option<DMatrix<f64>> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        let found: Vec<usize> = rows.iter().map(Vec::len).collect();
        issues.push(format!("{field}: expected {nrows}x{ncols}, found rows of lengths {found:?}"));
        return None;
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        issues.push(format!("{field}: contains non-finite entries"));
        return None;
    }
    Some(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn to_rows(m: &DMatrix<f64>) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::single(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::single(format!("config: cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration always serializes")
    }

    /// Validates every field and builds the model objects. All problems are
    /// collected before returning.
    pub fn resolve(&self) -> Result<Scenario, ConfigError> {
        let mut issues = Vec::new();
        let (n, m) = (self.system.n, self.system.m);
        if n == 0 {
            issues.push("system.n: must be at least 1".to_string());
        }
        if m == 0 {
            issues.push("system.m: must be at least 1".to_string());
        }
        let dims_ok = n > 0 && m > 0;

        let model = if dims_ok { self.resolve_system(&mut issues) } else { None };
        let weights = if dims_ok { self.resolve_weights(&mut issues) } else { None };
        let graph = match self.graph.build() {
            Ok(g) => Some(g),
            Err(e) => {
                issues.push(format!("graph: {e}"));
                None
            }
        };

        let learner = match (&model, &graph) {
            (Some(_), Some(g)) => self.resolve_learner(n, m, g.num_agents(), &mut issues),
            _ => None,
        };

        let central_samples = graph.as_ref().map(|g| self.central_samples(g.num_agents(), n, m));
        if let (Some(g), Some(cs)) = (&graph, central_samples) {
            let central_dim = g.num_agents() * (n + m);
            let cap = self.bench.max_central_dim;
            if self.mode == Mode::Centralized && central_dim > cap {
                issues.push(format!(
                    "bench.max_central_dim: stacked dimension {central_dim} exceeds the cap {cap}"
                ));
            }
            let qc = param_count(g.num_agents() * n, g.num_agents() * m);
            if cs < qc && matches!(self.mode, Mode::Centralized | Mode::Both) {
                issues.push(format!(
                    "learner.central_samples_per_iteration: {cs} is below the stacked parameter count {qc}"
                ));
            }
        }
        self.check_bench(&mut issues);

        match (issues.is_empty(), model, weights, graph, learner, central_samples) {
            (true, Some(model), Some(weights), Some(graph), Some(learner), Some(central_samples)) => Ok(Scenario {
                config: self.clone(),
                model,
                weights,
                graph,
                learner,
                central_samples,
            }),
            _ => Err(ConfigError { issues }),
        }
    }

    fn resolve_system(&self, issues: &mut Vec<String>) -> Option<LtiModel> {
        let s = &self.system;
        let (a, b) = match (&s.a, &s.b, s.generator_seed) {
            (Some(a), Some(b), None) => {
                if s.spectral_radius.is_some() {
                    issues.push("system.spectral_radius: only used with generator_seed".to_string());
                }
                let a = matrix(a, s.n, s.n, "system.a", issues);
                let b = matrix(b, s.n, s.m, "system.b", issues);
                (a?, b?)
            }
            (None, None, Some(seed)) => {
                let target = s.spectral_radius.unwrap_or(DEFAULT_SPECTRAL_RADIUS);
                match generate::generate_system(seed, s.n, s.m, target) {
                    Ok(pair) => pair,
                    Err(e) => {
                        issues.push(format!("system: {e}"));
                        return None;
                    }
                }
            }
            _ => {
                issues.push("system: give either both a and b, or generator_seed".to_string());
                return None;
            }
        };
        let model = match LtiModel::new(a, b) {
            Ok(model) => model,
            Err(e) => {
                issues.push(format!("system: {e}"));
                return None;
            }
        };
        if !controllability_check(&model) {
            issues.push("system: (A, B) is not controllable".to_string());
        }
        Some(model)
    }

    fn resolve_weights(&self, issues: &mut Vec<String>) -> Option<CostWeights> {
        let (n, m) = (self.system.n, self.system.m);
        let w = &self.weights;
        let q = match &w.q {
            Some(rows) => matrix(rows, n, n, "weights.q", issues),
            None => Some(DMatrix::identity(n, n)),
        };
        let r = match &w.r {
            Some(rows) => matrix(rows, m, m, "weights.r", issues),
            None => Some(DMatrix::identity(m, m)),
        };
        match CostWeights::new(q?, r?, w.gamma) {
            Ok(w) => Some(w),
            Err(e) => {
                issues.push(format!("weights: {e}"));
                None
            }
        }
    }

    fn resolve_learner(&self, n: usize, m: usize, num_agents: usize, issues: &mut Vec<String>) -> Option<LearnerConfig> {
        let spec = &self.learner;
        let mut cfg = LearnerConfig::for_dims(n, m);
        if let Some(samples) = spec.samples_per_iteration {
            cfg.samples_per_iteration = samples;
        }
        cfg.max_iterations = spec.max_iterations;
        cfg.p0_scale = spec.p0_scale;
        cfg.stop_tol = spec.stop_tol;
        cfg.pe_floor = spec.pe_floor;
        cfg.excitation = ExcitationConfig {
            std: spec.excitation_std,
            shared_across_agents: spec.shared_excitation,
            seed: self.seed,
            ..ExcitationConfig::default()
        };
        cfg.record_trajectory = self.trajectories;
        cfg.initial_states = match &spec.initial_states {
            Some(rows) => {
                let states = matrix(rows, num_agents, n, "learner.initial_states", issues)?;
                InitialStates::Given(states.row_iter().map(|r| r.transpose()).collect::<Vec<DVector<f64>>>())
            }
            None => InitialStates::Random {
                std: spec.initial_state_std,
            },
        };
        if let Some(rows) = &spec.initial_gain {
            let k0 = matrix(rows, m, n, "learner.initial_gain", issues)?;
            cfg.initial_gains = Some(vec![k0; num_agents]);
        }
        if let Err(LearnerError::InvalidConfig(found)) = cfg.validate(n, m, num_agents) {
            for issue in found.0 {
                issues.push(format!("learner.{}: {}", learner_field(issue.field), issue.reason));
            }
            return None;
        }
        Some(cfg)
    }

    fn central_samples(&self, num_agents: usize, n: usize, m: usize) -> usize {
        if let Some(cs) = self.learner.central_samples_per_iteration {
            return cs;
        }
        let qc = param_count(num_agents * n, num_agents * m);
        let local = self.learner.samples_per_iteration.unwrap_or(3 * param_count(n, m));
        if local >= qc {
            local
        } else {
            3 * qc
        }
    }

    fn check_bench(&self, issues: &mut Vec<String>) {
        let b = &self.bench;
        if self.mode != Mode::Bench {
            return;
        }
        if b.agents.is_empty() {
            issues.push("bench.agents: must list at least one agent count".to_string());
        }
        if b.agents.contains(&0) {
            issues.push("bench.agents: agent counts must be at least 1".to_string());
        }
        if !b.samples.is_empty() && b.samples.len() != b.agents.len() {
            issues.push(format!(
                "bench.samples: {} entries for {} agent counts",
                b.samples.len(),
                b.agents.len()
            ));
        }
        if b.samples.contains(&0) {
            issues.push("bench.samples: must be at least 1".to_string());
        }
        if b.iterations == 0 {
            issues.push("bench.iterations: must be at least 1".to_string());
        }
    }
}

/// Maps core field names onto this file format's names.
fn learner_field(core: &str) -> &str {
    match core {
        "excitation.std" => "excitation_std",
        "initial_gains" => "initial_gain",
        "initial_states.std" => "initial_state_std",
        other => other,
    }
}
