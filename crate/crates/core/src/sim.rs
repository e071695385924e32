//! Seeded simulation of a network of identical, decoupled LTI agents.

use alloc::vec::Vec;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use thiserror::Error;

use crate::model::{InteractionGraph, LtiModel};

pub const DEFAULT_BLOWUP_BOUND: f64 = 1e12;

/// Stream reserved for initial states; excitation at step `t` uses stream `t`.
const INITIAL_STATE_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("instability detected: agent {agent} at step {step} reached ‖x‖ = {norm:e}")]
    Instability { agent: usize, step: u64, norm: f64 },
    #[error("expected {expected} input vectors of length {len}, got {found}")]
    InputShape {
        expected: usize,
        len: usize,
        found: usize,
    },
    #[error("non-finite state or input for agent {0}")]
    NonFinite(usize),
    #[error("excitation std must be positive, got {0}")]
    InvalidStd(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExcitationKind {
    Gaussian,
}

/// Exploration noise added to the feedback action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcitationConfig {
    pub kind: ExcitationKind,
    pub std: f64,
    /// Every agent receives the same realization at a given step.
    pub shared_across_agents: bool,
    pub seed: u64,
}

impl Default for ExcitationConfig {
    fn default() -> Self {
        Self {
            kind: ExcitationKind::Gaussian,
            std: 1.0,
            shared_across_agents: true,
            seed: 0,
        }
    }
}

impl ExcitationConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.std > 0.0 && self.std.is_finite()) {
            return Err(SimError::InvalidStd(self.std));
        }
        Ok(())
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Excitation for every agent at step `t`. The result depends only on
/// `(cfg, t, m, num_agents)`; in shared mode all entries are identical and
/// do not depend on `num_agents`.
pub fn draw_excitation(
    cfg: &ExcitationConfig,
    t: u64,
    m: usize,
    num_agents: usize,
) -> Result<Vec<DVector<f64>>, SimError> {
    cfg.validate()?;
    let normal = Normal::new(0.0, cfg.std).map_err(|_| SimError::InvalidStd(cfg.std))?;
    let mut rng = stream_rng(cfg.seed, t);
    let mut draw = || DVector::from_fn(m, |_, _| normal.sample(&mut rng));
    if cfg.shared_across_agents {
        let e = draw();
        Ok(alloc::vec![e; num_agents])
    } else {
        Ok((0..num_agents).map(|_| draw()).collect())
    }
}

/// I.i.d. Gaussian initial states, one vector per agent.
pub fn random_initial_states(seed: u64, num_agents: usize, n: usize, std: f64) -> Vec<DVector<f64>> {
    let mut rng = stream_rng(seed, INITIAL_STATE_STREAM);
    (0..num_agents)
        .map(|_| {
            DVector::from_fn(n, |_, _| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * std
            })
        })
        .collect()
}

/// One logged transition.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub t: u64,
    pub agent: usize,
    pub x: DVector<f64>,
    pub u: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    t: u64,
    states: Vec<DVector<f64>>,
    blowup_bound: f64,
}

impl NetworkState {
    pub fn new(states: Vec<DVector<f64>>) -> Self {
        Self {
            t: 0,
            states,
            blowup_bound: DEFAULT_BLOWUP_BOUND,
        }
    }

    pub fn with_blowup_bound(mut self, bound: f64) -> Self {
        self.blowup_bound = bound;
        self
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn num_agents(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[DVector<f64>] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &DVector<f64> {
        &self.states[i]
    }

    /// Advances every agent by one step with its own input; `t` increments.
    pub fn step(&mut self, model: &LtiModel, inputs: &[DVector<f64>]) -> Result<(), SimError> {
        let m = model.input_dim();
        if inputs.len() != self.states.len() || inputs.iter().any(|u| u.len() != m) {
            return Err(SimError::InputShape {
                expected: self.states.len(),
                len: m,
                found: inputs.len(),
            });
        }
        let mut next = Vec::with_capacity(self.states.len());
        for (agent, (x, u)) in self.states.iter().zip(inputs).enumerate() {
            if u.iter().any(|v| !v.is_finite()) {
                return Err(SimError::NonFinite(agent));
            }
            let x1 = model.propagate(x, u);
            let norm = x1.norm();
            if !norm.is_finite() || norm > self.blowup_bound {
                return Err(SimError::Instability {
                    agent,
                    step: self.t,
                    norm,
                });
            }
            next.push(x1);
        }
        self.states = next;
        self.t += 1;
        Ok(())
    }

    /// States of agent `i`'s neighbors in ascending index order.
    pub fn neighbor_states<'a>(&'a self, g: &'a InteractionGraph, i: usize) -> impl Iterator<Item = &'a DVector<f64>> + 'a {
        g.neighbors(i).iter().map(move |&j| &self.states[j])
    }

    /// `max_{i,j} ‖x_i − x_j‖₂`; zero for a single agent.
    pub fn consensus_gap(&self) -> f64 {
        consensus_gap(&self.states)
    }
}

/// `max_{i,j} ‖x_i − x_j‖₂` over a set of states.
pub fn consensus_gap(states: &[DVector<f64>]) -> f64 {
    let mut gap = 0.0_f64;
    for i in 0..states.len() {
        for j in (i + 1)..states.len() {
            gap = gap.max((&states[i] - &states[j]).norm());
        }
    }
    gap
}
