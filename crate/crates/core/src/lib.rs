//! Distributed Q-learning policy iteration for networks of identical,
//! dynamically decoupled LTI agents whose only coupling is a shared quadratic
//! cost defined over an interaction graph.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is pure
//! computation: model assembly, an exact discounted Riccati oracle, quadratic
//! Q-function parameterization, recursive least squares, a seeded network
//! simulator, the centralized and distributed learners, and the operation
//! counters used for complexity comparisons. File formats and the command line
//! live in the `dql` crate.
//!
//! Gain convention: every gain produced by the learners is applied as
//! `u = K x + e`. The LQR optimum in that convention is `-K*`, where `K*` is
//! the textbook gain of `u = -K* x` returned by [`riccati::solve_dare`].

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bench;
pub mod learner;
pub mod linalg;
pub mod model;
pub mod qfunction;
pub mod riccati;
pub mod rls;
pub mod sim;

mod error;

pub use error::Error;
pub use learner::{LearnRun, LearnerConfig};
pub use model::{CostWeights, GlobalProblem, InteractionGraph, LtiModel};
pub use riccati::RiccatiSolution;
pub use rls::RlsEstimator;
pub use sim::{ExcitationConfig, NetworkState};
