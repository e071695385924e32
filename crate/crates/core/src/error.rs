use thiserror::Error;

use crate::learner::LearnerError;
use crate::model::ModelError;
use crate::qfunction::QError;
use crate::riccati::RiccatiError;
use crate::rls::RlsError;
use crate::sim::SimError;

/// Union of the per-module errors, for callers that do not care which
/// stage failed.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Riccati(#[from] RiccatiError),
    #[error(transparent)]
    Q(#[from] QError),
    #[error(transparent)]
    Rls(#[from] RlsError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
}
