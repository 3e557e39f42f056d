use thiserror::Error;

use crate::qp::QpSolution;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("active set iteration did not converge in {iterations} iterations")]
    NotConverged {
        iterations: usize,
        last: Box<QpSolution>,
    },

    #[error("problem has no exact solution attached")]
    MissingExactSolution,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
