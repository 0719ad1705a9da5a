use thiserror::Error;

/// Errors produced by graph construction, spectral analysis and simulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid edge ({i}, {j}): node indices must lie in 1..={n}")]
    InvalidEdge { i: usize, j: usize, n: usize },

    #[error("self-loop on node {0} is not allowed")]
    SelfLoopRejected(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("no admissible epsilon: smallest grid value {0} is already unstable")]
    NoAdmissibleEpsilon(f64),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
