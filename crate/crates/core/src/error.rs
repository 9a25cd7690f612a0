use thiserror::Error;

/// Errors raised by the learning, sampling and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point has {got} coordinates but the hypothesis expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point coordinates must be finite")]
    NonFiniteCoordinate,

    #[error("hypothesis class is empty")]
    EmptyClass,

    #[error("hypothesis class needs at least {required} members, got {got}")]
    ClassTooSmall { required: usize, got: usize },

    #[error("unknown hypothesis id {0}")]
    UnknownHypothesis(usize),

    #[error("invalid hypothesis: {0}")]
    InvalidHypothesis(String),

    #[error("query probability {0} is outside (0, 1]")]
    InvalidProbability(f64),

    #[error("importance weight {0} must be finite and at least 1")]
    InvalidWeight(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no exact expectation for this distribution ({0}); use the Monte Carlo estimator")]
    NoExactExpectation(String),

    #[error("radius grid is empty")]
    EmptyGrid,

    #[error("stream exhausted after {0} rounds")]
    EndOfStream(usize),

    #[error("i/o failure: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
