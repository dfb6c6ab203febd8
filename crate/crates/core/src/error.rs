use alloc::boxed::Box;
use alloc::string::String;

/// Errors raised by the core crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("algorithm `{algorithm}` emitted a point outside the box at step {step}")]
    OutsideBox { algorithm: String, step: usize },

    #[error("objective `{0}` has no known maximum")]
    MissingMax(String),

    #[error("objective `{0}` has no known maximizer")]
    MissingArgmax(String),

    #[error("covariance is not positive definite")]
    NotPositiveDefinite,

    #[error("trajectory {index}: {source}")]
    Trajectory { index: usize, source: Box<Error> },

    #[error("oracle limits exceeded: K = {states} (max {max_states}), horizon = {horizon} (max {max_horizon})")]
    OracleLimits {
        states: usize,
        horizon: usize,
        max_states: usize,
        max_horizon: usize,
    },

    #[error("probability vector {what} is not normalized (sum = {sum})")]
    NotNormalized { what: String, sum: f64 },

    #[error("measures do not come from the same chain (marginal differs by {0})")]
    ProvenanceMismatch(f64),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
