use thiserror::Error;

/// Errors raised by the potential-theory routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    #[error("chain is not transient (spectral radius estimate {radius:.12})")]
    NotTransient { radius: f64 },
    #[error("linear solve failed: {0}")]
    SingularSolve(String),
    #[error("target state {state} is unreachable from the root")]
    UnreachableTarget { state: usize },
    #[error("target set is empty")]
    EmptyTarget,
    #[error("state index {state} out of range for a chain with {n_states} states")]
    StateOutOfRange { state: usize, n_states: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("capacity solver did not converge after {iterations} iterations (relative gap {gap:e})")]
    NoConvergence { iterations: usize, gap: f64 },
    #[error("cut points must be strictly increasing")]
    BadCuts,
    #[error("time set is empty")]
    EmptyTimeSet,
    #[error("time {time} is not a multiple of the walk period {period}")]
    PeriodicTimeSet { period: u64, time: u64 },
    #[error("time {time} exceeds the horizon {horizon}")]
    TimeBeyondHorizon { time: u64, horizon: u64 },
    #[error("integer overflow: {0}")]
    Overflow(String),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("invalid point cloud: {0}")]
    InvalidCloud(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
