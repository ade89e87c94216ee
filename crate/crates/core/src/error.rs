use thiserror::Error;

/// Errors produced by the numeric core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("size cap exceeded: {what} = {value} (max {max})")]
    SizeCap {
        what: &'static str,
        value: usize,
        max: usize,
    },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid function: {0}")]
    InvalidFunction(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    EigenNonConvergence { sweeps: usize, off_norm: f64 },

    #[error("sampler failure: {0}")]
    Sampler(String),

    #[error("state access exhausted after {used} copies")]
    AccessExhausted { used: u64 },

    #[error("{0}")]
    Unsupported(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
