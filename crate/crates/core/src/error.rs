use thiserror::Error;

/// Errors raised by the kernel modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid signature ({p},{q}): {reason}")]
    InvalidSignature { p: usize, q: usize, reason: &'static str },

    #[error("signature mismatch: ({0},{1}) vs ({2},{3})")]
    SignatureMismatch(usize, usize, usize, usize),

    #[error("generator index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("scheme {scheme} not available for signature ({p},{q})")]
    IncompatibleScheme { scheme: &'static str, p: usize, q: usize },

    #[error("vacuum specification invalid: {0}")]
    InvalidVacuum(String),

    #[error("rank deficiency: rank {rank} < {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("singular matrix: {0}")]
    Singular(&'static str),

    #[error("zero norm: {0}")]
    ZeroNorm(&'static str),

    #[error("polynomial degree {0} exceeds the supported maximum of 2")]
    DegreeTooHigh(usize),

    #[error("cutoff {0} too small (need at least 2)")]
    CutoffTooSmall(usize),

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("kernel not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("zero one-particle eigenvalue at mode {0}: sign ambiguous under a frequency rule")]
    ZeroEigenvalue(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;
