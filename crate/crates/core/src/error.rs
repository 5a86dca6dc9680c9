use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty sample")]
    EmptySample,

    #[error("empty distribution list")]
    EmptyFamily,

    #[error("Y may be infinite at 0")]
    UnboundedAtZero,

    #[error("not a rearrangement: values increase near t = {0}")]
    NotNonIncreasing(f64),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("dilation factor must be positive, got {0}")]
    BadDilation(f64),

    #[error("Phi(1) = Psi(1) = 1 required, got Phi(1) = {phi1}, Psi(1) = {psi1}")]
    SpliceNormalization { phi1: f64, psi1: f64 },

    #[error("theta(t)/t must be non-decreasing (violated near t = {0})")]
    NotRegularizable(f64),

    #[error("m out of range: m = {m}, n = {n}")]
    TopMOutOfRange { m: usize, n: usize },

    #[error("insufficient tail resolution: need at least {need} samples, got {got}")]
    InsufficientTail { need: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown experiment: {0}")]
    UnknownExperiment(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
