use thiserror::Error;

/// Errors produced by the decomposition library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MmdError {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("signal too short: {len} samples (need at least {min})")]
    SignalTooShort { len: usize, min: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("phase is not strictly increasing at index {index}")]
    PhaseNotIncreasing { index: usize },

    #[error("phase covers {cycles:.3} cycles; at least 2 are required")]
    PhaseTooFewCycles { cycles: f64 },

    #[error("invalid fundamental {0}")]
    InvalidFundamental(f64),

    #[error("factor {factor} does not divide length {len}")]
    NotDivisible { factor: usize, len: usize },

    #[error("scale index {n} violates bandwidth |n| < {limit}")]
    Bandwidth { n: i64, limit: f64 },

    #[error("band {band} exceeds stored scale indices (max {max})")]
    BandExceedsStored { band: usize, max: usize },

    #[error("invalid band: {0}")]
    InvalidBand(String),

    #[error("tolerance {tolerance:e} not achievable: {reason}")]
    Tolerance { tolerance: f64, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate shape specification: {0}")]
    DegenerateShape(String),

    #[error("trace too short: {len} residual entries (need at least {min})")]
    TraceTooShort { len: usize, min: usize },

    #[error("all partition bins are empty")]
    AllBinsEmpty,

    #[error("at least {min} components are required, got {actual}")]
    TooFewComponents { min: usize, actual: usize },

    #[error("empty input")]
    EmptyInput,
}

pub type Result<T> = std::result::Result<T, MmdError>;
