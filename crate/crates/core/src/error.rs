use thiserror::Error;

/// Errors raised anywhere in the quench pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid chain specification: {0}")]
    InvalidSpec(String),

    #[error("operation requires a periodic chain")]
    NotPeriodic,

    #[error("symmetric eigensolver did not converge ({0})")]
    EigenSolver(&'static str),

    #[error("{0} is not positive definite")]
    NotPositiveDefinite(&'static str),

    #[error("initial frequency-squared must be positive, got {0}")]
    NoInitialGroundState(f64),

    #[error("invalid quench protocol: {0}")]
    InvalidProtocol(String),

    #[error("step size underflow while integrating near t = {time}")]
    StepUnderflow { time: f64 },

    #[error("expected {expected} mode solutions, got {found}")]
    ModeCountMismatch { expected: usize, found: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("beta-tilde eigenvalue {0} outside [0, 1)")]
    BetaTildeOutOfRange(f64),

    #[error("xi value {0} outside [0, 1)")]
    XiOutOfRange(f64),

    #[error("Renyi order must be a positive integer, got {0}")]
    InvalidOrder(u32),

    #[error("symplectic eigenvalue {0} below 1/2")]
    Unphysical(f64),

    #[error("kernel grid inadequate: discretized trace {trace} deviates from 1; enlarge the extent or point count")]
    GridInadequate { trace: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("series too coarse or too short: {0}")]
    InsufficientSampling(String),

    #[error("no revival structure: {0}")]
    NoRevival(String),

    #[error("scaling fit needs at least 3 distinct sizes, got {0}")]
    TooFewSizes(usize),

    #[error("inconsistent series: {0}")]
    InconsistentSeries(String),
}

pub type Result<T> = std::result::Result<T, Error>;
