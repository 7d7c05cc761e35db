use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ball B(center, {radius}) escapes the density support box")]
    BallEscapesSupport { radius: f64 },

    #[error("density evaluated to a non-finite value at {at:?}")]
    NonFiniteDensity { at: Vec<f64> },

    #[error("requested ball mass {mass} exceeds the reachable mass {reach} at this center")]
    MassExceedsReach { mass: f64, reach: f64 },

    #[error("threshold equations unsolvable inside the support at t={t} (u={u}): {detail}")]
    BelowThreshold { t: f64, u: f64, detail: String },

    #[error("estimated density minimum {beta} is not positive")]
    NonpositiveMinimum { beta: f64 },

    #[error("proposal intensity {intensity} is not finite")]
    InfiniteIntensity { intensity: f64 },

    #[error("sandwich ordering violated at {at:?}: f1={f1}, phi={phi}, f2={f2}")]
    OrderingViolation {
        at: Vec<f64>,
        f1: f64,
        phi: f64,
        f2: f64,
    },

    #[error("window margin {required} does not fit inside the support (available {available})")]
    MarginExceedsSupport { required: f64, available: f64 },

    #[error("nucleus radius {radius} exceeded the simulation margin {margin}; resimulate with a larger box")]
    MarginTooSmall { radius: f64, margin: f64 },

    #[error("configuration has no point other than the query point")]
    EmptyNeighborhood,

    #[error("{op} is not supported in dimension {dim}")]
    UnsupportedDimension { dim: usize, op: &'static str },

    #[error("sample is empty")]
    EmptySample,

    #[error("interval ring extends beyond the simulated support of a sample")]
    SupportExceeded,

    #[error("need at least {needed} replicates, got {got}")]
    InsufficientReplicates { needed: u64, got: u64 },

    #[error("interval ({a}, {b}) is invalid: endpoints must be finite with a < b")]
    InvalidInterval { a: f64, b: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("probability {p} outside the valid domain")]
    ProbabilityDomain { p: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
