use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("factorization lost positive definiteness at row {row} (pivot {pivot:e})")]
    Factorization { row: usize, pivot: f64 },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("information ratio undefined: p={p}, information gain={info}")]
    UndefinedRatio { p: f64, info: f64 },

    #[error("environment horizon of {horizon} steps exhausted")]
    HorizonExceeded { horizon: usize },

    #[error("point ({x1}, {x2}) outside the camelback domain [-2,2]x[-1,1]")]
    OutOfDomain { x1: f64, x2: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("run with seed {seed} failed: {source}")]
    RunFailed {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
