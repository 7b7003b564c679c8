use thiserror::Error;

/// Errors raised when constructing or combining statistics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("number of detector elements must be at least 1")]
    NoElements,
    #[error("efficiency out of range: {0} (expected 0 <= eta <= 1)")]
    EfficiencyOutOfRange(f64),
    #[error("mean photon number must be finite and non-negative, got {0}")]
    InvalidMean(f64),
    #[error("number of modes must be at least 1")]
    NoModes,
    #[error("squeezing parameter must satisfy |zeta| < 1, got {0}")]
    SqueezingOutOfRange(f64),
    #[error("geometric ratio must satisfy 0 <= b < 1, got {0}")]
    RatioOutOfRange(f64),
    #[error("tail tolerance must be in (0, 1), got {0}")]
    InvalidTolerance(f64),
    #[error("click kernel of {rows}x{cols} entries exceeds the memory budget of {budget} bytes")]
    KernelTooLarge {
        rows: usize,
        cols: usize,
        budget: usize,
    },
    #[error("kernel covers photon numbers up to {kernel}, distribution needs {needed}")]
    WindowMismatch { kernel: usize, needed: usize },
    #[error("closed form undefined: {0}")]
    ClosedFormDomain(&'static str),
    #[error("tail mass {tail:e} exceeds the sampling limit {limit:e}")]
    TailTooLarge { tail: f64, limit: f64 },
    #[error("shots must be at least 1")]
    NoShots,
    #[error("{0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
