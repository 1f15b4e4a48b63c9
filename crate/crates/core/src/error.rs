use thiserror::Error;

pub type Result<T> = std::result::Result<T, QidError>;

#[derive(Debug, Error)]
pub enum QidError {
    #[error("invalid Hilbert-space dimension {0} (must be at least 2)")]
    InvalidDimension(usize),

    #[error("dimension {dim} exceeds the simulation cap of {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index {index} out of range (must be below {bound})")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("invalid register selection: {0}")]
    InvalidRegisters(String),

    #[error("program parameters violate the normalization condition (residual {0:e})")]
    ConstraintViolated(f64),

    #[error("squeezing parameter must be non-negative, got {0}")]
    NegativeSqueezing(f64),

    #[error("squeezing {xi} exceeds the grid limit {max}; use the asymptotic path")]
    SqueezingTooLarge { xi: f64, max: f64 },

    #[error("incompatible grids: {0}")]
    IncompatibleGrids(String),

    #[error("grid spacing {spacing} cannot resolve a feature of width {width}")]
    Unresolved { width: f64, spacing: f64 },

    #[error("expected a coherent state: {0}")]
    NotCoherent(String),

    #[error("operation supports single-mode states only, got {0} modes")]
    UnsupportedModes(usize),

    #[error("invalid covariance matrix: {0}")]
    InvalidCovariance(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
