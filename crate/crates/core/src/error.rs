use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Unified error type for the whole library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("cannot normalize a (near-)zero vector")]
    ZeroNorm,

    #[error("vector has norm {norm}, expected unit")]
    NotUnit { norm: f64 },

    #[error("row {row} has norm {norm}, expected unit within {tol:e}")]
    NonUnitRow { row: usize, norm: f64, tol: f64 },

    #[error("real-field data has a nonzero imaginary part at row {row}, component {col}")]
    ImaginaryInRealField { row: usize, col: usize },

    #[error("index {index} out of range (bound {bound})")]
    BadIndex { index: usize, bound: usize },

    #[error("{0}")]
    BadInput(String),

    #[error("exact arithmetic overflow: {0}")]
    Overflow(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Shorthand for input-validation failures built from a message.
    pub(crate) fn bad_input(msg: impl Into<String>) -> Self {
        Error::BadInput(msg.into())
    }
}
