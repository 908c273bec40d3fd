use thiserror::Error;

/// Errors produced by the simulation, extraction and verification layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("inconsistent input: {0}")]
    Consistency(String),

    #[error("row {row}: {message}")]
    Validation { row: usize, message: String },

    #[error("numeric failure in {cell}: {message}")]
    Numeric { cell: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

/// Rejects anything that is not a finite, strictly positive real.
pub(crate) fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        param(format!("{name} must be a finite positive real, got {value}"))
    }
}
