//! Error type shared by every module in the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Operand dimensions do not conform.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Param(String),

    /// A NaN or infinity was found where a finite value is required.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// An ALS sweep produced a numerically singular Gram system or a
    /// non-finite iterate. Carries the 1-based iteration index.
    #[error("degenerate iterate at ALS iteration {iteration}: {reason}")]
    Degenerate { iteration: usize, reason: String },

    /// A file did not match its declared on-disk format.
    #[error("{path}: malformed {format} data: {reason}")]
    Format {
        path: String,
        format: &'static str,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
