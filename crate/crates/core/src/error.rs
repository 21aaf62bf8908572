use std::io;

use thiserror::Error;

/// Errors produced by grid handling, curve evaluation and the benchmark harness.
#[derive(Debug, Error)]
pub enum EccError {
    #[error("format error: {0}")]
    Format(String),

    #[error("corrupt payload: header declares {expected} bytes of samples, found {found}")]
    Corruption { expected: usize, found: usize },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate direction: norm {0:e} is too small to normalize")]
    DegenerateDirection(f64),

    #[error("capacity error: {0}")]
    Capacity(String),

    #[error("checksum mismatch for {dims}: {strategy} produced {found}, expected {expected}")]
    ChecksumMismatch {
        dims: String,
        strategy: String,
        expected: String,
        found: String,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, EccError>;
