//! Unified error type for simulation, learning, and harness code.

use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error)]
pub enum LabError {
    /// Shape or size mismatch between buffers, images, or networks.
    #[error("dimension error: {0}")]
    Dimension(String),
    /// Malformed file or stream contents.
    #[error("format error: {0}")]
    Format(String),
    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    /// Parameter outside its documented domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// Numeric breakdown: non-finite losses, impossible updates.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// Operation invoked in a state that forbids it.
    #[error("state error: {0}")]
    State(String),
    /// Caller-supplied argument violates a precondition.
    #[error("argument error: {0}")]
    Argument(String),
}

impl LabError {
    /// Process exit code for the CLI: 2 for data problems, 3 for numeric
    /// breakdowns, 1 for everything a caller could have prevented.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Format(_) | LabError::Io(_) => 2,
            LabError::Numeric(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
