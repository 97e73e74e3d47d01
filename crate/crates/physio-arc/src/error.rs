//! Crate-wide error type.
//!
//! Errors are grouped into coarse classes that the CLI maps onto process
//! exit codes: validation (2), I/O (3), convergence (4), internal (5).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A malformed record in a text input, with its 1-based line number.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Timestamps out of order or duplicated.
    #[error("sequencing error at line {line}: timestamp {t} does not increase")]
    Sequencing { line: usize, t: f64 },

    /// A sampling gap larger than the ingest tolerance.
    #[error("gap error at line {line}: step of {dt:.6} s exceeds {max_dt:.6} s")]
    Gap { line: usize, dt: f64, max_dt: f64 },

    /// Input rejected by a contract check.
    #[error("validation error: {0}")]
    Validation(String),

    /// Duplicate entry where uniqueness is required.
    #[error("duplication error: {0}")]
    Duplication(String),

    /// Energy profile has no supra-threshold activity to annotate.
    #[error("no activity: {0}")]
    NoActivity(String),

    /// Tensor or layer shape mismatch, tagged with the failing stage.
    #[error("shape error in {stage}: {message}")]
    Shape { stage: String, message: String },

    /// An iterative solver failed to reach its stopping criterion.
    #[error("convergence error: {0}")]
    Convergence(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// A bug: an internal invariant did not hold.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn shape(stage: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Shape {
            stage: stage.into(),
            message: msg.into(),
        }
    }

    /// Process exit code class for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::Sequencing { .. }
            | Error::Gap { .. }
            | Error::Validation(_)
            | Error::Duplication(_)
            | Error::NoActivity(_)
            | Error::Shape { .. } => 2,
            Error::Io(_) | Error::Json(_) => 3,
            Error::Convergence(_) => 4,
            Error::Internal(_) => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
