//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument is out of its allowed range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An action or symbol index does not belong to the alphabet in force.
    #[error("encoding error: {0}")]
    Encoding(String),

    /// Malformed input data, with the 1-based line it came from.
    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    /// An internal precondition between cooperating operations was violated.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Every hidden path has probability zero for the given sequence.
    #[error("degenerate model/sequence pair: {0}")]
    Degenerate(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code under the CLI contract: 2 for usage and I/O
    /// problems, 1 for runtime/model errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Format { .. } | Error::Io(_) => 2,
            _ => 1,
        }
    }
}
