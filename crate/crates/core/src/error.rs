use thiserror::Error;

/// Errors surfaced by the core library.
#[derive(Debug, Error)]
pub enum Error {
    /// Shape or dimension disagreement between operands.
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    /// A record in an input file failed validation.
    #[error("{path}:{line}: {msg}")]
    DataFormat {
        path: String,
        line: usize,
        msg: String,
    },

    /// Invalid configuration value.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// An operation that needs data got none.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// Normal-equation system is singular.
    #[error("singular system: {0}; use lambda > 0")]
    Singular(String),

    /// A loss or intermediate value left the finite range.
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    /// Iterative training left the finite range or the objective increased.
    #[error("training diverged at step {step}: {msg}")]
    Diverged { step: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
