use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the library. Each variant maps to a distinct failure
/// class so that the CLI and HTTP layers can pick an exit code or status.
#[derive(Debug, Error)]
pub enum Error {
    /// A requested column, feature, or option does not exist or is malformed.
    #[error("configuration error: {0}")]
    Config(String),

    /// A data cell could not be read. `row` is the 1-based data row (header excluded).
    #[error("ingestion error at row {row}, column '{column}': {message}")]
    Ingestion {
        row: usize,
        column: String,
        message: String,
    },

    /// Input violates a documented precondition.
    #[error("validation error: {0}")]
    Validation(String),

    /// The regularized normal equations could not be solved.
    #[error("solver error: {0}")]
    Solver(String),

    /// A persisted model carries a format version this build does not read.
    #[error("unsupported model format version {found} (expected {expected})")]
    Version { found: u64, expected: u64 },

    /// A persisted payload is truncated or otherwise unreadable.
    #[error("decode error: {0}")]
    Decode(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Short machine-readable tag for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Ingestion { .. } => "ingestion",
            Error::Validation(_) => "validation",
            Error::Solver(_) => "solver",
            Error::Version { .. } => "version",
            Error::Decode(_) => "decode",
            Error::Io(_) => "io",
        }
    }
}
