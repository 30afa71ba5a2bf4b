//! Error type shared across the crate.

use crate::objects::ObjectKind;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failures the library can report.
///
/// `Config` covers bad user-supplied settings (unknown keys, invalid
/// hyperparameters, contradictory flags) and maps to CLI exit code 1; every
/// other variant is a runtime failure and maps to exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid configuration or command-line arguments.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed input file; reports the path and 1-based line number.
    #[error("parse error in {path} line {line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// Operands whose shapes cannot be combined.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Operands of different structured-object kinds, or a measure applied to
    /// the wrong kind.
    #[error("kind mismatch: expected {expected}, got {got}")]
    KindMismatch { expected: ObjectKind, got: ObjectKind },

    /// A dataset with no objects where at least one is required.
    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    /// An argument outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Numerical failure (singular system, non-finite value, failed solve).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Underlying I/O failure.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Attach a path to a raw `std::io::Error`.
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for errors caused by user configuration rather than runtime state.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}
