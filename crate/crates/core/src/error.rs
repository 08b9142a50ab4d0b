use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid batch: {0}")]
    InvalidBatch(String),

    #[error("non-finite value at sample {index}")]
    NonFinite { index: usize },

    #[error("unknown algorithm kind `{0}`")]
    UnknownAlgorithm(String),

    #[error("{0} is not supported by this objective")]
    Unsupported(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("configuration has {} error(s):\n  {}", .0.len(), .0.join("\n  "))]
    Validation(Vec<String>),

    #[error("sub-problem solver failure: {0}")]
    SolverFailure(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unmappable label {label} for rule {rule}")]
    Label { label: f64, rule: &'static str },

    #[error("missing file {0}")]
    MissingFile(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, got })
        }
    }
}
