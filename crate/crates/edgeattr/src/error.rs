use std::path::PathBuf;

use edgeattr_core::eval::EvalError;
use edgeattr_core::PipelineError;
use thiserror::Error;

/// Problem in a schema document, with a JSON path such as `relations[0].source`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("schema {path}: {message}")]
pub struct SchemaFileError {
    pub path: String,
    pub message: String,
}

/// Problem in a CSV input, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct LineError {
    pub line: u64,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Schema { path: PathBuf, source: SchemaFileError },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: LineError },
    #[error("{path}: invalid JSON: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("invalid generator config: {0}")]
    Synth(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code: 2 for internal invariant violations, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Pipeline(e) if e.is_internal() => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
