use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("face index {index} out of range at line {line} (vertex count {count})")]
    Index { line: usize, index: i64, count: usize },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("mesh has no faces")]
    EmptyMesh,

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("mesh has zero total surface area")]
    DegenerateMesh,

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("too few rows: {0}")]
    TooFewRows(String),

    #[error("no training rows")]
    EmptyTraining,

    #[error("schema mismatch: expected version {expected}, found {found}")]
    SchemaMismatch { expected: u32, found: String },

    #[error("nothing to evaluate")]
    EmptyEvaluation,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
