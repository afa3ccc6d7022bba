use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while ingesting, curating or reporting on a corpus.
#[derive(Debug, Error)]
pub enum CurateError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("line {line}: duplicate id `{id}`")]
    DuplicateId { line: usize, id: String },

    #[error("embedding file {path}: {message}")]
    EmbeddingFormat { path: PathBuf, message: String },

    #[error("embedding row {row} (`{id}`) has zero norm")]
    ZeroNormRow { row: usize, id: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("query vector has zero norm")]
    ZeroQuery,

    #[error("video `{video_id}`: {expected} merged segments but {actual} segment embeddings")]
    SegmentCountMismatch {
        video_id: String,
        expected: usize,
        actual: usize,
    },

    #[error("unknown ids: {}", .0.join(", "))]
    UnknownIds(Vec<String>),

    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{0}")]
    Invalid(String),

    #[error("dataset invariant violated: {}", .0.join("; "))]
    Violations(Vec<String>),
}

impl CurateError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CurateError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CurateError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit status for this error: 2 for config/validation problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CurateError::Config { .. } | CurateError::Violations(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = CurateError> = std::result::Result<T, E>;
