use std::path::PathBuf;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum NoodlError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("degenerate atom {atom}: column norm {norm:e} after update")]
    DegenerateAtom { atom: usize, norm: f64 },

    #[error("column {column} is not unit norm (|norm - 1| = {deviation:e})")]
    NotNormalized { column: usize, deviation: f64 },

    #[error("column matching failed: {0}")]
    Matching(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl NoodlError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        NoodlError::Config(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        NoodlError::Shape(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        NoodlError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = NoodlError> = std::result::Result<T, E>;
