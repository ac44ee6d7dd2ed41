use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {msg}")]
    Config { path: PathBuf, msg: String },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("empty mesh: cannot build a tree over zero triangles")]
    EmptyMesh,

    #[error("invalid ray: {0}")]
    InvalidRay(String),

    #[error("joint vector has length {got}, robot has {expected} joints")]
    JointCount { expected: usize, got: usize },

    #[error("link index {index} out of range 1..={count}")]
    LinkIndex { index: usize, count: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point {index} has no known sensor origin")]
    MissingOrigin { index: usize },

    #[error("non-finite controller input or output: {0}")]
    NonFinite(String),

    #[error("scenario mismatch: {0}")]
    ScenarioMismatch(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            msg: msg.into(),
        }
    }
}
