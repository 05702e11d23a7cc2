use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the kernel.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error ({context}): {message}")]
    Parse { context: String, message: String },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid point cloud: {0}")]
    InvalidCloud(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("query ({x}, {y}, {z}) lies outside the sampling hull")]
    OutOfHull { x: f64, y: f64, z: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }
}
