use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by scenario loading, configuration, and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("coalition of {n} members exceeds the exact Shapley limit of {limit}; use sampled mode")]
    CoalitionTooLarge { n: usize, limit: usize },

    #[error("community of {n} microgrids exceeds the exhaustive oracle limit of {limit}")]
    CommunityTooLarge { n: usize, limit: usize },

    #[error("coalitions overlap on member `{id}`")]
    OverlappingCoalitions { id: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    FileFormat { path: PathBuf, message: String },

    #[error("ingest: {0}")]
    Ingest(String),

    #[error("sample lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn file_format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::FileFormat {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
