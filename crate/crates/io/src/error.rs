use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: field `{field}`: {message}")]
    Schema {
        line: usize,
        field: &'static str,
        message: String,
    },

    #[error("embedding cache: {0}")]
    Cache(String),

    #[error("embedding dimension drift: cache has {expected}, got {actual}")]
    DimensionDrift { expected: usize, actual: usize },

    #[error("embedding service: {0}")]
    Service(String),

    #[error("{} input(s) missing from the cache and no reachable service: {}", .missing.len(), .missing.join(" | "))]
    MissingEmbeddings { missing: Vec<String> },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] sindex_core::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable identifier for machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Schema { .. } => "schema",
            Error::Cache(_) => "cache",
            Error::DimensionDrift { .. } => "dimension_drift",
            Error::Service(_) => "service",
            Error::MissingEmbeddings { .. } => "missing_embeddings",
            Error::Config(_) => "config",
            Error::Core(sindex_core::Error::UndefinedAuroc(_)) => "undefined_auroc",
            Error::Core(_) => "input",
        }
    }
}
