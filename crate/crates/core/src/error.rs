use std::path::PathBuf;

use tensorlab::TensorError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MuseError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("cannot read {}", path.display())]
    Ingest {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {msg}", path.display())]
    Format { path: PathBuf, line: usize, msg: String },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("need {needed} unused anomalies for contamination, only {available} available")]
    Shortfall { needed: usize, available: usize },
    #[error("outside theorem scope: {0}")]
    Range(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("metric error: {0}")]
    Metric(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, MuseError>;
