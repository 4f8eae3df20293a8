use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] io::Error),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid graph {graph}: {message}")]
    Validation { graph: String, message: String },

    #[error("canonical form unavailable: {0}")]
    Canonical(String),

    #[error("vocabulary error: {0}")]
    Vocabulary(String),

    #[error("shape mismatch in {op}: {message}")]
    Shape { op: &'static str, message: String },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("metric error: {0}")]
    Metric(String),

    #[error("sampling error: {0}")]
    Sampling(String),
}

impl Error {
    /// Short machine-readable tag, used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io(_) => "io",
            Error::Parse { .. } => "parse",
            Error::Validation { .. } => "validation",
            Error::Canonical(_) => "canonical",
            Error::Vocabulary(_) => "vocabulary",
            Error::Shape { .. } => "shape",
            Error::Checkpoint(_) => "checkpoint",
            Error::Training(_) => "training",
            Error::Metric(_) => "metric",
            Error::Sampling(_) => "sampling",
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn shape(op: &'static str, message: impl Into<String>) -> Self {
        Error::Shape {
            op,
            message: message.into(),
        }
    }
}
