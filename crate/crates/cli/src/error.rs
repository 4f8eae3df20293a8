use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] ggredux_core::Error),
    #[error("{context}: {source}")]
    Context {
        context: String,
        source: ggredux_core::Error,
    },
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("bad value for {key}: {message}")]
    Config { key: String, message: String },
    #[error("missing required key {0}")]
    MissingKey(&'static str),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) | CliError::Context { source: e, .. } => e.kind(),
            CliError::Io(..) => "io",
            CliError::UnknownKey(_) | CliError::Config { .. } | CliError::MissingKey(_) => "config",
            CliError::Usage(_) => "usage",
        }
    }

    /// Single line `error kind=<kind> message=<quoted>`.
    pub fn one_line(&self) -> String {
        format!("error kind={} message={:?}", self.kind(), self.to_string())
    }
}
