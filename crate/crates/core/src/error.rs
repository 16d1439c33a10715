use std::path::PathBuf;

use crate::topology::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("resampling budget exhausted after {attempts} attempts building {what}")]
    ResamplingBudgetExhausted { what: &'static str, attempts: usize },

    #[error("node {0} has no outbound anonymity edges")]
    NoOutEdges(NodeId),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameters(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Wraps the error with a description of what was being attempted.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context { context: context.into(), source: Box::new(self) }
    }

    /// True for errors caused by bad user input rather than I/O.
    pub fn is_config_error(&self) -> bool {
        match self {
            Error::InvalidParameters(_)
            | Error::Domain(_)
            | Error::UnknownPreset(_)
            | Error::Config(_)
            | Error::Parse { .. } => true,
            Error::Context { source, .. } => source.is_config_error(),
            _ => false,
        }
    }
}
