use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure talking to a model or detector, split by where it went wrong.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScorerError {
    /// The endpoint could not be reached or the pipe broke.
    #[error("transport failure: {0}")]
    Transport(String),
    /// The endpoint answered with something that does not follow the protocol,
    /// or reported an error itself.
    #[error("protocol error: {0}")]
    Protocol(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("corpus format error at line {line}: {msg}")]
    CorpusFormat { line: usize, msg: String },

    #[error("unknown label {label:?} at line {line}")]
    Label { line: usize, label: String },

    #[error("cannot sample {requested} articles for label {label:?}: only {available} available")]
    Sampling {
        label: String,
        requested: usize,
        available: usize,
    },

    #[error("synonym database line {line}: {msg}")]
    SynonymLoad { line: usize, msg: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("scorer error: {0}")]
    Scorer(#[from] ScorerError),

    #[error("detector error after {attempts} attempt(s): {source}")]
    Detector {
        attempts: usize,
        #[source]
        source: ScorerError,
    },

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("malformed stage file {path}: {msg}")]
    StageFile { path: PathBuf, msg: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn stage(path: impl Into<PathBuf>, msg: impl ToString) -> Self {
        Error::StageFile {
            path: path.into(),
            msg: msg.to_string(),
        }
    }

    /// Process exit status for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Argument(_) => 2,
            Error::CorpusFormat { .. }
            | Error::Label { .. }
            | Error::Sampling { .. }
            | Error::SynonymLoad { .. } => 3,
            Error::Scorer(_) | Error::Detector { .. } => 4,
            _ => 1,
        }
    }
}
