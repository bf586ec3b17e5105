use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("language `{0}` is already declared")]
    DuplicateLanguage(String),
    #[error("invalid language code `{0}`: expected 2-8 ASCII alphanumeric characters")]
    InvalidCode(String),
    #[error("unknown language `{0}`")]
    UnknownLanguage(String),
    #[error("self-loop edge {0}->{0} is not allowed")]
    SelfLoop(String),
    #[error("unknown edge {0}->{1}")]
    UnknownEdge(String, String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid config `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },
    #[error("concept id {id} out of range (concept_count = {count})")]
    UnknownConcept { id: usize, count: usize },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("direction {src}->{tgt} is not trained{}", hop.map(|h| format!(" (hop index {h})")).unwrap_or_default())]
    UntrainedDirection { src: String, tgt: String, hop: Option<usize> },
    #[error("alignment error: {0}")]
    Alignment(String),
    #[error("line count mismatch: {left} vs {right} lines")]
    LineCountMismatch { left: usize, right: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("no generated data at {}; run `graph-distill gen` first", .0.display())]
    NoData(PathBuf),
    #[error("accuracy table has no entry for {0}")]
    MissingEntry(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: parse error: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("remote backend: {0}")]
    Remote(String),
}

/// Coarse error classes, used for CLI exit codes and FFI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad arguments or configuration.
    Usage,
    /// Malformed or inconsistent data.
    Data,
    /// Failure while running (IO, untrained directions, remote calls).
    Runtime,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidConfig { .. } | Error::InvalidCode(_) => ErrorKind::Usage,
            Error::DuplicateLanguage(_)
            | Error::UnknownLanguage(_)
            | Error::SelfLoop(_)
            | Error::UnknownEdge(..)
            | Error::InvalidGraph(_)
            | Error::UnknownConcept { .. }
            | Error::Alignment(_)
            | Error::LineCountMismatch { .. }
            | Error::EmptyInput
            | Error::NoData(_)
            | Error::EmptyTrainingSet
            | Error::Parse { .. } => ErrorKind::Data,
            Error::UntrainedDirection { .. } | Error::MissingEntry(_) | Error::Io { .. } | Error::Remote(_) => {
                ErrorKind::Runtime
            }
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig { field: field.into(), reason: reason.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse { path: path.into(), message: message.to_string() }
    }
}
