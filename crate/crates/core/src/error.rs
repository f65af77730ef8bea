use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Io(#[from] io::Error),

    /// A line-oriented input file could not be parsed. `line` is 1-based.
    #[error("{message} at line {line}")]
    Parse { line: usize, message: String },

    #[error("no pauses for user {0}")]
    NoPauses(String),

    #[error("sentence belongs to user {found}, statistics are for user {expected}")]
    UserMismatch { expected: String, found: String },

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("unknown task {0}")]
    UnknownTask(String),

    #[error("misaligned corpora: {0}")]
    Misaligned(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    /// Any of the above, attributed to an input or output file.
    #[error("{path}: {source}")]
    File { path: String, source: Box<Error> },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub fn in_file(self, path: &std::path::Path) -> Self {
        match self {
            e @ Error::File { .. } => e,
            e => Error::File {
                path: path.display().to_string(),
                source: Box::new(e),
            },
        }
    }
}
