use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("node {0} does not exist in the network")]
    UnknownNode(u64),

    #[error("network state is empty")]
    EmptyState,

    #[error("record {index}: {reason}")]
    InvalidRecord { index: usize, reason: String },

    #[error("record {index}: time {time} precedes previous time {previous}")]
    NonMonotoneTime {
        index: usize,
        time: i64,
        previous: i64,
    },

    #[error("domain error in {function}: {reason}")]
    Domain {
        function: &'static str,
        reason: String,
    },

    /// Quantity requires `p > 0` (or positive scenario mass) to exist.
    #[error("{0} is undefined at these parameters")]
    Undefined(&'static str),

    #[error("empty edge log")]
    EmptyLog,

    #[error("no records fall inside the window [{start}, {end}]")]
    EmptyWindow { start: i64, end: i64 },

    #[error("no sign change of the approximate score in [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("could not find a starting point with positive likelihood after {0} attempts")]
    ZeroLikelihoodStart(usize),

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than I/O.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::Json(_))
    }
}
