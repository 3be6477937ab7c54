use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singularity: {0}")]
    Singularity(String),

    #[error("no root of {0} in the search interval")]
    NoRoot(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("config parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid config value for `{key}`: {msg}")]
    Validation { key: String, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("watchdog: divergence at t = {t:.3} s ({what})")]
    Divergence { t: f64, what: String },

    #[error("trajectory log is empty")]
    EmptyLog,

    #[error("trajectory CSV is missing columns: {}", .0.join(", "))]
    MissingColumns(Vec<String>),

    #[error("malformed trajectory CSV: {0}")]
    Csv(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn invalid(key: &str, msg: impl Into<String>) -> Self {
        Error::Validation { key: key.to_string(), msg: msg.into() }
    }
}
