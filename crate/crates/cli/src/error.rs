use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] ensavg_core::Error),

    #[error("{path}: line {line}: malformed baselines: {reason}")]
    MalformedBaselines {
        path: PathBuf,
        line: u64,
        reason: String,
    },

    #[error("{0}: no confusion fixtures (*.txt) found")]
    EmptyFixtureDir(PathBuf),

    #[error("invalid report document: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid timestamp {0:?} (expected RFC 3339)")]
    BadTimestamp(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("validation failed with {0} error(s)")]
    Validation(usize),
}

pub type CliResult<T> = Result<T, CliError>;
