use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid class catalog: {0}")]
    InvalidCatalog(String),

    #[error("invalid sample id {id:?}: {reason}")]
    InvalidSampleId { id: String, reason: &'static str },

    #[error("invalid model id {id:?}: {reason}")]
    InvalidModelId { id: String, reason: &'static str },

    #[error("line {line}: malformed file: {reason}")]
    MalformedFile { line: u64, reason: String },

    #[error("line {line}: row {row_id:?} sums to {sum} (allowed deviation from 1.0 is 1e-6)")]
    RowSumViolation { line: u64, row_id: String, sum: f64 },

    #[error("line {line}: row {row_id:?} has entry {value} outside [0, 1]")]
    DomainViolation { line: u64, row_id: String, value: f64 },

    #[error("line {line}: duplicate id {id:?}")]
    DuplicateId { line: u64, id: String },

    #[error("line {line}: unknown class name {name:?}")]
    UnknownClassName { line: u64, name: String },

    #[error("line {line}: {token:?} is not a non-negative integer")]
    NonInteger { line: u64, token: String },

    #[error("line {line}: negative count {value}")]
    NegativeCount { line: u64, value: i64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid probability matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid label vector: {0}")]
    InvalidLabels(String),

    #[error("sample ids disagree: {0}")]
    IdMismatch(String),

    #[error("class catalogs disagree")]
    CatalogMismatch,

    #[error("ensemble has no members")]
    EmptyEnsemble,

    #[error("matrices are not aligned: {0}")]
    AlignmentError(String),

    #[error("unknown model id {0:?}")]
    UnknownModelId(String),

    #[error("duplicate model id {0:?}")]
    DuplicateModelId(String),

    #[error("invalid subset range [{min}, {max}]")]
    InvalidRange { min: usize, max: usize },

    #[error("subset size {max} exceeds pool size {pool}")]
    RangeExceedsPool { max: usize, pool: usize },

    #[error("sharpness {sharpness} is invalid for {k} classes: must lie in (1/{k}, 1]")]
    InvalidSharpness { sharpness: f64, k: usize },

    #[error("confusion matrix is empty (total count 0)")]
    EmptyMatrix,

    #[error("manifest lists no models")]
    EmptyManifest,

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Self {
        match self {
            e @ (Error::File { .. } | Error::Io { .. }) => e,
            e => Error::File {
                path: path.into(),
                source: Box::new(e),
            },
        }
    }

    /// Strips any file context and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::File { source, .. } => source.root(),
            e => e,
        }
    }
}
