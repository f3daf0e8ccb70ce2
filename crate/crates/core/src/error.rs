use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("embedding must be nonempty and finite")]
    InvalidEmbedding,

    #[error("object set is empty")]
    EmptyObjectSet,

    #[error("bandwidth must be positive, got {0}")]
    NonPositiveBandwidth(f64),

    #[error("kernel rows and columns mix flat and object-set representations")]
    MixedRepresentations,

    #[error("metric {metric} cannot be applied to {kind} representations")]
    MetricKindMismatch { metric: &'static str, kind: &'static str },

    #[error("empty collection: {0}")]
    EmptyCollection(&'static str),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("index {index} out of range for ground set of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("item {0} is already in the set")]
    AlreadySelected(usize),

    #[error("kernel shapes do not fit: {0}")]
    ShapeMismatch(String),

    #[error("invalid maximizer configuration: {0}")]
    InvalidMaximizer(String),

    #[error("slice {0} is empty")]
    EmptySlice(usize),

    #[error("slice {slice} out of range for pool with {count} slices")]
    SliceOutOfRange { slice: usize, count: usize },

    #[error("invalid budget parameters: {0}")]
    InvalidBudget(String),

    #[error("item id {0} appears more than once")]
    DuplicateItem(u64),

    #[error("item id {0} is not in the buffer")]
    UnknownItem(u64),

    #[error("invalid prediction: {0}")]
    InvalidPrediction(String),

    #[error("invalid stream specification: {0}")]
    InvalidStream(String),

    #[error("training pool is empty")]
    EmptyPool,

    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("embedding file error at byte {offset}: {reason}")]
    EmbeddingFile { offset: u64, reason: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
