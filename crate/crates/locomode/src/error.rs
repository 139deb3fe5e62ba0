//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("label code {0} out of range (expected 1..=8)")]
    OutOfRange(u8),

    #[error("{path}:{line}: malformed line: {reason}")]
    MalformedLine {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("{path}:{line}: invalid label code {code} (expected 0..=8)")]
    InvalidLabelCode {
        path: String,
        line: usize,
        code: i64,
    },

    #[error("block count mismatch: {what} has {got} blocks, expected {expected}")]
    BlockCountMismatch {
        what: String,
        got: usize,
        expected: usize,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("missing channel {0}")]
    MissingChannel(String),

    #[error("length mismatch: got {got}, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },

    #[error("shape mismatch: got {got:?}, expected {expected:?}")]
    ShapeMismatch {
        got: Vec<usize>,
        expected: Vec<usize>,
    },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("class {0} has no samples; balancing is undefined")]
    MissingClass(&'static str),

    #[error("invalid dropout probability {0} (expected 0 <= p < 1)")]
    InvalidProbability(f64),

    #[error("stale forward cache: {0}")]
    StaleCache(String),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("empty batch")]
    EmptyBatch,

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    DivergedLoss { epoch: usize },

    #[error("architecture mismatch: checkpoint {checkpoint}, dataset {dataset}")]
    ArchMismatch { checkpoint: String, dataset: String },

    #[error("invalid split point {0} (expected 0 < split < {1})")]
    InvalidSplit(usize, usize),

    #[error("{path}: bad file format: {reason}")]
    BadFileFormat { path: String, reason: String },

    #[error("missing config key `{0}`")]
    MissingConfigKey(String),

    #[error("bad config value for `{key}`: {value}")]
    BadConfigValue { key: String, value: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
