use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("sample value {value} at position {index} is outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },

    #[error("sample value at position {index} is NaN")]
    NotANumber { index: usize },

    #[error("empty sample")]
    EmptySample,

    #[error("pair sequence was generated for n = {pairs}, but the sample has n = {sample}")]
    SizeMismatch { pairs: usize, sample: usize },

    #[error("unknown test `{0}`")]
    UnknownTest(String),

    #[error("unknown distribution `{0}`")]
    UnknownDistribution(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("rejection sampling for `{scenario}` exceeded {cap} draws")]
    RejectionCap { scenario: String, cap: usize },

    #[error("{failed} of {total} replicates failed (first failure: {first})")]
    ReplicateFailures { failed: usize, total: usize, first: String },

    #[error("null cache file {path}: {reason}")]
    CorruptCache { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
