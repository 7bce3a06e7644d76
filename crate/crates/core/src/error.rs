use std::path::PathBuf;

use crate::model::Side;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("market size must be positive")]
    EmptyMarket,

    #[error("expected {expected} {side} preference lists, found {found}")]
    LengthMismatch { side: Side, expected: usize, found: usize },

    #[error("{side} {agent}: list has {len} entries but the market has only {n} counterparts")]
    ListTooLong { side: Side, agent: usize, len: usize, n: usize },

    #[error("{side} {agent}: index {index} is out of range for n = {n}")]
    IndexOutOfRange { side: Side, agent: usize, index: usize, n: usize },

    #[error("{side} {agent}: index {index} appears more than once")]
    DuplicateIndex { side: Side, agent: usize, index: usize },

    #[error("pruned lists are not mutually consistent: resident {resident} and hospital {hospital}")]
    Inconsistent { resident: usize, hospital: usize },

    #[error("matching: {0}")]
    InvalidMatching(String),

    #[error("prediction: {0}")]
    InvalidPrediction(String),

    #[error("parameters: {0}")]
    InvalidParams(String),

    #[error("oracle enumeration supports n <= {max}, got n = {n}")]
    TooLarge { n: usize, max: usize },

    #[error("stable set is empty")]
    EmptyStableSet,

    #[error("training log: {0}")]
    InvalidLog(String),

    #[error("set disjointness instance: {0}")]
    InvalidDisjointness(String),

    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
