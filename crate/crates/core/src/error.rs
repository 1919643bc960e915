use thiserror::Error;

use crate::metric::MetricKind;
use crate::ObjectId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("metric {metric:?} cannot compare {left} with {right}")]
    MetricMismatch {
        metric: MetricKind,
        left: String,
        right: String,
    },

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid sort key {key} (tie {tie})")]
    InvalidKey { key: f64, tie: u64 },

    #[error("empty input")]
    EmptyInput,

    #[error("empty node: no pivot can be selected")]
    EmptyNode,

    #[error("child ordinal {ordinal} outside 1..={capacity}")]
    Ordinal { ordinal: usize, capacity: usize },

    #[error("distance {dis} outside [0, {level_max}]")]
    DistanceRange { dis: f64, level_max: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("memory budget of {capacity} units cannot hold a single search path of {required} units")]
    BudgetTooSmall { capacity: usize, required: usize },

    #[error("object id {0} already present")]
    DuplicateId(ObjectId),

    #[error("object id {0} not found")]
    NotFound(ObjectId),

    #[error("need at least {needed} objects, have {have}")]
    InsufficientData { needed: usize, have: usize },

    #[error("radius must be positive, got {0}")]
    UndefinedRadius(f64),

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
