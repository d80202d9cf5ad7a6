use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("pose ({x:.3}, {y:.3}) lies outside the arena")]
    OutsideArena { x: f64, y: f64 },

    #[error("goal coincides with the robot position")]
    GoalAtPosition,

    #[error("invalid stage: {0}")]
    InvalidStage(String),

    #[error("could not place {what} after {attempts} attempts; stage too crowded")]
    PlacementFailed { what: &'static str, attempts: usize },

    #[error("episode already finished; reset before stepping")]
    EpisodeFinished,

    #[error("invalid reward facts: {0}")]
    InvalidRewardFacts(&'static str),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("empty batch")]
    EmptyBatch,

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("config: {0}")]
    Config(String),

    #[error("step log: {0}")]
    StepLog(String),

    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn shape(expected: impl ToString, actual: impl ToString) -> Self {
        Error::ShapeMismatch {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }
}
