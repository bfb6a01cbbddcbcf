use std::path::PathBuf;

use crate::types::Metric;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("trajectory has no samples")]
    EmptyTrajectory,

    #[error("invalid `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("percentile {0} is outside [0, 100]")]
    PercentileOutOfRange(f64),

    #[error("no normalization bounds for metric `{0}`")]
    MissingBounds(Metric),

    #[error("turn {turn} of dialogue `{dialogue_id}` has no categorical labels")]
    MissingLabels { dialogue_id: String, turn: usize },

    #[error("rating `{field}` = {value} is outside 1..=5")]
    RatingOutOfRange { field: &'static str, value: i64 },

    #[error("sequences differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least 2 observations for correlation, got {0}")]
    TooFewObservations(usize),

    #[error("sequence has zero variance")]
    ZeroVariance,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: parse error: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: turn {turn}: field `{field}`: {reason}")]
    Schema {
        path: PathBuf,
        turn: usize,
        field: String,
        reason: String,
    },

    #[error("{path}: turn {turn}: {source}")]
    InvariantViolation {
        path: PathBuf,
        turn: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid fixture spec: {0}")]
    InvalidSpec(String),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
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
