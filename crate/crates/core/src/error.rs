use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("missing required column `{0}`")]
    MissingColumn(String),

    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },

    #[error("no rows for location `{location}` between {from} and {to}")]
    LocationNotFound {
        location: String,
        from: NaiveDate,
        to: NaiveDate,
    },

    #[error("missing value for `{variable}` on {date}")]
    MissingValue { variable: String, date: NaiveDate },

    #[error("variable `{0}` has no observed values")]
    AllMissing(String),

    #[error("split index {index} outside (0, {max_t}]")]
    SplitOutOfRange { index: i64, max_t: i64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    #[error("normal equations are singular")]
    SingularNormalEquations,

    #[error("integration diverged to a non-finite state at step {step}")]
    NonFiniteState { step: usize },

    #[error("series is empty")]
    EmptySeries,

    #[error("series has zero variance")]
    ZeroVariance,

    #[error("lag {lag} out of range for series of length {len}")]
    LagOutOfRange { lag: usize, len: usize },

    #[error("series too short: need more than {needed} points, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("regression design matrix is singular")]
    SingularRegression,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("empty input")]
    EmptyInput,

    #[error("actual value is zero at index {0}")]
    ZeroActual(usize),

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("report does not match schema: {0}")]
    Schema(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by unreadable or unparseable input.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io(_)
                | Error::Csv(_)
                | Error::MissingColumn(_)
                | Error::MalformedRow { .. }
                | Error::Json(_)
        )
    }
}
