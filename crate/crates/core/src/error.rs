//! Error type shared across the crate.

use crate::train::TrainReport;

/// Errors produced by solver operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("time {t} outside [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate kernel at t = {t}: the transition law is a point mass")]
    DegenerateKernel { t: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("non-finite value encountered in {context} at index {index}")]
    NonFinite { context: &'static str, index: usize },

    #[error("singular covariance matrix")]
    SingularCovariance,

    #[error("{path}: file is empty")]
    CsvEmpty { path: String },

    #[error("{path}: row {row}: expected {expected} columns, got {got}")]
    CsvRagged {
        path: String,
        row: usize,
        expected: usize,
        got: usize,
    },

    #[error("{path}: row {row}, column {col}: cannot parse {token:?} as a number")]
    CsvNonNumeric {
        path: String,
        row: usize,
        col: usize,
        token: String,
    },

    #[error("{path}: row {row}, column {col}: non-finite value")]
    CsvNonFinite {
        path: String,
        row: usize,
        col: usize,
    },

    #[error("training diverged at step {step}; last finite state is attached")]
    Diverged {
        step: usize,
        last_finite: Box<TrainReport>,
    },

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
