//! Error type shared by every module of the crate.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("k = {k} is too large for n = {n} training points (need k <= n - 1)")]
    KTooLarge { k: usize, n: usize },

    #[error("k must be at least 1")]
    ZeroK,

    #[error("interpolation level must be >= 0, got {0}")]
    NegativeGamma(f64),

    #[error("metric exponent must satisfy p >= 1, got {0}")]
    BadMetric(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("operation requires a {expected} task, dataset is {found}")]
    TaskMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("outside the domain of the closed form: {0}")]
    DomainError(String),

    #[error("quadrature did not reach tolerance (estimate {estimate}, error bound {error})")]
    QuadratureFailure { estimate: f64, error: f64 },

    #[error("unknown weighting scheme `{0}`")]
    UnknownScheme(String),

    #[error("invalid weight function: {0}")]
    InvalidPhi(String),

    #[error("weight computation produced a non-finite value")]
    NumericOverflow,

    #[error("k grid is empty")]
    EmptyGrid,

    #[error("corruption of kind {0} requires context that was not supplied")]
    MissingContext(&'static str),

    #[error("invalid experiment specification: {0}")]
    InvalidSpec(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("non-numeric feature `{value}` at row {row}, column {column}")]
    NonNumericFeature {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("label `{value}` at row {row} cannot be mapped to {{0, 1}}")]
    UnknownLabel { row: usize, value: String },

    #[error("split leaves an empty side (train {train}, test {test})")]
    DegenerateSplit { train: usize, test: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the command-line front end:
    /// 2 for configuration problems, 3 for data problems, 4 for numeric ones.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DomainError(_) | Error::QuadratureFailure { .. } | Error::NumericOverflow => 4,
            Error::InvalidDataset(_)
            | Error::Parse { .. }
            | Error::NonNumericFeature { .. }
            | Error::UnknownLabel { .. }
            | Error::DegenerateSplit { .. }
            | Error::Io(_) => 3,
            _ => 2,
        }
    }
}
