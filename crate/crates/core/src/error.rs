//! Error types shared across the pipeline.

use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse error class, used for CLI exit codes and the C ABI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Predictor,
    Numeric,
    Io,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 2,
            ErrorClass::Data => 3,
            ErrorClass::Predictor => 4,
            ErrorClass::Numeric => 5,
            ErrorClass::Io => 6,
        }
    }
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("missing header row")]
    MissingHeader,
    #[error("empty column name at position {0}")]
    EmptyHeader(usize),
    #[error("duplicate column name {0:?}")]
    DuplicateHeader(String),
    #[error("no data rows")]
    EmptyBody,
    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}, column {column:?}: {value:?} is not a number")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}, column {column:?}: non-finite value {value:?}")]
    NonFinite {
        row: usize,
        column: String,
        value: String,
    },
    #[error("target column {0:?} not found")]
    MissingTarget(String),
    #[error("dataset needs at least {needed} {what}, found {found}")]
    TooSmall {
        what: &'static str,
        needed: usize,
        found: usize,
    },
    #[error("row index {index} out of range for {rows} rows")]
    RowOutOfRange { index: usize, rows: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("num_features must be at least 1")]
    ZeroFeatures,
    #[error("num_features {p} exceeds the {dims} available features")]
    TooManyFeatures { p: usize, dims: usize },
    #[error("num_samples {n} must exceed num_features {p}")]
    TooFewSamples { n: usize, p: usize },
    #[error("kernel_width must be finite and positive, got {0}")]
    KernelWidth(f64),
    #[error("ridge_penalty must be finite and non-negative, got {0}")]
    RidgePenalty(f64),
    #[error("repeats must be at least 2, got {0}")]
    TooFewRepeats(usize),
    #[error("expected {expected} values, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum PredictorError {
    #[error("unknown builtin predictor {0:?}")]
    UnknownBuiltin(String),
    #[error("bad predictor spec {spec:?}: {reason}")]
    BadSpec { spec: String, reason: String },
    #[error("predictor expects {expected} features, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("failed to start model process: {0}")]
    Spawn(#[source] std::io::Error),
    #[error("model process i/o failure: {0}")]
    Io(#[source] std::io::Error),
    #[error("handshake failed: {0}")]
    Handshake(String),
    #[error("model process timed out after {0:?}")]
    Timeout(std::time::Duration),
    #[error("model process exited unexpectedly")]
    Exited,
    #[error("malformed response line {line}: {content:?}")]
    Malformed { line: usize, content: String },
    #[error("expected {expected} predictions, got {got}")]
    CountMismatch { expected: usize, got: usize },
    #[error("non-finite prediction for row {row}")]
    NonFinite { row: usize },
}

#[derive(Debug, Error)]
pub enum NumericError {
    #[error("weighted design is singular (condition number {condition:.3e})")]
    Singular { condition: f64 },
    #[error("lasso path exhausted with {} active features, wanted {wanted}", active.len())]
    SelectionFailed { active: Vec<usize>, wanted: usize },
    #[error("negative variance {0}")]
    NegativeVariance(f64),
    #[error("CSI undefined: no feature was selected by at least two models")]
    CsiUndefined,
    #[error("inconsistent ensemble: {0}")]
    Ensemble(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

/// Pipeline stage, attached to errors raised while explaining a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Sampling,
    Prediction,
    Locality,
    Selection,
    Ridge,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Sampling => "sampling",
            Stage::Prediction => "prediction",
            Stage::Locality => "locality weighting",
            Stage::Selection => "feature selection",
            Stage::Ridge => "weighted ridge",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Predictor(#[from] PredictorError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
    #[error("repeat {index} failed: {source}")]
    Repeat {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Data(_) => ErrorClass::Data,
            Error::Config(_) => ErrorClass::Config,
            Error::Predictor(_) => ErrorClass::Predictor,
            Error::Numeric(_) => ErrorClass::Numeric,
            Error::Stage { source, .. } | Error::Repeat { source, .. } => source.class(),
            Error::Io(_) | Error::Serde(_) => ErrorClass::Io,
        }
    }

    pub(crate) fn at(stage: Stage) -> impl FnOnce(Error) -> Error {
        move |e| Error::Stage {
            stage,
            source: Box::new(e),
        }
    }
}
