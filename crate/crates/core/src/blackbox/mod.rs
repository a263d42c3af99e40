//! Batch prediction contract for the model being explained.
//!
//! A predictor maps a `k × P` matrix to `k` real scores. Two families are
//! provided: analytic [`Builtin`] functions evaluated in-process and
//! [`ExternalPredictor`], a child process speaking a line protocol over its
//! standard streams.

mod builtin;
mod external;

use nalgebra::DMatrix;

pub use builtin::{builtin_catalog, Builtin, CatalogEntry};
pub use external::{ExternalOptions, ExternalPredictor, END_MARKER, DEFAULT_BATCH_LIMIT, DEFAULT_TIMEOUT};

use crate::error::PredictorError;

pub trait Predictor: Send + Sync {
    /// Exact feature count the predictor requires, if it has one.
    fn dims(&self) -> Option<usize>;

    /// Smallest feature count accepted when `dims` is `None`.
    fn min_dims(&self) -> usize {
        1
    }

    /// Scores every row. Implementations return one value per row, in order;
    /// [`predict`] validates that contract.
    fn predict_rows(&self, points: &DMatrix<f64>) -> Result<Vec<f64>, PredictorError>;

    /// Descriptor string that reconstructs this predictor (`builtin:...` or
    /// `cmd:...`).
    fn descriptor(&self) -> String;

    fn accepts(&self, dims: usize) -> Result<(), PredictorError> {
        match self.dims() {
            Some(d) if d != dims => Err(PredictorError::Dimension {
                expected: d,
                found: dims,
            }),
            None if dims < self.min_dims() => Err(PredictorError::Dimension {
                expected: self.min_dims(),
                found: dims,
            }),
            _ => Ok(()),
        }
    }
}

/// Predicts `points` and checks the result: one finite value per row.
pub fn predict(predictor: &dyn Predictor, points: &DMatrix<f64>) -> Result<Vec<f64>, PredictorError> {
    predictor.accepts(points.ncols())?;
    let out = predictor.predict_rows(points)?;
    if out.len() != points.nrows() {
        return Err(PredictorError::CountMismatch {
            expected: points.nrows(),
            got: out.len(),
        });
    }
    if let Some(row) = out.iter().position(|v| !v.is_finite()) {
        return Err(PredictorError::NonFinite { row });
    }
    Ok(out)
}

/// Parses `builtin:<spec>` or `cmd:<argv>` (whitespace-separated argv).
pub fn parse_predictor(descriptor: &str, options: ExternalOptions) -> Result<Box<dyn Predictor>, PredictorError> {
    if let Some(spec) = descriptor.strip_prefix("builtin:") {
        Ok(Box::new(Builtin::parse(spec)?))
    } else if let Some(cmd) = descriptor.strip_prefix("cmd:") {
        let argv: Vec<String> = cmd.split_whitespace().map(str::to_string).collect();
        if argv.is_empty() {
            return Err(PredictorError::BadSpec {
                spec: descriptor.to_string(),
                reason: "empty command".into(),
            });
        }
        Ok(Box::new(ExternalPredictor::spawn(argv, options)?))
    } else {
        Err(PredictorError::BadSpec {
            spec: descriptor.to_string(),
            reason: "expected builtin:<spec> or cmd:<argv>".into(),
        })
    }
}
