//! Tabular data ingestion.
//!
//! Datasets are header-first, comma-separated, numeric CSV files. The
//! optional target column is split out on load; every other column becomes a
//! feature, in file order.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::DataError;

/// Training data: `n_train × P` feature matrix plus an optional target.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    rows: DMatrix<f64>,
    target: Option<(String, Vec<f64>)>,
}

impl Dataset {
    /// Builds a dataset after checking every invariant (unique non-empty
    /// names, finite values, `P >= 1`, `n_train >= 2`).
    pub fn new(
        feature_names: Vec<String>,
        rows: DMatrix<f64>,
        target: Option<(String, Vec<f64>)>,
    ) -> Result<Self, DataError> {
        check_names(feature_names.iter().map(String::as_str))?;
        if feature_names.len() != rows.ncols() {
            return Err(DataError::RaggedRow {
                row: 0,
                expected: feature_names.len(),
                found: rows.ncols(),
            });
        }
        if rows.ncols() < 1 {
            return Err(DataError::TooSmall {
                what: "feature columns",
                needed: 1,
                found: 0,
            });
        }
        if rows.nrows() < 2 {
            return Err(DataError::TooSmall {
                what: "rows",
                needed: 2,
                found: rows.nrows(),
            });
        }
        for i in 0..rows.nrows() {
            for (j, name) in feature_names.iter().enumerate() {
                let v = rows[(i, j)];
                if !v.is_finite() {
                    return Err(DataError::NonFinite {
                        row: i,
                        column: name.clone(),
                        value: v.to_string(),
                    });
                }
            }
        }
        if let Some((name, values)) = &target {
            if values.len() != rows.nrows() {
                return Err(DataError::RaggedRow {
                    row: values.len(),
                    expected: rows.nrows(),
                    found: values.len(),
                });
            }
            if let Some(i) = values.iter().position(|v| !v.is_finite()) {
                return Err(DataError::NonFinite {
                    row: i,
                    column: name.clone(),
                    value: values[i].to_string(),
                });
            }
        }
        Ok(Self {
            feature_names,
            rows,
            target,
        })
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Feature matrix, one row per training record.
    pub fn rows(&self) -> &DMatrix<f64> {
        &self.rows
    }

    pub fn target(&self) -> Option<&[f64]> {
        self.target.as_ref().map(|(_, v)| v.as_slice())
    }

    pub fn target_name(&self) -> Option<&str> {
        self.target.as_ref().map(|(n, _)| n.as_str())
    }

    /// Number of features `P`.
    pub fn dims(&self) -> usize {
        self.rows.ncols()
    }

    pub fn len(&self) -> usize {
        self.rows.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.nrows() == 0
    }

    /// Copy of training row `index`.
    pub fn row(&self, index: usize) -> Result<Vec<f64>, DataError> {
        if index >= self.len() {
            return Err(DataError::RowOutOfRange {
                index,
                rows: self.len(),
            });
        }
        Ok(self.rows.row(index).iter().copied().collect())
    }
}

/// Per-feature Gaussian parameters inferred from training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl FeatureStats {
    pub fn new(means: Vec<f64>, stds: Vec<f64>) -> Result<Self, DataError> {
        if means.len() != stds.len() {
            return Err(DataError::RaggedRow {
                row: 0,
                expected: means.len(),
                found: stds.len(),
            });
        }
        if means.is_empty() {
            return Err(DataError::TooSmall {
                what: "feature columns",
                needed: 1,
                found: 0,
            });
        }
        for (j, (&m, &s)) in means.iter().zip(&stds).enumerate() {
            if !m.is_finite() || !s.is_finite() || s < 0.0 {
                return Err(DataError::NonFinite {
                    row: 0,
                    column: format!("feature {j}"),
                    value: format!("mean={m}, std={s}"),
                });
            }
        }
        Ok(Self { means, stds })
    }

    pub fn dims(&self) -> usize {
        self.means.len()
    }
}

fn check_names<'a>(names: impl Iterator<Item = &'a str>) -> Result<(), DataError> {
    let mut seen = HashSet::new();
    for (i, name) in names.enumerate() {
        if name.trim().is_empty() {
            return Err(DataError::EmptyHeader(i));
        }
        if !seen.insert(name) {
            return Err(DataError::DuplicateHeader(name.to_string()));
        }
    }
    Ok(())
}

/// Loads a CSV file. Row numbers in errors are 0-based data-row indices
/// (the header is not counted).
pub fn load_dataset(path: impl AsRef<Path>, target_column: Option<&str>) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_dataset(file, target_column)
}

pub fn read_dataset<R: Read>(reader: R, target_column: Option<&str>) -> Result<Dataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| DataError::Csv(e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(DataError::MissingHeader);
    }
    check_names(headers.iter().map(String::as_str))?;

    let target_idx = match target_column {
        Some(name) => Some(
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| DataError::MissingTarget(name.to_string()))?,
        ),
        None => None,
    };

    let width = headers.len();
    let mut values = Vec::new();
    let mut n_rows = 0usize;
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| DataError::Csv(e.to_string()))?;
        if record.len() != width {
            return Err(DataError::RaggedRow {
                row,
                expected: width,
                found: record.len(),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            let v: f64 = cell.parse().map_err(|_| DataError::NonNumeric {
                row,
                column: headers[j].clone(),
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(DataError::NonFinite {
                    row,
                    column: headers[j].clone(),
                    value: cell.to_string(),
                });
            }
            values.push(v);
        }
        n_rows += 1;
    }
    if n_rows == 0 {
        return Err(DataError::EmptyBody);
    }

    let feature_cols: Vec<usize> = (0..width).filter(|&j| Some(j) != target_idx).collect();
    let rows = DMatrix::from_fn(n_rows, feature_cols.len(), |i, k| {
        values[i * width + feature_cols[k]]
    });
    let names = feature_cols.iter().map(|&j| headers[j].clone()).collect();
    let target = target_idx.map(|t| {
        (
            headers[t].clone(),
            (0..n_rows).map(|i| values[i * width + t]).collect(),
        )
    });
    Dataset::new(names, rows, target)
}

/// Writes the dataset as CSV, target column last. Values use the shortest
/// representation that parses back to the identical `f64`.
pub fn write_dataset<W: Write>(dataset: &Dataset, writer: W) -> Result<(), DataError> {
    let mut wtr = csv::Writer::from_writer(writer);
    let csv_err = |e: csv::Error| DataError::Csv(e.to_string());
    let mut header: Vec<&str> = dataset.feature_names.iter().map(String::as_str).collect();
    if let Some(name) = dataset.target_name() {
        header.push(name);
    }
    wtr.write_record(&header).map_err(csv_err)?;
    let mut record = Vec::with_capacity(header.len());
    for i in 0..dataset.len() {
        record.clear();
        record.extend(dataset.rows.row(i).iter().map(|v| v.to_string()));
        if let Some(t) = dataset.target() {
            record.push(t[i].to_string());
        }
        wtr.write_record(&record).map_err(csv_err)?;
    }
    wtr.flush().map_err(|e| DataError::Csv(e.to_string()))?;
    Ok(())
}
