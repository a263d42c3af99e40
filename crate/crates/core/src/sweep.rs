//! Grid runs of the stability pipeline over kernel width, ridge penalty,
//! sample size and feature count.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blackbox::Predictor;
use crate::config::{default_kernel_width, ExplainerConfig};
use crate::data::FeatureStats;
use crate::error::{ConfigError, Result};
use crate::explainer::Explainer;

/// Mean and standard deviation of a uniform `[0, 1]` feature, used for the
/// synthetic feature-count axis.
pub const SYNTHETIC_MEAN: f64 = 0.5;
pub const SYNTHETIC_STD: f64 = 0.288_675_134_594_812_9;

/// Where the feature statistics and query point of each cell come from.
#[derive(Debug, Clone)]
pub enum SweepSource {
    /// A real dataset: every cell uses these statistics and this point.
    Fixed { stats: FeatureStats, point: Vec<f64> },
    /// Independent uniform-like features; one block of cells per entry of
    /// `dims`, explained at the feature means.
    Synthetic { dims: Vec<usize> },
}

#[derive(Debug, Clone)]
pub struct SweepGrid {
    /// `None` stands for the default width of each cell's feature count.
    pub kernel_widths: Vec<Option<f64>>,
    pub ridge_penalties: Vec<f64>,
    pub num_samples: Vec<usize>,
    /// Settings not swept (`p`, `m`, seed, flags).
    pub base: ExplainerConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub kernel_width: f64,
    pub ridge_penalty: f64,
    pub num_samples: usize,
    pub dims: usize,
    pub num_features: usize,
    pub repeats: usize,
    pub vsi: Option<f64>,
    pub csi: Option<f64>,
    pub scored_features: Option<usize>,
    /// Set when the cell's run failed; the rest of the grid still runs.
    pub error: Option<String>,
}

struct CellSpec {
    dims: usize,
    stats: FeatureStats,
    point: Vec<f64>,
    config: ExplainerConfig,
}

fn cell_specs(source: &SweepSource, grid: &SweepGrid) -> Result<Vec<CellSpec>> {
    if grid.kernel_widths.is_empty() || grid.ridge_penalties.is_empty() || grid.num_samples.is_empty() {
        return Err(ConfigError::Invalid("empty sweep grid".into()).into());
    }
    let blocks: Vec<(FeatureStats, Vec<f64>)> = match source {
        SweepSource::Fixed { stats, point } => vec![(stats.clone(), point.clone())],
        SweepSource::Synthetic { dims } => {
            if dims.is_empty() {
                return Err(ConfigError::Invalid("empty sweep grid".into()).into());
            }
            dims.iter()
                .map(|&d| {
                    if d == 0 {
                        return Err(ConfigError::ZeroFeatures.into());
                    }
                    let stats = FeatureStats::new(vec![SYNTHETIC_MEAN; d], vec![SYNTHETIC_STD; d])?;
                    Ok((stats, vec![SYNTHETIC_MEAN; d]))
                })
                .collect::<Result<_>>()?
        }
    };
    let mut specs = Vec::new();
    for (stats, point) in blocks {
        let dims = stats.dims();
        for &n in &grid.num_samples {
            for &kw in &grid.kernel_widths {
                for &lambda in &grid.ridge_penalties {
                    let config = ExplainerConfig {
                        num_samples: n,
                        kernel_width: kw.unwrap_or_else(|| default_kernel_width(dims)),
                        ridge_penalty: lambda,
                        ..grid.base.clone()
                    };
                    config.validate(dims)?;
                    specs.push(CellSpec {
                        dims,
                        stats: stats.clone(),
                        point: point.clone(),
                        config,
                    });
                }
            }
        }
    }
    Ok(specs)
}

/// Runs every cell, at most `jobs` at a time. Cells come back in grid order
/// (feature count, then sample size, kernel width, penalty) regardless of
/// scheduling. Invalid cell settings abort before anything runs; runtime
/// failures are recorded per cell.
pub fn run_sweep(predictor: &dyn Predictor, source: &SweepSource, grid: &SweepGrid, jobs: usize) -> Result<Vec<SweepCell>> {
    let specs = cell_specs(source, grid)?;
    for s in &specs {
        predictor.accepts(s.dims)?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| ConfigError::Invalid(format!("thread pool: {e}")))?;
    let cells = pool.install(|| {
        specs
            .par_iter()
            .map(|s| {
                let mut cell = SweepCell {
                    kernel_width: s.config.kernel_width,
                    ridge_penalty: s.config.ridge_penalty,
                    num_samples: s.config.num_samples,
                    dims: s.dims,
                    num_features: s.config.num_features,
                    repeats: s.config.repeats,
                    vsi: None,
                    csi: None,
                    scored_features: None,
                    error: None,
                };
                let run = Explainer::unnamed(predictor, s.stats.clone(), s.config.clone())
                    .and_then(|e| e.stability_run(&s.point));
                match run {
                    Ok(r) => {
                        cell.vsi = Some(r.vsi);
                        cell.csi = Some(r.csi);
                        cell.scored_features = Some(r.par.len());
                    }
                    Err(e) => cell.error = Some(e.to_string()),
                }
                cell
            })
            .collect()
    });
    Ok(cells)
}

/// Plot-ready CSV, one row per cell. Contains no timing, so equal inputs
/// give equal bytes.
pub fn write_sweep_csv<W: Write>(cells: &[SweepCell], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "kernel_width",
        "ridge_penalty",
        "num_samples",
        "dims",
        "num_features",
        "repeats",
        "vsi",
        "csi",
        "scored_features",
        "error",
    ])
    .map_err(csv_err)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for c in cells {
        w.write_record([
            c.kernel_width.to_string(),
            c.ridge_penalty.to_string(),
            c.num_samples.to_string(),
            c.dims.to_string(),
            c.num_features.to_string(),
            c.repeats.to_string(),
            opt(c.vsi),
            opt(c.csi),
            c.scored_features.map(|v| v.to_string()).unwrap_or_default(),
            c.error.clone().unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> crate::error::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => std::io::Error::other(format!("{other:?}")).into(),
    }
}
