//! Machine-readable run reports.
//!
//! Every report is one JSON document carrying a [`RunManifest`] with enough
//! information to rerun it. Explanation and stability reports also have a
//! long-format CSV rendering with columns `record,repeat,feature,value`.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExplainerConfig;
use crate::data::FeatureStats;
use crate::error::Result;
use crate::explainer::Explanation;
use crate::model::StabilityReport;
use crate::sweep::{csv_err, SweepCell};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_NAME: &str = "limestab";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRef {
    /// Absolute path at the time of the run.
    pub path: String,
    pub sha256: String,
    pub target_column: Option<String>,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuerySpec {
    /// Dataset row the point was taken from, if any.
    pub row: Option<usize>,
    pub point: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// `None` entries mean "default width for the cell's feature count".
    pub kernel_widths: Vec<Option<f64>>,
    pub ridge_penalties: Vec<f64>,
    pub num_samples: Vec<usize>,
    /// Synthetic feature counts; empty when the sweep ran on a dataset.
    pub dims: Vec<usize>,
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub config: ExplainerConfig,
    pub predictor: String,
    pub dataset: Option<DatasetRef>,
    pub feature_names: Vec<String>,
    /// Sampling statistics actually used; lets a run be replayed without
    /// the dataset file.
    pub feature_stats: Option<FeatureStats>,
    pub query: Option<QuerySpec>,
    pub sweep: Option<SweepSpec>,
    /// Seconds since the Unix epoch; zero in reproducible mode.
    pub started_unix: u64,
    pub finished_unix: u64,
    pub reproducible: bool,
}

impl RunManifest {
    pub fn new(command: &str, config: ExplainerConfig, predictor: String) -> Self {
        Self {
            tool: TOOL_NAME.into(),
            tool_version: TOOL_VERSION.into(),
            command: command.into(),
            config,
            predictor,
            dataset: None,
            feature_names: Vec::new(),
            feature_stats: None,
            query: None,
            sweep: None,
            started_unix: 0,
            finished_unix: 0,
            reproducible: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReportBody {
    Explanation {
        black_box_prediction: f64,
        explanation: Explanation,
    },
    Stability {
        stability: StabilityReport,
    },
    Sweep {
        cells: Vec<SweepCell>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "WireReport", try_from = "WireReport")]
pub struct Report {
    pub schema_version: u32,
    pub manifest: RunManifest,
    pub body: ReportBody,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ReportKind {
    Explanation,
    Stability,
    Sweep,
}

/// On-disk layout: `kind` at the top level next to the kind's payload.
#[derive(Serialize, Deserialize)]
struct WireReport {
    schema_version: u32,
    kind: ReportKind,
    manifest: RunManifest,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    black_box_prediction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    explanation: Option<Explanation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stability: Option<StabilityReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cells: Option<Vec<SweepCell>>,
}

impl From<Report> for WireReport {
    fn from(r: Report) -> Self {
        let mut w = WireReport {
            schema_version: r.schema_version,
            kind: ReportKind::Sweep,
            manifest: r.manifest,
            black_box_prediction: None,
            explanation: None,
            stability: None,
            cells: None,
        };
        match r.body {
            ReportBody::Explanation {
                black_box_prediction,
                explanation,
            } => {
                w.kind = ReportKind::Explanation;
                w.black_box_prediction = Some(black_box_prediction);
                w.explanation = Some(explanation);
            }
            ReportBody::Stability { stability } => {
                w.kind = ReportKind::Stability;
                w.stability = Some(stability);
            }
            ReportBody::Sweep { cells } => w.cells = Some(cells),
        }
        w
    }
}

impl TryFrom<WireReport> for Report {
    type Error = String;

    fn try_from(w: WireReport) -> std::result::Result<Self, String> {
        if w.schema_version != SCHEMA_VERSION {
            return Err(format!("unsupported schema_version {}", w.schema_version));
        }
        let missing = |field: &str| format!("{:?} report without {field:?}", w.kind);
        let body = match w.kind {
            ReportKind::Explanation => ReportBody::Explanation {
                black_box_prediction: w.black_box_prediction.ok_or_else(|| missing("black_box_prediction"))?,
                explanation: w.explanation.ok_or_else(|| missing("explanation"))?,
            },
            ReportKind::Stability => ReportBody::Stability {
                stability: w.stability.ok_or_else(|| missing("stability"))?,
            },
            ReportKind::Sweep => ReportBody::Sweep {
                cells: w.cells.ok_or_else(|| missing("cells"))?,
            },
        };
        Ok(Report {
            schema_version: w.schema_version,
            manifest: w.manifest,
            body,
        })
    }
}

impl Report {
    pub fn new(manifest: RunManifest, body: ReportBody) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            manifest,
            body,
        }
    }

    /// Zeroes timestamps and wall time so identical runs serialize to
    /// identical bytes.
    pub fn make_reproducible(&mut self) {
        self.manifest.reproducible = true;
        self.manifest.started_unix = 0;
        self.manifest.finished_unix = 0;
        if let ReportBody::Stability { stability } = &mut self.body {
            stability.wall_time_seconds = 0.0;
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn feature_name(&self, index: usize) -> String {
        self.manifest
            .feature_names
            .get(index)
            .cloned()
            .unwrap_or_else(|| format!("x{index}"))
    }

    /// Long-format CSV. Sweep reports use [`crate::sweep::write_sweep_csv`]
    /// instead.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["record", "repeat", "feature", "value"]).map_err(csv_err)?;
        let mut put = |record: &str, repeat: Option<usize>, feature: &str, value: String| {
            let repeat = repeat.map(|r| r.to_string()).unwrap_or_default();
            w.write_record([record, &repeat, feature, &value]).map_err(csv_err)
        };
        match &self.body {
            ReportBody::Explanation {
                black_box_prediction,
                explanation: e,
            } => {
                put("intercept", None, "", e.local_model.intercept.to_string())?;
                put("lime_prediction", None, "", e.lime_prediction.to_string())?;
                put("black_box_prediction", None, "", black_box_prediction.to_string())?;
                put("sigma2_hat", None, "", e.local_model.sigma2_hat.to_string())?;
                for c in &e.feature_contributions {
                    for (record, v) in [
                        ("contribution", c.contribution),
                        ("coefficient", c.coefficient),
                        ("raw_coefficient", c.raw_coefficient),
                        ("variance", c.variance),
                        ("ci_lower", c.interval.lower),
                        ("ci_upper", c.interval.upper),
                        ("standardized_value", c.standardized_value),
                    ] {
                        put(record, None, &c.name, v.to_string())?;
                    }
                }
            }
            ReportBody::Stability { stability: s } => {
                put("vsi", None, "", s.vsi.to_string())?;
                put("csi", None, "", s.csi.to_string())?;
                put("wall_time_seconds", None, "", s.wall_time_seconds.to_string())?;
                for (&j, &par) in &s.par {
                    put("par", None, &self.feature_name(j), par.to_string())?;
                }
                for &j in &s.excluded_features {
                    put("excluded_feature", None, &self.feature_name(j), j.to_string())?;
                }
                for (r, m) in s.models.iter().enumerate() {
                    put("intercept", Some(r), "", m.intercept.to_string())?;
                    put("sigma2_hat", Some(r), "", m.sigma2_hat.to_string())?;
                    for (&j, &b) in &m.coefficients {
                        let name = self.feature_name(j);
                        put("coefficient", Some(r), &name, b.to_string())?;
                        put("variance", Some(r), &name, m.coef_variances[&j].to_string())?;
                    }
                }
            }
            ReportBody::Sweep { .. } => {
                return Err(std::io::Error::other("sweep reports are written with write_sweep_csv").into())
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Plain-text summary for terminals.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let cfg = &self.manifest.config;
        match &self.body {
            ReportBody::Explanation {
                black_box_prediction,
                explanation: e,
            } => {
                let width = e.feature_contributions.iter().map(|c| c.name.len()).max().unwrap_or(7).max(7);
                let _ = writeln!(out, "{:<width$}  {:>12}  {:>12}  {:>25}", "feature", "contribution", "coefficient", "95% interval");
                for c in &e.feature_contributions {
                    let _ = writeln!(
                        out,
                        "{:<width$}  {:>12.6}  {:>12.6}  [{:>11.6}, {:>11.6}]",
                        c.name, c.contribution, c.coefficient, c.interval.lower, c.interval.upper
                    );
                }
                let _ = writeln!(out, "intercept            {:.6}", e.local_model.intercept);
                let _ = writeln!(out, "LIME prediction      {:.6}", e.lime_prediction);
                let _ = writeln!(out, "black-box prediction {:.6}", black_box_prediction);
            }
            ReportBody::Stability { stability: s } => {
                let _ = writeln!(out, "m={} p={} n={} kernel_width={} ridge_penalty={}", cfg.repeats, cfg.num_features, cfg.num_samples, cfg.kernel_width, cfg.ridge_penalty);
                let _ = writeln!(out, "VSI {:.2}", s.vsi);
                let _ = writeln!(out, "CSI {:.2}", s.csi);
                let _ = writeln!(out, "partial index per feature:");
                for (&j, &par) in &s.par {
                    let _ = writeln!(out, "  {:<28} {:.4}", self.feature_name(j), par);
                }
                if !s.excluded_features.is_empty() {
                    let names: Vec<String> = s.excluded_features.iter().map(|&j| self.feature_name(j)).collect();
                    let _ = writeln!(out, "excluded (selected fewer than twice): {}", names.join(", "));
                }
                let _ = writeln!(out, "wall time {:.3} s", s.wall_time_seconds);
            }
            ReportBody::Sweep { cells } => {
                let _ = writeln!(out, "{} cells, {} failed", cells.len(), cells.iter().filter(|c| c.error.is_some()).count());
            }
        }
        out
    }
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Hex SHA-256 of a file's bytes.
pub fn file_sha256(path: impl AsRef<Path>) -> std::io::Result<String> {
    let bytes = fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
