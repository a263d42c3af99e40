//! The `limestab` command line.
//!
//! Exit codes: 0 success (a report was written), 2 configuration or usage
//! error, 3 data error, 4 predictor error, 5 numerical failure, 6 I/O error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::blackbox::{builtin_catalog, parse_predictor, predict, ExternalOptions, DEFAULT_BATCH_LIMIT};
use crate::config::{
    default_kernel_width, ExplainerConfig, DEFAULT_NUM_FEATURES, DEFAULT_NUM_SAMPLES, DEFAULT_REPEATS,
    DEFAULT_RIDGE_PENALTY, DEFAULT_SEED,
};
use crate::data::{load_dataset, write_dataset, FeatureStats};
use crate::error::{ConfigError, ErrorClass, Result};
use crate::explainer::Explainer;
use crate::report::{file_sha256, unix_now, DatasetRef, QuerySpec, Report, ReportBody, RunManifest, SweepSpec};
use crate::sampling::{derive_seed, infer_feature_stats};
use crate::sweep::{run_sweep, write_sweep_csv, SweepGrid, SweepSource};
use crate::synth;

#[derive(Debug, Parser)]
#[command(name = "limestab", version, about = "Tabular LIME explanations and their stability indices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Explain one prediction with a local linear surrogate.
    Explain(ExplainArgs),
    /// Repeat the explanation and score its stability (VSI, CSI).
    Stability(ExplainArgs),
    /// Run the stability pipeline over a parameter grid.
    Sweep(SweepArgs),
    /// List the builtin predictors.
    Catalog,
    /// Write the synthetic credit dataset as CSV.
    GenerateData(GenerateArgs),
    /// Rerun the computation recorded in a JSON report's manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV file with a header row; feature statistics are inferred from it.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Column to drop from the features (e.g. the label).
    #[arg(long)]
    pub target_col: Option<String>,
    /// 0-based data row to explain.
    #[arg(long, conflicts_with = "point")]
    pub row: Option<usize>,
    /// Point to explain, as comma-separated feature values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
    pub point: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// `builtin:<spec>` (see `catalog`) or `cmd:<program and arguments>`.
    #[arg(long)]
    pub predictor: String,
    /// Model processes to start for a `cmd:` predictor.
    #[arg(long, default_value_t = 1)]
    pub model_processes: usize,
    /// Per-request timeout for a `cmd:` predictor.
    #[arg(long, default_value_t = 60)]
    pub timeout_secs: u64,
    /// Maximum rows per request to a `cmd:` predictor.
    #[arg(long, default_value_t = DEFAULT_BATCH_LIMIT)]
    pub batch_limit: usize,
}

#[derive(Debug, Args)]
pub struct TuningArgs {
    #[arg(long, default_value_t = DEFAULT_NUM_SAMPLES)]
    pub num_samples: usize,
    #[arg(long, default_value_t = DEFAULT_NUM_FEATURES)]
    pub num_features: usize,
    /// Defaults to 0.75 * sqrt(number of features).
    #[arg(long)]
    pub kernel_width: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_RIDGE_PENALTY)]
    pub ridge_penalty: f64,
    #[arg(long, default_value_t = DEFAULT_REPEATS)]
    pub repeats: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Use the query point itself as the first perturbation sample.
    #[arg(long)]
    pub include_query_point: bool,
    /// Select features with an unweighted lasso.
    #[arg(long)]
    pub unweighted_selection: bool,
}

impl TuningArgs {
    fn config(&self, dims: usize) -> ExplainerConfig {
        ExplainerConfig {
            num_samples: self.num_samples,
            num_features: self.num_features,
            kernel_width: self.kernel_width.unwrap_or_else(|| default_kernel_width(dims)),
            ridge_penalty: self.ridge_penalty,
            repeats: self.repeats,
            master_seed: self.seed,
            include_query_point: self.include_query_point,
            unweighted_selection: self.unweighted_selection,
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Report format; defaults to json (csv for sweeps).
    #[arg(long, value_enum)]
    pub output: Option<OutputFormat>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Zero timestamps and wall time so identical runs give identical bytes.
    #[arg(long)]
    pub reproducible: bool,
    /// Do not print the summary table.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub tuning: TuningArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub tuning: TuningArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Kernel widths; `default` means 0.75 * sqrt(features) per cell.
    #[arg(long, value_delimiter = ',', default_value = "default")]
    pub kernel_widths: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub ridge_penalties: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "5000")]
    pub sample_sizes: Vec<usize>,
    /// Synthetic feature counts (used when --data is absent).
    #[arg(long, value_delimiter = ',')]
    pub dims: Vec<usize>,
    /// Grid cells run concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = synth::DEFAULT_ROWS)]
    pub rows: usize,
    #[arg(long, default_value_t = synth::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// JSON report whose manifest is rerun.
    pub report: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ErrorClass::Config.exit_code() } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.class().exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Explain(a) => {
            let plan = Plan::from_args("explain", &a.data, &a.model, &a.tuning, None)?;
            emit(plan.execute()?, &a.output)
        }
        Command::Stability(a) => {
            let plan = Plan::from_args("stability", &a.data, &a.model, &a.tuning, None)?;
            emit(plan.execute()?, &a.output)
        }
        Command::Sweep(a) => {
            let kernel_widths = a
                .kernel_widths
                .iter()
                .map(|s| parse_width(s))
                .collect::<Result<Vec<_>>>()?;
            let spec = SweepSpec {
                kernel_widths,
                ridge_penalties: a.ridge_penalties.clone(),
                num_samples: a.sample_sizes.clone(),
                dims: a.dims.clone(),
                jobs: a.jobs,
            };
            let plan = Plan::from_args("sweep", &a.data, &a.model, &a.tuning, Some(spec))?;
            emit(plan.execute()?, &a.output)
        }
        Command::Catalog => {
            let mut out = io::stdout().lock();
            for entry in builtin_catalog() {
                writeln!(out, "builtin:{:<32} {}", entry.syntax, entry.description)?;
            }
            Ok(())
        }
        Command::GenerateData(a) => {
            let ds = synth::credit_dataset(a.rows, a.seed);
            match &a.out {
                Some(p) => write_dataset(&ds, fs::File::create(p)?)?,
                None => write_dataset(&ds, io::stdout().lock())?,
            }
            Ok(())
        }
        Command::Replay(a) => {
            let text = fs::read_to_string(&a.report)?;
            let original = Report::from_json(&text)?;
            let plan = Plan::from_manifest(&original.manifest)?;
            let mut output = a.output;
            output.reproducible |= original.manifest.reproducible;
            emit(plan.execute()?, &output)
        }
    }
}

fn parse_width(s: &str) -> Result<Option<f64>> {
    if s.trim() == "default" {
        return Ok(None);
    }
    s.trim()
        .parse::<f64>()
        .map(Some)
        .map_err(|_| ConfigError::Invalid(format!("bad kernel width {s:?}")).into())
}

/// Everything needed to run one command, resolved from flags or a manifest.
struct Plan {
    manifest: RunManifest,
    external: ExternalOptions,
}

impl Plan {
    fn from_args(
        command: &str,
        data: &DataArgs,
        model: &ModelArgs,
        tuning: &TuningArgs,
        sweep: Option<SweepSpec>,
    ) -> Result<Self> {
        let synthetic = sweep.as_ref().is_some_and(|s| data.data.is_none() && !s.dims.is_empty());
        let mut manifest;
        if synthetic {
            if data.row.is_some() || data.point.is_some() {
                return Err(ConfigError::Invalid("--row/--point need --data".into()).into());
            }
            let dims = sweep.as_ref().map(|s| s.dims[0]).unwrap_or(1);
            manifest = RunManifest::new(command, tuning.config(dims), model.predictor.clone());
        } else {
            let path = data
                .data
                .as_ref()
                .ok_or_else(|| ConfigError::Invalid("--data is required".into()))?;
            if sweep.as_ref().is_some_and(|s| !s.dims.is_empty()) {
                return Err(ConfigError::Invalid("--dims is only for synthetic sweeps (without --data)".into()).into());
            }
            let ds = load_dataset(path, data.target_col.as_deref())?;
            let (row, point) = match (data.row, &data.point) {
                (Some(r), None) => (Some(r), ds.row(r)?),
                (None, Some(p)) => (None, p.clone()),
                _ => return Err(ConfigError::Invalid("exactly one of --row or --point is required".into()).into()),
            };
            manifest = RunManifest::new(command, tuning.config(ds.dims()), model.predictor.clone());
            let abs = fs::canonicalize(path).unwrap_or_else(|_| path.clone());
            manifest.dataset = Some(DatasetRef {
                path: abs.display().to_string(),
                sha256: file_sha256(path)?,
                target_column: data.target_col.clone(),
                rows: ds.len(),
            });
            manifest.feature_names = ds.feature_names().to_vec();
            manifest.feature_stats = Some(infer_feature_stats(&ds));
            manifest.query = Some(QuerySpec { row, point });
        }
        manifest.sweep = sweep;
        let mut external = ExternalOptions::new(0);
        external.processes = model.model_processes;
        external.timeout = Duration::from_secs(model.timeout_secs);
        external.batch_limit = model.batch_limit;
        Ok(Self { manifest, external })
    }

    fn from_manifest(m: &RunManifest) -> Result<Self> {
        let mut manifest = m.clone();
        if let Some(stats) = &m.feature_stats {
            // re-validate what came from disk
            manifest.feature_stats = Some(FeatureStats::new(stats.means.clone(), stats.stds.clone())?);
        }
        Ok(Self {
            manifest,
            external: ExternalOptions::new(0),
        })
    }

    fn execute(mut self) -> Result<Report> {
        self.manifest.started_unix = unix_now();
        let m = &self.manifest;
        let dims = match (&m.feature_stats, &m.sweep) {
            (Some(s), _) => s.dims(),
            (None, Some(s)) if s.dims.len() == 1 => s.dims[0],
            // builtins ignore the announced width; external models cannot
            // serve a varying feature count anyway
            (None, Some(s)) => s.dims.first().copied().unwrap_or(0),
            (None, None) => return Err(ConfigError::Invalid("manifest has no feature statistics".into()).into()),
        };
        self.external.dims = dims;
        let predictor = parse_predictor(&m.predictor, self.external.clone())?;

        let body = match m.command.as_str() {
            "sweep" => {
                let spec = m.sweep.as_ref().ok_or_else(|| ConfigError::Invalid("sweep manifest without grid".into()))?;
                let source = match (&m.feature_stats, &m.query) {
                    (Some(stats), Some(q)) => SweepSource::Fixed {
                        stats: stats.clone(),
                        point: q.point.clone(),
                    },
                    _ => SweepSource::Synthetic { dims: spec.dims.clone() },
                };
                let grid = SweepGrid {
                    kernel_widths: spec.kernel_widths.clone(),
                    ridge_penalties: spec.ridge_penalties.clone(),
                    num_samples: spec.num_samples.clone(),
                    base: m.config.clone(),
                };
                ReportBody::Sweep {
                    cells: run_sweep(predictor.as_ref(), &source, &grid, spec.jobs)?,
                }
            }
            command @ ("explain" | "stability") => {
                let stats = m.feature_stats.clone().expect("dims resolved above");
                let q = m
                    .query
                    .as_ref()
                    .ok_or_else(|| ConfigError::Invalid("manifest has no query point".into()))?;
                let explainer = Explainer::new(predictor.as_ref(), stats, m.feature_names.clone(), m.config.clone())?;
                if command == "explain" {
                    let explanation = explainer.explain_once(&q.point, derive_seed(m.config.master_seed, 0))?;
                    let x = nalgebra::DMatrix::from_row_slice(1, q.point.len(), &q.point);
                    let black_box_prediction = predict(predictor.as_ref(), &x)?[0];
                    ReportBody::Explanation {
                        black_box_prediction,
                        explanation,
                    }
                } else {
                    ReportBody::Stability {
                        stability: explainer.stability_run(&q.point)?,
                    }
                }
            }
            other => return Err(ConfigError::Invalid(format!("unknown command {other:?} in manifest")).into()),
        };
        self.manifest.finished_unix = unix_now();
        Ok(Report::new(self.manifest, body))
    }
}

fn emit(mut report: Report, output: &OutputArgs) -> Result<()> {
    if output.reproducible {
        report.make_reproducible();
    }
    let is_sweep = matches!(report.body, ReportBody::Sweep { .. });
    let format = output.output.unwrap_or(if is_sweep { OutputFormat::Csv } else { OutputFormat::Json });
    let mut bytes = Vec::new();
    match (format, &report.body) {
        (OutputFormat::Json, _) => bytes.extend(report.to_json()?.into_bytes()),
        (OutputFormat::Csv, ReportBody::Sweep { cells }) => write_sweep_csv(cells, &mut bytes)?,
        (OutputFormat::Csv, _) => report.write_csv(&mut bytes)?,
    }
    match &output.out {
        Some(path) => {
            write_atomically(path, &bytes)?;
            if !output.quiet {
                print!("{}", report.summary());
            }
        }
        None => {
            io::stdout().lock().write_all(&bytes)?;
            if !output.quiet {
                eprint!("{}", report.summary());
            }
        }
    }
    Ok(())
}

/// Writes through a sibling temporary file so a failed run never leaves a
/// truncated report behind.
fn write_atomically(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

