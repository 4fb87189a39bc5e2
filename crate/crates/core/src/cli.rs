//! Command-line driver for the full experiment.
//!
//! Everything lives under one output directory:
//!
//! ```text
//! <out>/dataset.tgds                   ingest
//! <out>/models/<TARGET>_<tier>.tgbm    train
//! <out>/models/<TARGET>_<tier>.json    train (run manifest)
//! <out>/logs/train_<TARGET>_<tier>.csv train (round,train_rmse)
//! <out>/reports/evaluate.{csv,json}    evaluate
//! <out>/reports/profile.{csv,json}     profile
//! <out>/reports/tradeoff_*.csv         report
//! <out>/reports/summary.md             report
//! ```
//!
//! Exit codes: 0 success, 1 computation error, 2 usage or I/O error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::dataset_file;
use crate::gbrt::{Ensemble, ModelConfig};
use crate::ingest::{self, CsvOptions, Dataset, IngestError, DEFAULT_DROP_COLUMNS, DEFAULT_MISSING_SENTINEL};
use crate::metrics::EvalReport;
use crate::model_store;
use crate::pipeline::{self, Pollutant, PrepOptions, Prepared, ScalerFit, Tier};
use crate::preprocess::{SplitMode, SplitSpec, DEFAULT_TRAIN_FRACTION};
use crate::profile::{self, CountingAllocator, ResourceReport, DEFAULT_REPEATS};

#[derive(Debug, Parser)]
#[command(name = "edgeboost", version, about = "Full vs tiny gradient-boosted trees for CO and NO2")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse the sensor CSV into a binary dataset artifact.
    Ingest(IngestArgs),
    /// Train one model and write its .tgbm file and training log.
    Train(TrainArgs),
    /// Accuracy metrics on the held-out split.
    Evaluate(SelectArgs),
    /// Latency, size and peak memory of inference.
    Profile(ProfileArgs),
    /// Trade-off tables and a side-by-side summary.
    Report(OutArgs),
    /// ingest, train all four models, evaluate, profile, report.
    RunAll(RunAllArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct IngestArgs {
    /// AirQualityUCI-format CSV file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MISSING_SENTINEL, allow_negative_numbers = true)]
    pub missing_sentinel: f64,
    /// Columns removed before modeling (date/time columns always are).
    #[arg(long = "drop", value_delimiter = ',', default_values_t = DEFAULT_DROP_COLUMNS.iter().map(|s| s.to_string()))]
    pub drop: Vec<String>,
    #[arg(long, default_value_t = ';')]
    pub delimiter: char,
    #[arg(long, default_value_t = ',')]
    pub decimal: char,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct SplitArgs {
    #[arg(long, env = "EDGEBOOST_SEED", default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SplitMode::Shuffled)]
    pub split: SplitMode,
    /// Fit min-max ranges on all cleaned rows or on the training rows only.
    #[arg(long, value_enum, default_value_t = ScalerFit::All)]
    pub scaler_fit: ScalerFit,
}

impl SplitArgs {
    fn options(&self) -> PrepOptions {
        PrepOptions {
            split: SplitSpec {
                train_fraction: DEFAULT_TRAIN_FRACTION,
                seed: self.seed,
                mode: self.split,
            },
            scaler_fit: self.scaler_fit,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
}

impl Overrides {
    fn apply(&self, mut cfg: ModelConfig, seed: u64) -> ModelConfig {
        if let Some(v) = self.trees {
            cfg.n_trees = v;
        }
        if let Some(v) = self.depth {
            cfg.max_depth = v;
        }
        if let Some(v) = self.lr {
            cfg.learning_rate = v;
        }
        if let Some(v) = self.lambda {
            cfg.lambda = v;
        }
        if let Some(v) = self.gamma {
            cfg.gamma = v;
        }
        cfg.seed = seed;
        cfg
    }
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub target: Pollutant,
    #[arg(long, value_enum)]
    pub model: Tier,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SelectArgs {
    /// Restrict to one target (default: both).
    #[arg(long, value_enum)]
    pub target: Option<Pollutant>,
    /// Restrict to one tier (default: both).
    #[arg(long, value_enum)]
    pub model: Option<Tier>,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

impl SelectArgs {
    fn runs(&self) -> Vec<(Pollutant, Tier)> {
        let targets = self.target.map_or(Pollutant::ALL.to_vec(), |t| vec![t]);
        let tiers = self.model.map_or(Tier::ALL.to_vec(), |m| vec![m]);
        targets
            .iter()
            .flat_map(|&t| tiers.iter().map(move |&m| (t, m)))
            .collect()
    }
}

#[derive(Debug, Clone, Args)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub select: SelectArgs,
    #[arg(long, default_value_t = DEFAULT_REPEATS)]
    pub repeats: usize,
}

#[derive(Debug, Clone, Args)]
pub struct RunAllArgs {
    #[command(flatten)]
    pub ingest: IngestArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub overrides: Overrides,
    #[arg(long, default_value_t = DEFAULT_REPEATS)]
    pub repeats: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Compute(_) => 1,
            CliError::Usage(_) | CliError::Io { .. } => 2,
        }
    }

    fn compute(e: impl std::fmt::Display) -> CliError {
        CliError::Compute(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Artifact paths inside an output directory.
pub struct Layout<'a>(pub &'a Path);

impl Layout<'_> {
    pub fn dataset(&self) -> PathBuf {
        self.0.join("dataset.tgds")
    }
    pub fn model(&self, t: Pollutant, m: Tier) -> PathBuf {
        self.0.join("models").join(format!("{t}_{m}.tgbm"))
    }
    pub fn manifest(&self, t: Pollutant, m: Tier) -> PathBuf {
        self.0.join("models").join(format!("{t}_{m}.json"))
    }
    pub fn train_log(&self, t: Pollutant, m: Tier) -> PathBuf {
        self.0.join("logs").join(format!("train_{t}_{m}.csv"))
    }
    pub fn report(&self, name: &str) -> PathBuf {
        self.0.join("reports").join(name)
    }
}

/// What a model was trained with, written next to the model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub target: Pollutant,
    pub model: Tier,
    pub config: ModelConfig,
    pub seed: u64,
    pub split: SplitMode,
    pub scaler_fit: ScalerFit,
    pub n_train: usize,
    pub n_test: usize,
    pub model_bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub round: usize,
    pub train_rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffInference {
    pub model: String,
    pub target: String,
    pub inference_ms: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffSize {
    pub model: String,
    pub target: String,
    pub size_kb: f64,
    pub r2: f64,
}

/// Published reference figures, `(target, model, mae, rmse, mbe, r2)`.
pub const REFERENCE_ACCURACY: [(&str, &str, f64, f64, f64, f64); 4] = [
    ("CO", "full", 0.0244, 0.0381, -0.000062, 0.9064),
    ("CO", "tiny", 0.0344, 0.0504, -0.000698, 0.8356),
    ("NO2", "full", 0.0400, 0.0546, -0.002623, 0.8559),
    ("NO2", "tiny", 0.0558, 0.0751, -0.002572, 0.7266),
];

/// Published reference figures, `(target, model, inference_ms, size_kb, peak_ram_mb)`.
pub const REFERENCE_RESOURCES: [(&str, &str, f64, f64, f64); 4] = [
    ("CO", "full", 2.3902, 60.9629, 129.5625),
    ("CO", "tiny", 2.5173, 12.7383, 130.4766),
    ("NO2", "full", 2.0926, 60.8301, 130.5313),
    ("NO2", "tiny", 0.9725, 12.7383, 130.5703),
];

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(CliError::compute)?;
    }
    let bytes = w.into_inner().map_err(CliError::compute)?;
    write(path, &bytes)
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let bytes = read(path)?;
    csv::Reader::from_reader(bytes.as_slice())
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| CliError::Compute(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(CliError::compute)?;
    text.push('\n');
    write(path, text.as_bytes())
}

fn ingest_error(path: &Path, e: IngestError) -> CliError {
    let where_ = match &e {
        IngestError::Ragged { line, .. } => format!("{}:{line}", path.display()),
        // data rows start on line 2
        IngestError::BadNumber { row, .. } => format!("{}:{}", path.display(), row + 2),
        _ => path.display().to_string(),
    };
    CliError::Compute(format!("{where_}: {e}"))
}

/// Parse a CSV file into a cleaned dataset.
pub fn load_csv(args: &IngestArgs) -> Result<Dataset> {
    let file = fs::File::open(&args.input).map_err(|source| CliError::Io {
        path: args.input.clone(),
        source,
    })?;
    let options = CsvOptions {
        delimiter: args.delimiter,
        decimal_separator: args.decimal,
    };
    let table = ingest::parse_csv(std::io::BufReader::new(file), options).map_err(|e| ingest_error(&args.input, e))?;
    let drop: Vec<&str> = args.drop.iter().map(String::as_str).collect();
    let (ds, _warnings) =
        ingest::to_dataset(&table, args.missing_sentinel, &drop).map_err(|e| ingest_error(&args.input, e))?;
    Ok(ds)
}

pub fn cmd_ingest(args: &IngestArgs) -> Result<String> {
    let ds = load_csv(args)?;
    let bytes = dataset_file::encode(&ds).map_err(CliError::compute)?;
    let layout = Layout(&args.out.out);
    write(&layout.dataset(), &bytes)?;

    let mut summary = format!("{} rows, {} columns -> {}\n", ds.n_rows(), ds.n_cols(), layout.dataset().display());
    summary.push_str("missing per column:\n");
    for (name, count) in ds.column_names.iter().zip(ds.missing_counts()) {
        let _ = writeln!(summary, "  {name:<14} {count}");
    }
    Ok(summary)
}

fn load_dataset(out: &Path) -> Result<Dataset> {
    let path = Layout(out).dataset();
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "{} not found; run `edgeboost ingest` first",
            path.display()
        )));
    }
    dataset_file::decode(&read(&path)?).map_err(|e| CliError::Compute(format!("{}: {e}", path.display())))
}

fn prepare(ds: &Dataset, target: Pollutant, split: &SplitArgs) -> Result<Prepared> {
    pipeline::prepare(ds, target.column(), &split.options()).map_err(CliError::compute)
}

fn train_one(ds: &Dataset, out: &Path, target: Pollutant, tier: Tier, split: &SplitArgs, overrides: &Overrides) -> Result<String> {
    let cfg = overrides.apply(tier.config(), split.seed);
    if let Err(e) = cfg.validate() {
        return Err(CliError::Usage(e.to_string()));
    }
    let prepared = prepare(ds, target, split)?;
    let (model, log) = pipeline::fit(&prepared, &cfg).map_err(CliError::compute)?;
    let bytes = model_store::serialize(&model).map_err(CliError::compute)?;

    let layout = Layout(out);
    write(&layout.model(target, tier), &bytes)?;
    let rounds: Vec<RoundLog> = log
        .train_rmse
        .iter()
        .enumerate()
        .map(|(i, &train_rmse)| RoundLog {
            round: i + 1,
            train_rmse,
        })
        .collect();
    write_csv(&layout.train_log(target, tier), &rounds)?;
    let manifest = Manifest {
        target,
        model: tier,
        config: cfg,
        seed: split.seed,
        split: split.split,
        scaler_fit: split.scaler_fit,
        n_train: prepared.x_train.nrows(),
        n_test: prepared.x_test.nrows(),
        model_bytes: bytes.len(),
    };
    write_json(&layout.manifest(target, tier), &manifest)?;

    Ok(format!(
        "{target} {tier}: {} trees, {} nodes, {} bytes, final train RMSE {:.6} ({} train / {} test rows)\n",
        model.trees.len(),
        model.n_nodes(),
        bytes.len(),
        log.train_rmse.last().copied().unwrap_or(f64::NAN),
        manifest.n_train,
        manifest.n_test,
    ))
}

pub fn cmd_train(args: &TrainArgs) -> Result<String> {
    let cfg = args.overrides.apply(args.model.config(), args.split.seed);
    if let Err(e) = cfg.validate() {
        return Err(CliError::Usage(e.to_string()));
    }
    let ds = load_dataset(&args.out.out)?;
    train_one(&ds, &args.out.out, args.target, args.model, &args.split, &args.overrides)
}

/// Load a model and check it was trained on the split being requested.
fn load_model(out: &Path, target: Pollutant, tier: Tier, split: &SplitArgs, prepared: &Prepared) -> Result<(Ensemble, Vec<u8>)> {
    let layout = Layout(out);
    let path = layout.model(target, tier);
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "{} not found; run `edgeboost train --target {target} --model {tier}` first",
            path.display()
        )));
    }
    let bytes = read(&path)?;
    let model = model_store::deserialize(&bytes).map_err(|e| CliError::Compute(format!("{}: {e}", path.display())))?;
    if model.n_features != prepared.feature_names.len() {
        return Err(CliError::Compute(format!(
            "schema mismatch: {} expects {} features, dataset provides {}",
            path.display(),
            model.n_features,
            prepared.feature_names.len()
        )));
    }
    if let Ok(text) = fs::read_to_string(layout.manifest(target, tier)) {
        if let Ok(m) = serde_json::from_str::<Manifest>(&text) {
            if (m.seed, m.split, m.scaler_fit) != (split.seed, split.split, split.scaler_fit) {
                return Err(CliError::Usage(format!(
                    "{target} {tier} was trained with --seed {} --split {:?} --scaler-fit {:?}; pass the same flags",
                    m.seed, m.split, m.scaler_fit
                )));
            }
        }
    }
    Ok((model, bytes))
}

pub fn cmd_evaluate(args: &SelectArgs) -> Result<(Vec<EvalReport>, String)> {
    let out = &args.out.out;
    let ds = load_dataset(out)?;
    let mut rows = Vec::new();
    let mut summary = String::new();
    for target in Pollutant::ALL.into_iter().filter(|t| args.runs().iter().any(|(rt, _)| rt == t)) {
        let prepared = prepare(&ds, target, &args.split)?;
        for (_, tier) in args.runs().into_iter().filter(|(t, _)| *t == target) {
            let (model, _) = load_model(out, target, tier, &args.split, &prepared)?;
            let y_hat = model.predict(prepared.x_test.view()).map_err(CliError::compute)?;
            let y = prepared.y_test.as_slice().expect("contiguous");
            let y_hat = y_hat.as_slice().expect("contiguous");
            let report = EvalReport::compute(target.label(), tier.label(), y, y_hat).map_err(CliError::compute)?;

            let span = prepared.scaler.target.max - prepared.scaler.target.min;
            let _ = writeln!(
                summary,
                "{target} {tier}: MAE {:.4} RMSE {:.4} MBE {:+.6} R² {:.4} (n={}; physical MAE {:.3}, RMSE {:.3})",
                report.mae, report.rmse, report.mbe, report.r2, report.n,
                report.mae * span,
                report.rmse * span,
            );
            rows.push(report);
        }
    }
    let layout = Layout(out);
    write_csv(&layout.report("evaluate.csv"), &rows)?;
    write_json(&layout.report("evaluate.json"), &rows)?;
    Ok((rows, summary))
}

pub fn cmd_profile(args: &ProfileArgs, allocator: &CountingAllocator) -> Result<(Vec<ResourceReport>, String)> {
    let sel = &args.select;
    let out = &sel.out.out;
    if args.repeats < profile::MIN_REPEATS {
        return Err(CliError::Usage(format!(
            "--repeats must be at least {}",
            profile::MIN_REPEATS
        )));
    }
    let ds = load_dataset(out)?;
    let mut rows = Vec::new();
    let mut summary = String::new();
    for target in Pollutant::ALL.into_iter().filter(|t| sel.runs().iter().any(|(rt, _)| rt == t)) {
        let prepared = prepare(&ds, target, &sel.split)?;
        for (_, tier) in sel.runs().into_iter().filter(|(t, _)| *t == target) {
            let (model, bytes) = load_model(out, target, tier, &sel.split, &prepared)?;
            let report = profile::build_resource_report(
                target.label(),
                tier.label(),
                &model,
                &bytes,
                prepared.x_test.view(),
                args.repeats,
                allocator,
            )
            .map_err(CliError::compute)?;
            let _ = writeln!(
                summary,
                "{target} {tier}: {:.4} ms median ({:.3} µs/sample), {:.4} KB, peak {:.4} MB over {} repeats",
                report.inference_ms, report.per_sample_us, report.model_size_kb, report.peak_mem_mb, report.repeats
            );
            rows.push(report);
        }
    }
    let layout = Layout(out);
    write_csv(&layout.report("profile.csv"), &rows)?;
    write_json(&layout.report("profile.json"), &rows)?;
    Ok((rows, summary))
}

fn require(path: PathBuf, command: &str) -> Result<PathBuf> {
    if path.exists() {
        Ok(path)
    } else {
        Err(CliError::Usage(format!(
            "{} not found; run `edgeboost {command}` first",
            path.display()
        )))
    }
}

pub fn cmd_report(args: &OutArgs) -> Result<String> {
    let layout = Layout(&args.out);
    let eval: Vec<EvalReport> = read_csv(&require(layout.report("evaluate.csv"), "evaluate")?)?;
    let prof: Vec<ResourceReport> = read_csv(&require(layout.report("profile.csv"), "profile")?)?;

    let mut inference = Vec::new();
    let mut size = Vec::new();
    for e in &eval {
        let Some(p) = prof.iter().find(|p| p.target == e.target && p.model == e.model) else {
            return Err(CliError::Usage(format!(
                "no profile row for {} {}; run `edgeboost profile` for it",
                e.target, e.model
            )));
        };
        inference.push(TradeoffInference {
            model: e.model.clone(),
            target: e.target.clone(),
            inference_ms: p.inference_ms,
            r2: e.r2,
        });
        size.push(TradeoffSize {
            model: e.model.clone(),
            target: e.target.clone(),
            size_kb: p.model_size_kb,
            r2: e.r2,
        });
    }
    write_csv(&layout.report("tradeoff_inference.csv"), &inference)?;
    write_csv(&layout.report("tradeoff_size.csv"), &size)?;

    let md = summary_markdown(&eval, &prof);
    write(&layout.report("summary.md"), md.as_bytes())?;
    Ok(md)
}

fn summary_markdown(eval: &[EvalReport], prof: &[ResourceReport]) -> String {
    let mut md = String::new();
    md.push_str("# Full vs tiny: accuracy and deployment cost\n\n");
    md.push_str(
        "Metrics are in min-max scaled target units. Each target is split separately \
         after dropping the rows where that target is missing.\n\n",
    );
    md.push_str("## Accuracy\n\n");
    md.push_str("| target | model | MAE | RMSE | MBE | R² | n | ref MAE | ref RMSE | ref MBE | ref R² |\n");
    md.push_str("|---|---|---|---|---|---|---|---|---|---|---|\n");
    for e in eval {
        let r = REFERENCE_ACCURACY
            .iter()
            .find(|r| r.0 == e.target && r.1 == e.model);
        let refs = r.map_or("| – | – | – | – |".to_string(), |r| {
            format!("| {} | {} | {} | {} |", r.2, r.3, r.4, r.5)
        });
        let _ = writeln!(
            md,
            "| {} | {} | {:.4} | {:.4} | {:.6} | {:.4} | {} {refs}",
            e.target, e.model, e.mae, e.rmse, e.mbe, e.r2, e.n
        );
    }
    md.push_str("\n## Resources\n\n");
    md.push_str("| target | model | inference ms (median) | µs/sample | size KB | peak heap MB | repeats | ref inference ms | ref size KB | ref peak RAM MB |\n");
    md.push_str("|---|---|---|---|---|---|---|---|---|---|\n");
    for p in prof {
        let r = REFERENCE_RESOURCES
            .iter()
            .find(|r| r.0 == p.target && r.1 == p.model);
        let refs = r.map_or("| – | – | – |".to_string(), |r| format!("| {} | {} | {} |", r.2, r.3, r.4));
        let _ = writeln!(
            md,
            "| {} | {} | {:.4} | {:.3} | {:.4} | {:.4} | {} {refs}",
            p.target, p.model, p.inference_ms, p.per_sample_us, p.model_size_kb, p.peak_mem_mb, p.repeats
        );
    }
    md.push_str(
        "\nPeak heap is the allocator high-water mark inside the predict call only. \
         The reference peak-RAM column is whole-process memory of an interpreter \
         and is not comparable in absolute terms; compare full vs tiny instead.\n\
         Reference CO latencies have the tiny model slower than the full one; that \
         ordering is within single-shot timing noise and is not expected to reproduce.\n",
    );
    md
}

pub fn cmd_run_all(args: &RunAllArgs, allocator: &CountingAllocator) -> Result<String> {
    let out = args.ingest.out.out.clone();
    let mut log = cmd_ingest(&args.ingest)?;
    let ds = load_dataset(&out)?;
    for target in Pollutant::ALL {
        for tier in Tier::ALL {
            log.push_str(&train_one(&ds, &out, target, tier, &args.split, &args.overrides)?);
        }
    }
    let select = SelectArgs {
        target: None,
        model: None,
        split: args.split,
        out: args.ingest.out.clone(),
    };
    log.push_str(&cmd_evaluate(&select)?.1);
    let prof = ProfileArgs {
        select,
        repeats: args.repeats,
    };
    log.push_str(&cmd_profile(&prof, allocator)?.1);
    log.push_str(&cmd_report(&args.ingest.out)?);
    Ok(log)
}

/// Run a parsed command, returning what it prints on success.
pub fn run(cli: &Cli, allocator: &CountingAllocator) -> Result<String> {
    match &cli.command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Train(a) => cmd_train(a),
        Command::Evaluate(a) => cmd_evaluate(a).map(|(_, s)| s),
        Command::Profile(a) => cmd_profile(a, allocator).map(|(_, s)| s),
        Command::Report(a) => cmd_report(a),
        Command::RunAll(a) => cmd_run_all(a, allocator),
    }
}
