//! The `pvcast` command-line pipeline: `synth`, `ingest`, `train`,
//! `predict`, `evaluate`, `report`.
//!
//! Exit codes are a stable contract:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 2 | schema error (bad header / unknown column) |
//! | 3 | empty or missing input/output |
//! | 4 | training diverged |
//! | 5 | feature/artifact column mismatch |
//! | 6 | no timestamp overlap between series |
//! | 1 | anything else |
//!
//! Every file the pipeline writes goes through a temp-file-plus-rename, so
//! other processes never see partial output.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use chrono::{NaiveDate, NaiveDateTime};
use clap::{Args, Parser, Subcommand};

use crate::config::{ConfigError, ModelKind, RunConfig};
use crate::eval::{
    evaluate, parse_per_day_csv, parse_per_interval_csv, parse_power_csv, power_series_csv,
    EvalError,
};
use crate::features::{
    build_dataset, chronological_split, denormalize_scalar, normalize_record,
    synth::generate_synthetic, BuildOptions, FeatureError, FeatureMatrix, FeatureSpec, TargetMode,
    EXTRA_FEATURES,
};
use crate::ingest::{
    audit_gaps, default_cadence, flag_range, parse_csv, records_to_csv, IngestError, RejectReason,
    WeatherRecord, TABLE1_COLUMNS,
};
use crate::io_util::write_atomic;
use crate::models::{
    fit_linear, fit_mlp, load_model, mlp::mse, save_model, ArtifactError, Model, ModelError,
    TrainConfig,
};
use crate::physics::PhysicsError;
use crate::report::{ape_daily_svg, comparison_day_svg, comparison_month_svg, ReportError};

pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_EMPTY: i32 = 3;
pub const EXIT_DIVERGED: i32 = 4;
pub const EXIT_MISMATCH: i32 = 5;
pub const EXIT_NO_OVERLAP: i32 = 6;

/// Error with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        let code = match &e {
            IngestError::MissingColumn(_)
            | IngestError::UnknownColumn(_)
            | IngestError::MissingHeader => EXIT_SCHEMA,
            _ => 1,
        };
        Self::new(code, e.to_string())
    }
}

impl From<FeatureError> for CliError {
    fn from(e: FeatureError) -> Self {
        let code = match &e {
            FeatureError::EmptyDataset => EXIT_EMPTY,
            FeatureError::UnknownFeature(_) => EXIT_MISMATCH,
            _ => 1,
        };
        Self::new(code, e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        let code = match &e {
            ModelError::Diverged { .. } => EXIT_DIVERGED,
            ModelError::FeatureOrderMismatch { .. } => EXIT_MISMATCH,
            ModelError::EmptyTrainingSet => EXIT_EMPTY,
            _ => 1,
        };
        Self::new(code, e.to_string())
    }
}

impl From<ArtifactError> for CliError {
    fn from(e: ArtifactError) -> Self {
        let code = match &e {
            ArtifactError::Io(io) if io.kind() == std::io::ErrorKind::NotFound => EXIT_EMPTY,
            _ => 1,
        };
        Self::new(code, e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        let code = match &e {
            EvalError::NoOverlap => EXIT_NO_OVERLAP,
            _ => 1,
        };
        Self::new(code, e.to_string())
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        Self::new(EXIT_EMPTY, e.to_string())
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::new(1, e.to_string())
    }
}

impl From<PhysicsError> for CliError {
    fn from(e: PhysicsError) -> Self {
        Self::new(1, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::new(1, e.to_string())
    }
}

fn ensure_distinct(paths: &[(&str, &Path)]) -> Result<(), CliError> {
    for (i, (_, a)) in paths.iter().enumerate() {
        for (name_b, b) in &paths[i + 1..] {
            if a == b {
                let name_a = paths[i].0;
                return Err(CliError::new(
                    1,
                    format!("{name_a} and {name_b} must be distinct paths, both are {}", a.display()),
                ));
            }
        }
    }
    Ok(())
}

fn read_required(path: &Path, what: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| {
        let code = if e.kind() == std::io::ErrorKind::NotFound {
            EXIT_EMPTY
        } else {
            1
        };
        CliError::new(code, format!("cannot read {what} {}: {e}", path.display()))
    })
}

#[derive(Parser, Debug)]
#[command(
    name = "pvcast",
    version,
    about = "Photovoltaic power forecasting from weather data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic weather CSV with known ground truth.
    Synth(SynthArgs),
    /// Parse, validate, and gap-audit a weather CSV into a record cache.
    Ingest(IngestArgs),
    /// Train a model on the pre-boundary split of the cache.
    Train(TrainArgs),
    /// Predict per-interval array power from the cache with a saved model.
    Predict(PredictArgs),
    /// Score a prediction CSV against a measured CSV.
    Evaluate(EvaluateArgs),
    /// Render the evaluation CSVs as SVG charts.
    Report(ReportArgs),
}

#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    /// Flat key-value config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override any config key, repeatable: --set key=value.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl CommonArgs {
    fn load(&self) -> Result<RunConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        config.apply_overrides(self.set.iter().map(String::as_str))?;
        Ok(config)
    }
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub days: Option<u32>,
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    /// `linear` or `nonlinear`.
    #[arg(long)]
    pub relation: Option<String>,
    /// Output CSV path.
    #[arg(long, default_value = "synthetic.csv")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Weather CSV to ingest (overrides `input_csv`).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Record cache to write (overrides `cache`).
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Reject rows outside the published feature bounds instead of flagging.
    #[arg(long)]
    pub strict_range: bool,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// `linreg` or `mlp`.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub momentum: Option<f64>,
    #[arg(long)]
    pub validation_fraction: Option<f64>,
    #[arg(long)]
    pub early_stop_patience: Option<usize>,
    /// Comma-separated hidden widths, e.g. `32,16`.
    #[arg(long)]
    pub hidden_layers: Option<String>,
    /// `tanh` or `relu`.
    #[arg(long)]
    pub activation: Option<String>,
    #[arg(long)]
    pub ridge_lambda: Option<f64>,
    /// Train/test boundary, `yyyy-mm-dd HH:MM`.
    #[arg(long)]
    pub boundary: Option<String>,
    /// `irradiance` or `power`.
    #[arg(long)]
    pub target_mode: Option<String>,
    /// Artifact path to write (overrides `artifact`).
    #[arg(long)]
    pub artifact: Option<PathBuf>,
    /// Include dni, gust, direction stddev, and pressure as inputs.
    #[arg(long)]
    pub all_features: bool,
    /// Drop rows taken during sensor cleaning.
    #[arg(long)]
    pub drop_cleaning_rows: bool,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub artifact: Option<PathBuf>,
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// First date to predict, `yyyy-mm-dd` (inclusive).
    #[arg(long)]
    pub from: Option<String>,
    /// End date, `yyyy-mm-dd` (exclusive).
    #[arg(long)]
    pub to: Option<String>,
    /// Prediction CSV to write (overrides `predictions`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Predicted `time,power_w` CSV.
    #[arg(long)]
    pub predicted: PathBuf,
    /// Measured `time,power_w` CSV.
    #[arg(long)]
    pub actual: PathBuf,
    /// Directory for per_interval.csv / per_day.csv (overrides `report_dir`).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Directory holding per_interval.csv and per_day.csv.
    #[arg(long)]
    pub report_dir: Option<PathBuf>,
    /// Day for the single-day comparison chart, `yyyy-mm-dd`; defaults to
    /// the first evaluated day.
    #[arg(long)]
    pub day: Option<String>,
}

/// Parse argv and run; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(args) => cmd_synth(&args),
        Command::Ingest(args) => cmd_ingest(&args),
        Command::Train(args) => cmd_train(&args),
        Command::Predict(args) => cmd_predict(&args),
        Command::Evaluate(args) => cmd_evaluate(&args),
        Command::Report(args) => cmd_report(&args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

pub fn cmd_synth(args: &SynthArgs) -> Result<(), CliError> {
    let config = args.common.load()?;
    let seed = args.seed.unwrap_or(config.seed);
    let days = args.days.unwrap_or(config.synth_days);
    let noise_sigma = args.noise_sigma.unwrap_or(config.synth_noise_sigma);
    let relation = match &args.relation {
        Some(s) => s.parse()?,
        None => config.synth_relation,
    };
    let records = generate_synthetic(seed, days, noise_sigma, relation)?;
    write_atomic(&args.out, records_to_csv(&records).as_bytes())?;
    println!(
        "wrote {} synthetic records ({days} days, seed {seed}, {relation}) to {}",
        records.len(),
        args.out.display()
    );
    Ok(())
}

fn print_ingest_summary(report: &crate::ingest::IngestReport) {
    println!("rows accepted: {}", report.rows_accepted);
    println!("rows rejected: {}", report.rows_rejected);
    for (reason, count) in &report.reject_reasons {
        println!("  {reason}: {count}");
    }
    let missing: usize = report.gaps.iter().map(|g| g.missing_intervals).sum();
    println!("gaps: {} ({missing} missing intervals)", report.gaps.len());
    if report.out_of_range_flags.is_empty() {
        println!("out-of-range flags: none");
    } else {
        println!("out-of-range flags:");
        for (field, count) in &report.out_of_range_flags {
            println!("  {field}: {count}");
        }
    }
}

pub fn cmd_ingest(args: &IngestArgs) -> Result<(), CliError> {
    let config = args.common.load()?;
    let input = args
        .input
        .clone()
        .or(config.input_csv.clone())
        .ok_or_else(|| CliError::new(EXIT_EMPTY, "no input CSV given (--input or input_csv)"))?;
    let cache = args.cache.clone().unwrap_or(config.cache.clone());
    let strict = args.strict_range || config.strict_range;
    ensure_distinct(&[("input", &input), ("cache", &cache)])?;

    let file = File::open(&input).map_err(|e| {
        CliError::new(EXIT_EMPTY, format!("cannot open {}: {e}", input.display()))
    })?;
    let (mut records, mut report) = parse_csv(BufReader::new(file), &TABLE1_COLUMNS)?;

    let spec = FeatureSpec::table2_default();
    let flags = flag_range(&records, &spec);
    if strict {
        for &idx in flags.flagged_rows.iter().rev() {
            records.remove(idx);
        }
        let n = flags.flagged_rows.len();
        report.rows_accepted -= n;
        report.rows_rejected += n;
        *report
            .reject_reasons
            .entry(RejectReason::OutOfFeatureBounds)
            .or_insert(0) += n;
    } else {
        report.out_of_range_flags = flags.per_field;
    }
    report.gaps = audit_gaps(&records, default_cadence())?;

    if records.is_empty() {
        print_ingest_summary(&report);
        return Err(CliError::new(EXIT_EMPTY, "no rows survived ingestion"));
    }
    write_atomic(&cache, records_to_csv(&records).as_bytes())?;
    print_ingest_summary(&report);
    println!("cache written to {}", cache.display());
    Ok(())
}

fn load_cache(path: &Path) -> Result<Vec<WeatherRecord>, CliError> {
    let text = read_required(path, "record cache")?;
    let (records, report) = parse_csv(text.as_bytes(), &TABLE1_COLUMNS)?;
    if report.rows_rejected > 0 {
        return Err(CliError::new(
            1,
            format!("record cache {} has {} invalid rows", path.display(), report.rows_rejected),
        ));
    }
    Ok(records)
}

fn feature_spec_for(
    config: &RunConfig,
    records: &[WeatherRecord],
    boundary: NaiveDateTime,
) -> Result<FeatureSpec, CliError> {
    let spec = FeatureSpec::table2_default();
    if !config.all_features {
        return Ok(spec);
    }
    // Bounds for the extra inputs come from pre-boundary data only, so the
    // held-out year leaks nothing into scaling.
    let pivot = records.partition_point(|r| r.time < boundary);
    let names: Vec<&str> = EXTRA_FEATURES.iter().map(|(n, _)| *n).collect();
    let units: Vec<&str> = EXTRA_FEATURES.iter().map(|(_, u)| *u).collect();
    Ok(spec.with_inferred(&records[..pivot], &names, &units)?)
}

pub fn cmd_train(args: &TrainArgs) -> Result<(), CliError> {
    let mut config = args.common.load()?;
    if let Some(v) = &args.model {
        config.model = v.parse::<ModelKind>().map_err(|e| CliError::new(1, e))?;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if let Some(v) = args.epochs {
        config.epochs = v;
    }
    if let Some(v) = args.batch_size {
        config.batch_size = v;
    }
    if let Some(v) = args.learning_rate {
        config.learning_rate = v;
    }
    if let Some(v) = args.momentum {
        config.momentum = v;
    }
    if let Some(v) = args.validation_fraction {
        config.validation_fraction = v;
    }
    if let Some(v) = args.early_stop_patience {
        config.early_stop_patience = Some(v);
    }
    if let Some(v) = &args.hidden_layers {
        config.set("hidden_layers", v)?;
    }
    if let Some(v) = &args.activation {
        config.set("activation", v)?;
    }
    if let Some(v) = args.ridge_lambda {
        config.ridge_lambda = v;
    }
    if let Some(v) = &args.boundary {
        config.set("split_boundary", v)?;
    }
    if let Some(v) = &args.target_mode {
        config.target_mode = v.parse::<TargetMode>()?;
    }
    if args.all_features {
        config.all_features = true;
    }
    if args.drop_cleaning_rows {
        config.drop_cleaning_rows = true;
    }
    let cache = args.cache.clone().unwrap_or(config.cache.clone());
    let artifact_path = args.artifact.clone().unwrap_or(config.artifact.clone());
    ensure_distinct(&[("cache", &cache), ("artifact", &artifact_path)])?;

    let records = load_cache(&cache)?;
    let spec = feature_spec_for(&config, &records, config.split_boundary)?;
    let panel = config.panel_array()?;
    let built = build_dataset(
        &records,
        &spec,
        config.target_mode,
        &panel,
        BuildOptions {
            drop_cleaning_rows: config.drop_cleaning_rows,
            all_features: config.all_features,
        },
    )?;
    if built.dropped_rows > 0 {
        println!("dropped {} rows before training", built.dropped_rows);
    }
    let split = chronological_split(&built.matrix, config.split_boundary);
    if split.train.n_rows() == 0 {
        return Err(CliError::new(EXIT_EMPTY, "empty train set: boundary excludes all data"));
    }
    if split.test.n_rows() == 0 {
        eprintln!("warning: boundary leaves the test side empty");
    }

    let model = match config.model {
        ModelKind::Linreg => Model::Linear(fit_linear(&split.train, config.ridge_lambda)?),
        ModelKind::Mlp => {
            let train_config = TrainConfig {
                epochs: config.epochs,
                batch_size: config.batch_size,
                learning_rate: config.learning_rate,
                momentum: config.momentum,
                seed: config.seed,
                early_stop_patience: config.early_stop_patience,
                validation_fraction: config.validation_fraction,
            };
            let layer_sizes = config.layer_sizes(split.train.n_cols());
            Model::Mlp(fit_mlp(&split.train, &train_config, &layer_sizes, config.activation)?)
        }
    };

    let train_mse = mse(&model.predict(&split.train)?, &split.train.targets);
    println!("final train loss: {train_mse:.6}");
    if config.validation_fraction > 0.0 {
        let n_val =
            (split.train.n_rows() as f64 * config.validation_fraction).floor() as usize;
        let start = split.train.n_rows() - n_val;
        let val = FeatureMatrix {
            columns: split.train.columns.clone(),
            rows: split.train.rows[start..].to_vec(),
            targets: split.train.targets[start..].to_vec(),
            timestamps: split.train.timestamps[start..].to_vec(),
        };
        if val.n_rows() > 0 {
            let val_mse = mse(&model.predict(&val)?, &val.targets);
            println!("final validation loss: {val_mse:.6}");
        }
    } else {
        println!("final validation loss: n/a (validation_fraction = 0)");
    }

    save_model(&model, &spec, config.target_mode, &artifact_path)?;
    println!(
        "trained {} on {} rows; artifact written to {}",
        model.kind(),
        split.train.n_rows(),
        artifact_path.display()
    );
    Ok(())
}

fn parse_date(s: &str) -> Result<NaiveDate, CliError> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map_err(|_| CliError::new(1, format!("bad date `{s}`, expected yyyy-mm-dd")))
}

pub fn cmd_predict(args: &PredictArgs) -> Result<(), CliError> {
    let config = args.common.load()?;
    let artifact_path = args.artifact.clone().unwrap_or(config.artifact.clone());
    let cache = args.cache.clone().unwrap_or(config.cache.clone());
    let out = args.out.clone().unwrap_or(config.predictions.clone());
    ensure_distinct(&[
        ("artifact", &artifact_path),
        ("cache", &cache),
        ("out", &out),
    ])?;

    let loaded = load_model(&artifact_path)?;
    let records = load_cache(&cache)?;

    let from = args
        .from
        .as_deref()
        .map(parse_date)
        .transpose()?
        .map(|d| d.and_hms_opt(0, 0, 0).unwrap());
    let to = args
        .to
        .as_deref()
        .map(parse_date)
        .transpose()?
        .map(|d| d.and_hms_opt(0, 0, 0).unwrap());
    let in_range = |t: NaiveDateTime| {
        from.is_none_or(|f| t >= f) && to.is_none_or(|u| t < u)
    };
    let selected: Vec<&WeatherRecord> = records.iter().filter(|r| in_range(r.time)).collect();
    if selected.is_empty() {
        return Err(CliError::new(EXIT_EMPTY, "no cached records in the requested range"));
    }

    let columns = loaded.model.feature_order().to_vec();
    let mut rows = Vec::with_capacity(selected.len());
    let mut timestamps = Vec::with_capacity(selected.len());
    for rec in &selected {
        rows.push(normalize_record(rec, &loaded.bounds, &columns)?);
        timestamps.push(rec.time);
    }
    let matrix = FeatureMatrix {
        columns,
        targets: vec![0.0; rows.len()],
        rows,
        timestamps,
    };
    let raw = loaded.model.predict(&matrix)?;

    let array = config.panel_array()?;
    let rated_w = array.rated_power_w();
    let bound_name = match loaded.target_mode {
        TargetMode::Irradiance => "ghi_pyr",
        TargetMode::Power => crate::features::TARGET_POWER,
    };
    let bound = loaded.bounds.get(bound_name).ok_or_else(|| {
        CliError::new(
            EXIT_MISMATCH,
            format!("artifact bounds lack `{bound_name}`"),
        )
    })?;

    let mut series = Vec::with_capacity(raw.len());
    for (rec, value) in selected.iter().zip(&raw) {
        let power_w = match loaded.target_mode {
            TargetMode::Irradiance => {
                let g = denormalize_scalar(*value, bound).max(0.0);
                array.instantaneous_power(g)?
            }
            TargetMode::Power => denormalize_scalar(*value, bound),
        };
        // Models can extrapolate past physical limits; pin to the nameplate.
        series.push((rec.time, power_w.clamp(0.0, rated_w)));
    }

    write_atomic(&out, power_series_csv(&series).as_bytes())?;
    println!("wrote {} predictions to {}", series.len(), out.display());
    Ok(())
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<(), CliError> {
    let config = args.common.load()?;
    let out_dir = args.out_dir.clone().unwrap_or(config.report_dir.clone());

    let predicted = parse_power_csv(&read_required(&args.predicted, "prediction CSV")?)?;
    let actual = parse_power_csv(&read_required(&args.actual, "measured CSV")?)?;
    let report = evaluate(&predicted, &actual, default_cadence(), config.ape_epsilon)?;

    let interval_path = out_dir.join("per_interval.csv");
    let day_path = out_dir.join("per_day.csv");
    write_atomic(&interval_path, report.per_interval_csv().as_bytes())?;
    write_atomic(&day_path, report.per_day_csv().as_bytes())?;

    match report.mape_percent {
        Some(mape) => println!("MAPE over {} days: {mape:.3} %", report.per_day.len()),
        None => println!("MAPE undefined: no day had measurable energy"),
    }
    println!(
        "{} intervals compared ({} undefined, {} unmatched timestamps)",
        report.per_interval.len(),
        report.undefined_count,
        report.unmatched_timestamps
    );
    println!("wrote {} and {}", interval_path.display(), day_path.display());
    Ok(())
}

pub fn cmd_report(args: &ReportArgs) -> Result<(), CliError> {
    let config = args.common.load()?;
    let dir = args.report_dir.clone().unwrap_or(config.report_dir.clone());

    let intervals = parse_per_interval_csv(&read_required(&dir.join("per_interval.csv"), "evaluation CSV")?)?;
    let days = parse_per_day_csv(&read_required(&dir.join("per_day.csv"), "evaluation CSV")?)?;
    if intervals.is_empty() {
        return Err(CliError::new(EXIT_EMPTY, "per_interval.csv has no rows"));
    }

    let day = match &args.day {
        Some(s) => parse_date(s)?,
        None => intervals[0].time.date(),
    };

    let charts = [
        ("comparison_day.svg", comparison_day_svg(&intervals, day)?),
        ("comparison_month.svg", comparison_month_svg(&days)?),
        ("ape_daily.svg", ape_daily_svg(&days)?),
    ];
    for (name, svg) in &charts {
        let path = dir.join(name);
        write_atomic(&path, svg.as_bytes())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
