//! Command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use thiserror::Error;

use crate::batch::{self, AggregateStats, BatchError, InputFormat, NameColumn, ReadOptions};
use crate::cache::{self, CacheError, ModelCache};
use crate::classifier::{ClassifierConfig, ConfigError, GenderLabel, Models, PriorsMode};
use crate::corpus::{self, CorpusError};
use crate::namesplit::{CompoundSurnames, SurnameListError};
use crate::report::{self, GoldLabels, ReportError};

pub const CACHE_ENV: &str = "NAMECENSUS_CACHE";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error(transparent)]
    Batch(#[from] BatchError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Surnames(#[from] SurnameListError),
    #[error("invalid classifier configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("config file {path}: {message}")]
    ConfigFile { path: PathBuf, message: String },
    #[error("no cache given: pass --cache or set {CACHE_ENV}")]
    NoCache,
    #[error("output: {0}")]
    Output(#[from] std::io::Error),
}

#[derive(Debug, Parser)]
#[command(name = "namecensus", version, about = "Gender inference for mixed Chinese/English name lists")]
#[command(propagate_version = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse the corpora and write the binary model cache.
    BuildCache(BuildCacheArgs),
    /// Classify a name list and write the results CSV.
    Predict(PredictArgs),
    /// Score predictions against gold genders.
    Eval(EvalArgs),
    /// Draw the aggregate chart from a results CSV.
    Chart(ChartArgs),
}

#[derive(Debug, Args)]
pub struct BuildCacheArgs {
    /// Directory of yob<YYYY>.txt files.
    #[arg(long)]
    pub english_dir: PathBuf,
    /// Character frequency CSV with header `char,female,male`.
    #[arg(long)]
    pub chinese_csv: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Smoothing alpha stored with the Chinese model.
    #[arg(long, default_value_t = corpus::DEFAULT_SMOOTHING_ALPHA)]
    pub alpha: f64,
    /// Rebuild even when the cache matches the inputs.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    pub format: InputFormat,
    /// CSV column holding names: a header name, or a 1-based column number.
    #[arg(long)]
    pub name_column: Option<String>,
    /// The CSV input has no header row.
    #[arg(long)]
    pub no_header: bool,
}

impl InputArgs {
    fn read_options(&self) -> ReadOptions {
        let name_column = match self.name_column.as_deref() {
            None => NameColumn::Index(0),
            Some(s) => match s.parse::<usize>() {
                Ok(n) if n >= 1 => NameColumn::Index(n - 1),
                _ => NameColumn::Header(s.to_string()),
            },
        };
        ReadOptions {
            format: self.format,
            name_column,
            has_header: !self.no_header,
        }
    }
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, env = CACHE_ENV)]
    pub cache: Option<PathBuf>,
    /// Replace the bundled compound surname list.
    #[arg(long)]
    pub compound_surnames: Option<PathBuf>,
    /// TOML file with classifier settings; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Decisive threshold; posteriors must exceed it for Female/Male.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub unisex_floor: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum)]
    pub priors: Option<PriorsMode>,
    /// Predict on one thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub chart_json: Option<PathBuf>,
    #[arg(long)]
    pub chart_svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub input: InputArgs,
    /// CSV `name,gender` with gender Female or Male.
    #[arg(long)]
    pub gold: PathBuf,
    /// Also write the results CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ChartArgs {
    /// Results CSV written by `predict`.
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long)]
    pub json: PathBuf,
    #[arg(long)]
    pub svg: PathBuf,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    decisive_threshold: Option<f64>,
    unisex_floor: Option<f64>,
    smoothing_alpha: Option<f64>,
    priors_mode: Option<PriorsMode>,
}

fn load_config_file(path: &Path) -> Result<ConfigFile, CliError> {
    let err = |message: String| CliError::ConfigFile {
        path: path.to_path_buf(),
        message,
    };
    let text = fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
    toml::from_str(&text).map_err(|e| err(e.to_string()))
}

/// Defaults, then the cached model's alpha, then the config file, then flags.
fn resolve_config(args: &ModelArgs, cache: &ModelCache) -> Result<ClassifierConfig, CliError> {
    let mut config = ClassifierConfig {
        smoothing_alpha: cache.chinese.smoothing_alpha(),
        ..ClassifierConfig::default()
    };
    if let Some(path) = &args.config {
        let file = load_config_file(path)?;
        config.decisive_threshold = file.decisive_threshold.unwrap_or(config.decisive_threshold);
        config.unisex_floor = file.unisex_floor.unwrap_or(config.unisex_floor);
        config.smoothing_alpha = file.smoothing_alpha.unwrap_or(config.smoothing_alpha);
        config.priors_mode = file.priors_mode.unwrap_or(config.priors_mode);
    }
    config.decisive_threshold = args.threshold.unwrap_or(config.decisive_threshold);
    config.unisex_floor = args.unisex_floor.unwrap_or(config.unisex_floor);
    config.smoothing_alpha = args.alpha.unwrap_or(config.smoothing_alpha);
    config.priors_mode = args.priors.unwrap_or(config.priors_mode);
    config.validate()?;
    Ok(config)
}

fn load_models(args: &ModelArgs) -> Result<(Models, ClassifierConfig), CliError> {
    let path = args.cache.as_ref().ok_or(CliError::NoCache)?;
    let cache = cache::load_cache(path)?;
    let config = resolve_config(args, &cache)?;
    let surnames = match &args.compound_surnames {
        Some(p) => CompoundSurnames::from_file(p)?,
        None => CompoundSurnames::default(),
    };
    let models = Models {
        english: cache.english,
        chinese: cache.chinese,
        surnames,
    };
    Ok((models, config))
}

fn predict_records(
    args: &ModelArgs,
    input: &InputArgs,
) -> Result<(Vec<crate::classifier::Prediction>, f64), CliError> {
    let (models, config) = load_models(args)?;
    let records = batch::read_input(&input.input, &input.read_options())?;
    let start = Instant::now();
    let predictions = if args.sequential {
        batch::run_batch_sequential(&models, &config, &records)
    } else {
        batch::run_batch(&models, &config, &records)
    };
    Ok((predictions, start.elapsed().as_secs_f64()))
}

pub fn render_stats(stats: &AggregateStats) -> String {
    let mut out = format!("{:<10}{:>8}{:>10}\n", "gender", "count", "percent");
    for label in GenderLabel::ALL {
        out.push_str(&format!(
            "{:<10}{:>8}{:>9.2}%\n",
            label.as_str(),
            stats.count(label),
            stats.percent(label)
        ));
    }
    out.push_str(&format!("{:<10}{:>8}\n", "total", stats.total()));
    out
}

fn build_cache(args: &BuildCacheArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let digest = cache::source_digest(&args.english_dir, &args.chinese_csv)?;
    if !args.force {
        if let Ok(existing) = cache::load_cache(&args.out) {
            if existing.source_digest == digest && existing.chinese.smoothing_alpha() == args.alpha {
                writeln!(out, "cache up to date: {}", args.out.display())?;
                return Ok(());
            }
        }
    }
    let english = corpus::load_english_year_files(&args.english_dir)?;
    let chinese = corpus::load_chinese_charfreq(&args.chinese_csv)?.with_alpha(args.alpha)?;
    let model_cache = ModelCache::new(english, chinese, digest);
    cache::save_cache(&model_cache, &args.out)?;
    writeln!(out, "distinct names: {}", model_cache.english.distinct_names())?;
    writeln!(out, "characters: {}", model_cache.chinese.vocabulary_size())?;
    writeln!(out, "wrote {}", args.out.display())?;
    Ok(())
}

fn predict_cmd(args: &PredictArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (predictions, elapsed) = predict_records(&args.model, &args.input)?;
    batch::write_results(&predictions, &args.out)?;
    let stats = batch::aggregate(&predictions)?;
    if let (Some(json), Some(svg)) = (&args.chart_json, &args.chart_svg) {
        report::emit_chart(&stats, json, svg)?;
    } else if let Some(json) = &args.chart_json {
        fs::write(json, report::chart_json(&stats)).map_err(|source| ReportError::Write {
            path: json.clone(),
            source,
        })?;
    } else if let Some(svg) = &args.chart_svg {
        fs::write(svg, report::chart_svg(&stats)).map_err(|source| ReportError::Write {
            path: svg.clone(),
            source,
        })?;
    }
    write!(out, "{}", render_stats(&stats))?;
    let rate = if elapsed > 0.0 {
        predictions.len() as f64 / elapsed
    } else {
        f64::INFINITY
    };
    writeln!(out, "elapsed: {elapsed:.3} s ({rate:.0} names/s)")?;
    Ok(())
}

fn eval_cmd(args: &EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let gold = GoldLabels::from_csv(&args.gold)?;
    let (predictions, _) = predict_records(&args.model, &args.input)?;
    if let Some(path) = &args.out {
        batch::write_results(&predictions, path)?;
    }
    let result = report::evaluate(&predictions, &gold)?;
    write!(out, "{}", result.render())?;
    Ok(())
}

fn chart_cmd(args: &ChartArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let rows = batch::read_results(&args.results)?;
    let labels = rows.iter().map(|r| r.gender.parse::<GenderLabel>().expect("validated on read"));
    let stats = batch::aggregate_labels(labels)?;
    report::emit_chart(&stats, &args.json, &args.svg)?;
    write!(out, "{}", render_stats(&stats))?;
    Ok(())
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::BuildCache(args) => build_cache(args, out),
        Command::Predict(args) => predict_cmd(args, out),
        Command::Eval(args) => eval_cmd(args, out),
        Command::Chart(args) => chart_cmd(args, out),
    }
}
