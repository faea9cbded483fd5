//! Batch input, prediction and results output.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{predict, ClassifierConfig, GenderLabel, Models, Prediction};

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: invalid UTF-8 at byte offset {offset}")]
    InvalidUtf8 { path: PathBuf, offset: usize },
    #[error("{path}: no column {column}")]
    MissingColumn { path: PathBuf, column: String },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{0}: input contains no names")]
    EmptyInput(PathBuf),
    #[error("{path}: bad results row {line}: {reason}")]
    BadResultRow {
        path: PathBuf,
        line: u64,
        reason: String,
    },
    #[error("cannot aggregate an empty batch")]
    EmptyBatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum InputFormat {
    Txt,
    Csv,
    #[default]
    Auto,
}

/// Which CSV column holds the names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NameColumn {
    Header(String),
    /// Zero-based position.
    Index(usize),
}

impl Default for NameColumn {
    fn default() -> Self {
        NameColumn::Index(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReadOptions {
    pub format: InputFormat,
    pub name_column: NameColumn,
    pub has_header: bool,
}

impl Default for ReadOptions {
    fn default() -> Self {
        Self {
            format: InputFormat::Auto,
            name_column: NameColumn::default(),
            has_header: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameRecord {
    pub index: usize,
    pub raw_name: String,
}

fn resolve_format(path: &Path, format: InputFormat) -> InputFormat {
    match format {
        InputFormat::Auto => {
            let is_csv = path
                .extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
            if is_csv {
                InputFormat::Csv
            } else {
                InputFormat::Txt
            }
        }
        other => other,
    }
}

/// Reads names from a text or CSV file.
///
/// Blank names are skipped and indices stay contiguous over kept records.
pub fn read_input(path: &Path, options: &ReadOptions) -> Result<Vec<NameRecord>, BatchError> {
    let bytes = fs::read(path).map_err(|source| BatchError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let text = std::str::from_utf8(&bytes).map_err(|e| BatchError::InvalidUtf8 {
        path: path.to_path_buf(),
        offset: e.valid_up_to(),
    })?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);

    let names: Vec<String> = match resolve_format(path, options.format) {
        InputFormat::Csv => read_csv_names(path, text, options)?,
        _ => text.lines().map(|l| l.trim().to_string()).collect(),
    };
    let records: Vec<NameRecord> = names
        .into_iter()
        .filter(|n| !n.is_empty())
        .enumerate()
        .map(|(i, raw_name)| NameRecord { index: i + 1, raw_name })
        .collect();
    if records.is_empty() {
        return Err(BatchError::EmptyInput(path.to_path_buf()));
    }
    Ok(records)
}

fn read_csv_names(path: &Path, text: &str, options: &ReadOptions) -> Result<Vec<String>, BatchError> {
    let csv_err = |source| BatchError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(options.has_header)
        .flexible(true)
        .from_reader(text.as_bytes());
    let column = match &options.name_column {
        NameColumn::Index(i) => *i,
        NameColumn::Header(name) => {
            let missing = || BatchError::MissingColumn {
                path: path.to_path_buf(),
                column: format!("{name:?}"),
            };
            if !options.has_header {
                return Err(missing());
            }
            let headers = reader.headers().map_err(csv_err)?;
            headers.iter().position(|h| h.trim() == name).ok_or_else(missing)?
        }
    };
    if options.has_header {
        let width = reader.headers().map_err(csv_err)?.len();
        if width == 0 {
            return Ok(Vec::new());
        }
        if column >= width {
            return Err(BatchError::MissingColumn {
                path: path.to_path_buf(),
                column: format!("#{}", column + 1),
            });
        }
    }
    let mut names = Vec::new();
    for row in reader.records() {
        let row = row.map_err(csv_err)?;
        names.push(row.get(column).unwrap_or("").trim().to_string());
    }
    Ok(names)
}

/// Predicts every record in parallel; output order matches `records`.
pub fn run_batch(models: &Models, config: &ClassifierConfig, records: &[NameRecord]) -> Vec<Prediction> {
    records
        .par_iter()
        .map(|r| predict(models, config, r.index, &r.raw_name))
        .collect()
}

/// Single-threaded reference for [`run_batch`].
pub fn run_batch_sequential(models: &Models, config: &ClassifierConfig, records: &[NameRecord]) -> Vec<Prediction> {
    records
        .iter()
        .map(|r| predict(models, config, r.index, &r.raw_name))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultRow {
    pub item: usize,
    pub name: String,
    pub gender: String,
    pub probability: String,
    pub script: String,
    pub given_name: String,
}

impl From<&Prediction> for ResultRow {
    fn from(p: &Prediction) -> Self {
        let probability = match (p.label, p.posterior.max()) {
            (GenderLabel::Unknown, _) | (_, None) => String::new(),
            (_, Some(max)) => format!("{max:.4}"),
        };
        Self {
            item: p.index,
            name: p.raw_name.clone(),
            gender: p.label.to_string(),
            probability,
            script: p.script.to_string(),
            given_name: p.given_name.clone().unwrap_or_default(),
        }
    }
}

/// Serializes predictions as the results CSV (header plus one row each).
pub fn results_csv(predictions: &[Prediction]) -> Vec<u8> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for p in predictions {
        writer.serialize(ResultRow::from(p)).expect("in-memory CSV write");
    }
    if predictions.is_empty() {
        writer
            .write_record(["item", "name", "gender", "probability", "script", "given_name"])
            .expect("in-memory CSV write");
    }
    writer.into_inner().expect("in-memory CSV flush")
}

pub fn write_results(predictions: &[Prediction], path: &Path) -> Result<(), BatchError> {
    fs::write(path, results_csv(predictions)).map_err(|source| BatchError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a results CSV back into rows.
pub fn read_results(path: &Path) -> Result<Vec<ResultRow>, BatchError> {
    let csv_err = |source| BatchError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut rows = Vec::new();
    for (i, row) in reader.deserialize::<ResultRow>().enumerate() {
        let row = row.map_err(csv_err)?;
        if row.gender.parse::<GenderLabel>().is_err() {
            return Err(BatchError::BadResultRow {
                path: path.to_path_buf(),
                line: i as u64 + 2,
                reason: format!("unknown gender {:?}", row.gender),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Per-label counts and percentages over one batch.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateStats {
    counts: [usize; 4],
    percentages: [f64; 4],
    total: usize,
}

impl AggregateStats {
    pub fn from_counts(counts: [usize; 4]) -> Result<Self, BatchError> {
        let total: usize = counts.iter().sum();
        if total == 0 {
            return Err(BatchError::EmptyBatch);
        }
        let percentages = counts.map(|c| 100.0 * c as f64 / total as f64);
        Ok(Self {
            counts,
            percentages,
            total,
        })
    }

    /// Builds stats from explicit percentages, as read back from a chart file.
    pub(crate) fn from_parts(counts: [usize; 4], percentages: [f64; 4], total: usize) -> Self {
        Self {
            counts,
            percentages,
            total,
        }
    }

    pub fn count(&self, label: GenderLabel) -> usize {
        self.counts[label.index()]
    }

    pub fn percent(&self, label: GenderLabel) -> f64 {
        self.percentages[label.index()]
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn counts(&self) -> [usize; 4] {
        self.counts
    }

    pub fn percentages(&self) -> [f64; 4] {
        self.percentages
    }
}

pub fn aggregate_labels<I: IntoIterator<Item = GenderLabel>>(labels: I) -> Result<AggregateStats, BatchError> {
    let mut counts = [0usize; 4];
    for label in labels {
        counts[label.index()] += 1;
    }
    AggregateStats::from_counts(counts)
}

pub fn aggregate(predictions: &[Prediction]) -> Result<AggregateStats, BatchError> {
    aggregate_labels(predictions.iter().map(|p| p.label))
}
