//! Aggregate chart emission and accuracy evaluation against gold labels.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::batch::AggregateStats;
use crate::classifier::{GenderLabel, Prediction};

/// Pixel height of a 100% bar.
pub const CHART_SCALE_PX: f64 = 400.0;

const BAR_WIDTH: f64 = 80.0;
const BAR_GAP: f64 = 40.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 50.0;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid chart JSON: {0}")]
    ChartJson(String),
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}:{line}: gold gender must be Female or Male, found {value:?}")]
    BadGold {
        path: PathBuf,
        line: usize,
        value: String,
    },
    #[error("{path}: gold file needs `name,gender` header, found {found:?}")]
    GoldHeader { path: PathBuf, found: String },
    #[error("gold name {0:?} is listed with conflicting genders")]
    ConflictingGold(String),
    #[error("gold set is empty")]
    EmptyGold,
    #[error("gold names missing from predictions: {}", .0.join(", "))]
    UnmatchedGold(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartLabel {
    pub name: String,
    pub count: usize,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartData {
    pub total: usize,
    pub labels: Vec<ChartLabel>,
}

impl From<&AggregateStats> for ChartData {
    fn from(stats: &AggregateStats) -> Self {
        Self {
            total: stats.total(),
            labels: GenderLabel::ALL
                .into_iter()
                .map(|l| ChartLabel {
                    name: l.to_string(),
                    count: stats.count(l),
                    percent: stats.percent(l),
                })
                .collect(),
        }
    }
}

impl ChartData {
    /// Checks label order and count/percent consistency, then rebuilds the stats.
    pub fn to_stats(&self) -> Result<AggregateStats, ReportError> {
        let bad = |msg: String| Err(ReportError::ChartJson(msg));
        if self.labels.len() != 4 {
            return bad(format!("expected 4 labels, found {}", self.labels.len()));
        }
        let mut counts = [0usize; 4];
        let mut percentages = [0f64; 4];
        for (i, (entry, expected)) in self.labels.iter().zip(GenderLabel::ALL).enumerate() {
            if entry.name != expected.as_str() {
                return bad(format!("label {i} should be {expected}, found {:?}", entry.name));
            }
            if !(0.0..=100.0).contains(&entry.percent) {
                return bad(format!("{} percent {} outside [0, 100]", entry.name, entry.percent));
            }
            counts[i] = entry.count;
            percentages[i] = entry.percent;
        }
        if self.total == 0 || counts.iter().sum::<usize>() != self.total {
            return bad(format!("counts do not sum to total {}", self.total));
        }
        Ok(AggregateStats::from_parts(counts, percentages, self.total))
    }
}

pub fn chart_json(stats: &AggregateStats) -> String {
    let mut json = serde_json::to_string_pretty(&ChartData::from(stats)).expect("chart data serializes");
    json.push('\n');
    json
}

pub fn parse_chart_json(text: &str) -> Result<AggregateStats, ReportError> {
    let data: ChartData = serde_json::from_str(text).map_err(|e| ReportError::ChartJson(e.to_string()))?;
    data.to_stats()
}

fn fill(label: GenderLabel) -> &'static str {
    match label {
        GenderLabel::Female => "#d95f8e",
        GenderLabel::Male => "#3b7dd8",
        GenderLabel::Unisex => "#9b6fc4",
        GenderLabel::Unknown => "#9e9e9e",
    }
}

/// Static bar chart, one bar per label, 100% = [`CHART_SCALE_PX`] pixels.
pub fn chart_svg(stats: &AggregateStats) -> String {
    let width = MARGIN_LEFT * 2.0 + 4.0 * BAR_WIDTH + 3.0 * BAR_GAP;
    let height = MARGIN_TOP + CHART_SCALE_PX + MARGIN_BOTTOM;
    let baseline = MARGIN_TOP + CHART_SCALE_PX;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="14">"#
    );
    let _ = writeln!(svg, r#"  <rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"  <text x="{}" y="24" text-anchor="middle" font-size="16">Gender distribution (n = {})</text>"#,
        width / 2.0,
        stats.total()
    );
    let _ = writeln!(
        svg,
        r#"  <line x1="{MARGIN_LEFT}" y1="{baseline}" x2="{}" y2="{baseline}" stroke="black"/>"#,
        width - MARGIN_LEFT
    );
    for (i, label) in GenderLabel::ALL.into_iter().enumerate() {
        let pct = stats.percent(label);
        let bar_height = pct / 100.0 * CHART_SCALE_PX;
        let x = MARGIN_LEFT + i as f64 * (BAR_WIDTH + BAR_GAP);
        let y = baseline - bar_height;
        let cx = x + BAR_WIDTH / 2.0;
        let _ = writeln!(
            svg,
            r#"  <rect class="bar" data-label="{label}" x="{x:.2}" y="{y:.2}" width="{BAR_WIDTH:.2}" height="{bar_height:.2}" fill="{}"/>"#,
            fill(label)
        );
        let _ = writeln!(
            svg,
            r#"  <text x="{cx:.2}" y="{:.2}" text-anchor="middle">{pct:.1}% ({})</text>"#,
            y - 6.0,
            stats.count(label)
        );
        let _ = writeln!(
            svg,
            r#"  <text x="{cx:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
            baseline + 22.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes the chart as JSON and as SVG.
pub fn emit_chart(stats: &AggregateStats, json_path: &Path, svg_path: &Path) -> Result<(), ReportError> {
    write_file(json_path, chart_json(stats).as_bytes())?;
    write_file(svg_path, chart_svg(stats).as_bytes())
}

pub fn read_chart_json(path: &Path) -> Result<AggregateStats, ReportError> {
    let text = fs::read_to_string(path).map_err(|source| ReportError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_chart_json(&text)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), ReportError> {
    fs::write(path, bytes).map_err(|source| ReportError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Binary ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gold {
    Female,
    Male,
}

impl Gold {
    pub fn label(self) -> GenderLabel {
        match self {
            Gold::Female => GenderLabel::Female,
            Gold::Male => GenderLabel::Male,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Gold labels keyed by raw name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GoldLabels(BTreeMap<String, Gold>);

impl GoldLabels {
    /// Repeated names are accepted when they agree.
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self, ReportError>
    where
        I: IntoIterator<Item = (S, Gold)>,
        S: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (name, gold) in pairs {
            let name: String = name.into();
            match map.entry(name.trim().to_string()) {
                Entry::Vacant(slot) => {
                    slot.insert(gold);
                }
                Entry::Occupied(slot) if *slot.get() == gold => {}
                Entry::Occupied(slot) => return Err(ReportError::ConflictingGold(slot.key().clone())),
            }
        }
        Ok(Self(map))
    }

    /// Reads a `name,gender` CSV with a header row.
    pub fn from_csv(path: &Path) -> Result<Self, ReportError> {
        let csv_err = |source| ReportError::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
        let headers = reader.headers().map_err(csv_err)?.clone();
        let col = |want: &str| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(want));
        let (Some(name_col), Some(gender_col)) = (col("name"), col("gender")) else {
            return Err(ReportError::GoldHeader {
                path: path.to_path_buf(),
                found: headers.iter().collect::<Vec<_>>().join(","),
            });
        };
        let mut pairs = Vec::new();
        for (i, row) in reader.records().enumerate() {
            let row = row.map_err(csv_err)?;
            let name = row.get(name_col).unwrap_or("").trim();
            if name.is_empty() {
                continue;
            }
            let value = row.get(gender_col).unwrap_or("").trim();
            let gold = match value.to_ascii_lowercase().as_str() {
                "female" => Gold::Female,
                "male" => Gold::Male,
                _ => {
                    return Err(ReportError::BadGold {
                        path: path.to_path_buf(),
                        line: i + 2,
                        value: value.to_string(),
                    })
                }
            };
            pairs.push((name.to_string(), gold));
        }
        Self::from_pairs(pairs)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Gold)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub name: String,
    pub predicted: GenderLabel,
    pub gold: Gold,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// Rows are predicted labels in [`GenderLabel::ALL`] order, columns are
    /// gold Female then Male.
    pub confusion: [[usize; 2]; 4],
    /// In gold-name order.
    pub mismatches: Vec<Mismatch>,
}

/// Strict scoring: only an exact Female/Male match counts as correct.
pub fn evaluate(predictions: &[Prediction], gold: &GoldLabels) -> Result<EvalResult, ReportError> {
    if gold.is_empty() {
        return Err(ReportError::EmptyGold);
    }
    let mut by_name: HashMap<&str, GenderLabel> = HashMap::with_capacity(predictions.len());
    for p in predictions {
        by_name.entry(p.raw_name.as_str()).or_insert(p.label);
    }
    let unmatched: Vec<String> = gold
        .iter()
        .filter(|(name, _)| !by_name.contains_key(name))
        .map(|(name, _)| name.to_string())
        .collect();
    if !unmatched.is_empty() {
        return Err(ReportError::UnmatchedGold(unmatched));
    }

    let mut confusion = [[0usize; 2]; 4];
    let mut mismatches = Vec::new();
    for (name, truth) in gold.iter() {
        let predicted = by_name[name];
        confusion[predicted.index()][truth.index()] += 1;
        if predicted != truth.label() {
            mismatches.push(Mismatch {
                name: name.to_string(),
                predicted,
                gold: truth,
            });
        }
    }
    let total = gold.len();
    let correct = total - mismatches.len();
    Ok(EvalResult {
        total,
        correct,
        accuracy: correct as f64 / total as f64,
        confusion,
        mismatches,
    })
}

impl EvalResult {
    /// Human-readable accuracy, confusion matrix and mismatch list.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "accuracy: {:.4} ({}/{})", self.accuracy, self.correct, self.total);
        let _ = writeln!(out, "{:<10}{:>8}{:>8}", "predicted", "Female", "Male");
        for label in GenderLabel::ALL {
            let row = self.confusion[label.index()];
            let _ = writeln!(out, "{:<10}{:>8}{:>8}", label.as_str(), row[0], row[1]);
        }
        if !self.mismatches.is_empty() {
            let _ = writeln!(out, "mismatches:");
            for m in &self.mismatches {
                let _ = writeln!(out, "  {}: predicted {}, gold {}", m.name, m.predicted, m.gold.label());
            }
        }
        out
    }
}
