//! Name-frequency corpora and the immutable count models built from them.
//!
//! English data is a directory of yearly `yob<YYYY>.txt` files with
//! `Name,S,Count` rows. Chinese data is one `char,female,male` CSV with a
//! header row. Both parsers report the offending file and 1-based line.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::script::is_han;

pub const DEFAULT_SMOOTHING_ALPHA: f64 = 1.0;

const CHINESE_HEADER: &str = "char,female,male";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus directory {0} does not exist")]
    MissingDirectory(PathBuf),
    #[error("no yob<YYYY>.txt files in {0}")]
    NoYearFiles(PathBuf),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: invalid UTF-8")]
    InvalidUtf8 { path: PathBuf, line: usize },
    #[error("{path}:{line}: {reason}")]
    Malformed {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("{path}: expected header `{CHINESE_HEADER}`, found {found:?}")]
    BadHeader { path: PathBuf, found: String },
    #[error("{path}:{line}: duplicate character {ch}")]
    DuplicateChar { path: PathBuf, line: usize, ch: char },
    #[error("{path}:{line}: {text:?} is not a single Han character")]
    NonHan {
        path: PathBuf,
        line: usize,
        text: String,
    },
    #[error("{path}:{line}: negative count {value}")]
    NegativeCount {
        path: PathBuf,
        line: usize,
        value: i64,
    },
    #[error("smoothing alpha must be positive and finite, got {0}")]
    InvalidAlpha(f64),
}

/// Female and male occurrence counts for one key.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct GenderCounts {
    pub female: u64,
    pub male: u64,
}

impl GenderCounts {
    pub fn new(female: u64, male: u64) -> Self {
        Self { female, male }
    }

    pub fn total(&self) -> u64 {
        self.female + self.male
    }
}

/// Canonical lookup key for a Latin given name.
///
/// NFC-normalizes, lowercases and trims non-alphanumeric characters from
/// both ends (so "Gray," and "gray" meet). Inner hyphens and apostrophes
/// are kept.
pub fn normalize_key(name: &str) -> String {
    let folded: String = name.nfc().flat_map(char::to_lowercase).collect();
    folded.trim_matches(|c: char| !c.is_alphanumeric()).to_string()
}

/// Per-name gender counts aggregated over every yearly file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EnglishNameModel {
    entries: BTreeMap<String, GenderCounts>,
    total_female: u64,
    total_male: u64,
}

impl EnglishNameModel {
    /// Sums counts per normalized key. Entries whose counts are both zero
    /// are dropped.
    pub fn from_counts<I, S>(rows: I) -> Self
    where
        I: IntoIterator<Item = (S, GenderCounts)>,
        S: AsRef<str>,
    {
        let mut model = Self::default();
        for (name, counts) in rows {
            model.add(&normalize_key(name.as_ref()), counts);
        }
        model
    }

    fn add(&mut self, key: &str, counts: GenderCounts) {
        if counts.total() == 0 {
            return;
        }
        let slot = self.entries.entry(key.to_string()).or_default();
        slot.female += counts.female;
        slot.male += counts.male;
        self.total_female += counts.female;
        self.total_male += counts.male;
    }

    /// Looks up an already-normalized key.
    pub fn get(&self, key: &str) -> Option<GenderCounts> {
        self.entries.get(key).copied()
    }

    /// Entries in key order.
    pub fn entries(&self) -> impl ExactSizeIterator<Item = (&str, GenderCounts)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn distinct_names(&self) -> usize {
        self.entries.len()
    }

    pub fn total_female(&self) -> u64 {
        self.total_female
    }

    pub fn total_male(&self) -> u64 {
        self.total_male
    }
}

/// Per-character gender counts for Chinese given names.
#[derive(Debug, Clone, PartialEq)]
pub struct ChineseCharModel {
    entries: BTreeMap<char, GenderCounts>,
    total_female: u64,
    total_male: u64,
    smoothing_alpha: f64,
}

impl Default for ChineseCharModel {
    fn default() -> Self {
        Self {
            entries: BTreeMap::new(),
            total_female: 0,
            total_male: 0,
            smoothing_alpha: DEFAULT_SMOOTHING_ALPHA,
        }
    }
}

impl ChineseCharModel {
    /// Builds a model from distinct characters. Later duplicates replace
    /// earlier ones; file loading rejects duplicates before this point.
    pub fn from_counts<I>(rows: I) -> Self
    where
        I: IntoIterator<Item = (char, GenderCounts)>,
    {
        let entries: BTreeMap<char, GenderCounts> = rows.into_iter().collect();
        let total_female = entries.values().map(|c| c.female).sum();
        let total_male = entries.values().map(|c| c.male).sum();
        Self {
            entries,
            total_female,
            total_male,
            smoothing_alpha: DEFAULT_SMOOTHING_ALPHA,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self, CorpusError> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(CorpusError::InvalidAlpha(alpha));
        }
        self.smoothing_alpha = alpha;
        Ok(self)
    }

    pub fn get(&self, c: char) -> Option<GenderCounts> {
        self.entries.get(&c).copied()
    }

    pub fn entries(&self) -> impl ExactSizeIterator<Item = (char, GenderCounts)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }

    pub fn vocabulary_size(&self) -> usize {
        self.entries.len()
    }

    pub fn total_female(&self) -> u64 {
        self.total_female
    }

    pub fn total_male(&self) -> u64 {
        self.total_male
    }

    pub fn smoothing_alpha(&self) -> f64 {
        self.smoothing_alpha
    }
}

/// Returns the year for file names of the form `yob<YYYY>.txt`.
pub fn year_file_year(file_name: &str) -> Option<u16> {
    let digits = file_name.strip_prefix("yob")?.strip_suffix(".txt")?;
    if digits.len() == 4 && digits.bytes().all(|b| b.is_ascii_digit()) {
        digits.parse().ok()
    } else {
        None
    }
}

/// The yearly files of `dir`, sorted by file name.
pub fn year_files(dir: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    if !dir.is_dir() {
        return Err(CorpusError::MissingDirectory(dir.to_path_buf()));
    }
    let io_err = |source| CorpusError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err)? {
        let entry = entry.map_err(io_err)?;
        let name = entry.file_name();
        let is_year_file = name.to_str().and_then(year_file_year).is_some();
        if is_year_file && entry.path().is_file() {
            files.push(entry.path());
        }
    }
    if files.is_empty() {
        return Err(CorpusError::NoYearFiles(dir.to_path_buf()));
    }
    files.sort();
    Ok(files)
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CorpusError> {
    fs::read(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Splits on LF, strips a trailing CR, and decodes each line.
fn lines_of<'a>(
    path: &'a Path,
    bytes: &'a [u8],
) -> impl Iterator<Item = Result<(usize, &'a str), CorpusError>> + 'a {
    let bytes = bytes.strip_prefix(b"\xef\xbb\xbf").unwrap_or(bytes);
    bytes.split(|&b| b == b'\n').enumerate().map(move |(i, raw)| {
        let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
        std::str::from_utf8(raw)
            .map(|s| (i + 1, s))
            .map_err(|_| CorpusError::InvalidUtf8 {
                path: path.to_path_buf(),
                line: i + 1,
            })
    })
}

fn parse_year_row(line: &str) -> Result<(&str, bool, u64), String> {
    let fields: Vec<&str> = line.split(',').collect();
    let [name, sex, count] = fields.as_slice() else {
        return Err(format!("expected 3 columns, found {}", fields.len()));
    };
    let name = name.trim();
    if name.is_empty() {
        return Err("empty name".into());
    }
    if name.chars().any(|c| c.is_ascii_digit()) {
        return Err(format!("name {name:?} contains digits"));
    }
    let is_female = match sex.trim() {
        "F" => true,
        "M" => false,
        other => return Err(format!("sex must be F or M, found {other:?}")),
    };
    let count: u64 = count
        .trim()
        .parse()
        .map_err(|_| format!("count {:?} is not a non-negative integer", count.trim()))?;
    if count == 0 {
        return Err("count must be at least 1".into());
    }
    Ok((name, is_female, count))
}

/// Loads and sums every `yob<YYYY>.txt` file in `dir`.
pub fn load_english_year_files(dir: &Path) -> Result<EnglishNameModel, CorpusError> {
    let mut model = EnglishNameModel::default();
    for path in year_files(dir)? {
        let bytes = read_bytes(&path)?;
        for line in lines_of(&path, &bytes) {
            let (line_no, line) = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (name, is_female, count) =
                parse_year_row(line).map_err(|reason| CorpusError::Malformed {
                    path: path.clone(),
                    line: line_no,
                    reason,
                })?;
            let counts = if is_female {
                GenderCounts::new(count, 0)
            } else {
                GenderCounts::new(0, count)
            };
            model.add(&normalize_key(name), counts);
        }
    }
    Ok(model)
}

/// Loads the Chinese character table with the default smoothing alpha.
pub fn load_chinese_charfreq(path: &Path) -> Result<ChineseCharModel, CorpusError> {
    let bytes = read_bytes(path)?;
    let mut lines = lines_of(path, &bytes);
    let header = match lines.next() {
        Some(line) => line?.1,
        None => "",
    };
    if header.trim() != CHINESE_HEADER {
        return Err(CorpusError::BadHeader {
            path: path.to_path_buf(),
            found: header.to_string(),
        });
    }

    let mut entries = BTreeMap::new();
    for line in lines {
        let (line_no, line) = line?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |reason: String| CorpusError::Malformed {
            path: path.to_path_buf(),
            line: line_no,
            reason,
        };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let [key, female, male] = fields.as_slice() else {
            return Err(malformed(format!("expected 3 columns, found {}", fields.len())));
        };
        let mut chars = key.chars();
        let ch = match (chars.next(), chars.next()) {
            (Some(c), None) if is_han(c) => c,
            _ => {
                return Err(CorpusError::NonHan {
                    path: path.to_path_buf(),
                    line: line_no,
                    text: key.to_string(),
                })
            }
        };
        let parse_count = |field: &str| -> Result<u64, CorpusError> {
            let value: i64 = field
                .parse()
                .map_err(|_| malformed(format!("count {field:?} is not an integer")))?;
            u64::try_from(value).map_err(|_| CorpusError::NegativeCount {
                path: path.to_path_buf(),
                line: line_no,
                value,
            })
        };
        let counts = GenderCounts::new(parse_count(female)?, parse_count(male)?);
        match entries.entry(ch) {
            Entry::Occupied(_) => {
                return Err(CorpusError::DuplicateChar {
                    path: path.to_path_buf(),
                    line: line_no,
                    ch,
                })
            }
            Entry::Vacant(slot) => {
                slot.insert(counts);
            }
        }
    }
    Ok(ChineseCharModel::from_counts(entries))
}
