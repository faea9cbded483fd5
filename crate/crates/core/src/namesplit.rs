//! Given-name extraction from full names.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::script::{is_han, Script};

const DEFAULT_COMPOUND_SURNAMES: &str = include_str!("../../../data/compound_surnames.txt");

#[derive(Debug, Error)]
pub enum SurnameListError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {text:?} is not a two-character Han surname")]
    InvalidEntry { line: usize, text: String },
}

/// Set of two-character Chinese surnames checked before the single-character rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompoundSurnames(HashSet<String>);

impl CompoundSurnames {
    /// Parses one surname per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, SurnameListError> {
        let mut set = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim().trim_start_matches('\u{feff}');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.chars().count() != 2 || !line.chars().all(is_han) {
                return Err(SurnameListError::InvalidEntry {
                    line: i + 1,
                    text: line.to_string(),
                });
            }
            set.insert(line.to_string());
        }
        Ok(Self(set))
    }

    pub fn from_file(path: &Path) -> Result<Self, SurnameListError> {
        let text = fs::read_to_string(path).map_err(|source| SurnameListError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn contains(&self, surname: &str) -> bool {
        self.0.contains(surname)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for CompoundSurnames {
    /// The bundled list.
    fn default() -> Self {
        Self::parse(DEFAULT_COMPOUND_SURNAMES).expect("bundled compound surname list is valid")
    }
}

impl FromIterator<String> for CompoundSurnames {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitName {
    pub surname: String,
    pub given: String,
    pub script: Script,
}

/// Splits a run of Han characters into surname and given name.
///
/// A leading compound surname takes two characters, otherwise the surname
/// is the first character. A single-character input is all given name.
pub fn split_chinese(han_text: &str, compound_surnames: &CompoundSurnames) -> SplitName {
    let chars: Vec<char> = han_text.chars().collect();
    let surname_len = match chars.len() {
        0 | 1 => 0,
        2 => 1,
        _ => {
            let lead: String = chars[..2].iter().collect();
            if compound_surnames.contains(&lead) {
                2
            } else {
                1
            }
        }
    };
    SplitName {
        surname: chars[..surname_len].iter().collect(),
        given: chars[surname_len..].iter().collect(),
        script: Script::Han,
    }
}

/// A single letter, optionally followed by a period.
fn is_initial(token: &str) -> bool {
    let mut chars = token.chars();
    match (chars.next(), chars.next(), chars.next()) {
        (Some(c), None, None) => c.is_alphabetic(),
        (Some(c), Some('.'), None) => c.is_alphabetic(),
        _ => false,
    }
}

/// Splits a Western-order Latin name into given name and surname.
///
/// The given name is the first leading token that is not an initial. The
/// last token is the surname and is never picked as the given name; when
/// only initials precede it, the first token is returned verbatim.
pub fn split_english(latin_text: &str) -> SplitName {
    let tokens: Vec<&str> = latin_text.split_whitespace().collect();
    let (given, surname) = match tokens.as_slice() {
        [] => ("", ""),
        [only] => (*only, ""),
        [leading @ .., last] => {
            let given = leading
                .iter()
                .copied()
                .find(|t| !is_initial(t))
                .unwrap_or(leading[0]);
            (given, *last)
        }
    };
    SplitName {
        surname: surname.to_string(),
        given: given.to_string(),
        script: Script::Latin,
    }
}
