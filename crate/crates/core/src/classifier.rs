//! Naive Bayes gender posteriors and the four-way label.
//!
//! Latin given names are looked up whole in the English model, so the
//! posterior is the female share of that name's count. Chinese given
//! names are scored per character with add-alpha smoothing and combined
//! in log space.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{normalize_key, ChineseCharModel, EnglishNameModel};
use crate::namesplit::{split_chinese, split_english, CompoundSurnames};
use crate::script::{detect_script, han_substring, Script};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GenderLabel {
    Female,
    Male,
    Unisex,
    Unknown,
}

impl GenderLabel {
    /// Fixed reporting order.
    pub const ALL: [GenderLabel; 4] = [
        GenderLabel::Female,
        GenderLabel::Male,
        GenderLabel::Unisex,
        GenderLabel::Unknown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GenderLabel::Female => "Female",
            GenderLabel::Male => "Male",
            GenderLabel::Unisex => "Unisex",
            GenderLabel::Unknown => "Unknown",
        }
    }

    /// Position in [`GenderLabel::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for GenderLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GenderLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GenderLabel::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown gender label {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PriorsMode {
    #[default]
    Empirical,
    Uniform,
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("thresholds must satisfy 0.5 <= unisex_floor ({floor}) <= decisive_threshold ({threshold}) < 1")]
    Thresholds { floor: f64, threshold: f64 },
    #[error("smoothing alpha must be positive and finite, got {0}")]
    Alpha(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    pub decisive_threshold: f64,
    pub unisex_floor: f64,
    pub smoothing_alpha: f64,
    pub priors_mode: PriorsMode,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            decisive_threshold: 0.60,
            unisex_floor: 0.50,
            smoothing_alpha: 1.0,
            priors_mode: PriorsMode::Empirical,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let (floor, threshold) = (self.unisex_floor, self.decisive_threshold);
        if !(0.5 <= floor && floor <= threshold && threshold < 1.0) {
            return Err(ConfigError::Thresholds { floor, threshold });
        }
        if !(self.smoothing_alpha.is_finite() && self.smoothing_alpha > 0.0) {
            return Err(ConfigError::Alpha(self.smoothing_alpha));
        }
        Ok(())
    }
}

/// P(gender | name), present only when the model knows the name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Posterior {
    NoEvidence,
    Found { p_female: f64, p_male: f64 },
}

impl Posterior {
    pub fn evidence_found(&self) -> bool {
        matches!(self, Posterior::Found { .. })
    }

    pub fn p_female(&self) -> Option<f64> {
        match *self {
            Posterior::Found { p_female, .. } => Some(p_female),
            Posterior::NoEvidence => None,
        }
    }

    pub fn p_male(&self) -> Option<f64> {
        match *self {
            Posterior::Found { p_male, .. } => Some(p_male),
            Posterior::NoEvidence => None,
        }
    }

    /// The larger of the two posteriors.
    pub fn max(&self) -> Option<f64> {
        match *self {
            Posterior::Found { p_female, p_male } => Some(p_female.max(p_male)),
            Posterior::NoEvidence => None,
        }
    }
}

/// Looks up `given` as a whole name. `given` is normalized here.
pub fn posterior_english(model: &EnglishNameModel, given: &str) -> Posterior {
    let Some(counts) = model.get(&normalize_key(given)) else {
        return Posterior::NoEvidence;
    };
    let total = counts.total();
    if total == 0 {
        return Posterior::NoEvidence;
    }
    let p_female = counts.female as f64 / total as f64;
    Posterior::Found {
        p_female,
        p_male: counts.male as f64 / total as f64,
    }
}

/// Per-character Naive Bayes over the Han characters of `given`.
///
/// For each gender the score is `log P(g) + sum_c log((n(c,g) + a) / (N_g + a V))`
/// and the posterior is the normalized exponential of the two scores.
/// A name carries evidence only if at least one of its characters has a
/// nonzero count in the model.
pub fn posterior_chinese(model: &ChineseCharModel, given: &str, config: &ClassifierConfig) -> Posterior {
    let known = given
        .chars()
        .any(|c| model.get(c).is_some_and(|counts| counts.total() > 0));
    if !known {
        return Posterior::NoEvidence;
    }

    let total_female = model.total_female() as f64;
    let total_male = model.total_male() as f64;
    let (mut score_female, mut score_male) = match config.priors_mode {
        PriorsMode::Empirical => {
            let all = total_female + total_male;
            ((total_female / all).ln(), (total_male / all).ln())
        }
        PriorsMode::Uniform => (0.5f64.ln(), 0.5f64.ln()),
    };

    let alpha = config.smoothing_alpha;
    let vocab = model.vocabulary_size() as f64;
    let denom_female = (total_female + alpha * vocab).ln();
    let denom_male = (total_male + alpha * vocab).ln();
    for c in given.chars() {
        let counts = model.get(c).unwrap_or_default();
        score_female += (counts.female as f64 + alpha).ln() - denom_female;
        score_male += (counts.male as f64 + alpha).ln() - denom_male;
    }

    let top = score_female.max(score_male);
    let female = (score_female - top).exp();
    let male = (score_male - top).exp();
    let sum = female + male;
    Posterior::Found {
        p_female: female / sum,
        p_male: male / sum,
    }
}

/// Maps a posterior onto the four labels.
///
/// Decisive labels need strictly more than `decisive_threshold`. The band
/// `[unisex_floor, decisive_threshold]` is Unisex. A maximum below the floor
/// (only possible when the floor is raised above 0.5) is Unknown.
pub fn classify(post: &Posterior, config: &ClassifierConfig) -> GenderLabel {
    let Posterior::Found { p_female, p_male } = *post else {
        return GenderLabel::Unknown;
    };
    if p_female > config.decisive_threshold {
        GenderLabel::Female
    } else if p_male > config.decisive_threshold {
        GenderLabel::Male
    } else if p_female.max(p_male) >= config.unisex_floor {
        GenderLabel::Unisex
    } else {
        GenderLabel::Unknown
    }
}

/// Everything `predict` reads. Immutable once built.
#[derive(Debug, Clone, Default)]
pub struct Models {
    pub english: EnglishNameModel,
    pub chinese: ChineseCharModel,
    pub surnames: CompoundSurnames,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// 1-based position in the batch.
    pub index: usize,
    pub raw_name: String,
    pub script: Script,
    /// Lookup form of the extracted given name: the normalized key for
    /// Latin names, the Han characters for Chinese names.
    pub given_name: Option<String>,
    pub posterior: Posterior,
    pub label: GenderLabel,
}

/// Extracts the given name for the pipeline matching `script`.
pub fn extract_given(raw_name: &str, script: Script, surnames: &CompoundSurnames) -> Option<String> {
    match script {
        Script::Han | Script::Mixed => {
            let han = han_substring(raw_name);
            Some(split_chinese(&han, surnames).given).filter(|g| !g.is_empty())
        }
        Script::Latin => {
            let key = normalize_key(&split_english(raw_name).given);
            Some(key).filter(|k| !k.is_empty())
        }
        Script::Other | Script::Empty => None,
    }
}

/// Full pipeline for one name; `index` is carried through unchanged.
pub fn predict(models: &Models, config: &ClassifierConfig, index: usize, raw_name: &str) -> Prediction {
    let script = detect_script(raw_name);
    let given_name = extract_given(raw_name, script, &models.surnames);
    let posterior = match (&given_name, script) {
        (Some(given), Script::Latin) => posterior_english(&models.english, given),
        (Some(given), Script::Han | Script::Mixed) => posterior_chinese(&models.chinese, given, config),
        _ => Posterior::NoEvidence,
    };
    Prediction {
        index,
        raw_name: raw_name.to_string(),
        script,
        given_name,
        label: classify(&posterior, config),
        posterior,
    }
}
