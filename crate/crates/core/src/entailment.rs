//! Graded lexical entailment between a text and a hypothesis.
//!
//! The score blends two signals over content tokens:
//!
//! * **coverage**: the fraction of distinct hypothesis tokens that also occur
//!   in the text,
//! * **edit similarity**: one minus the token-level Levenshtein distance
//!   normalised by the longer sequence.
//!
//! Both lie in `[0, 1]`, so any convex blend does too.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{AprError, Result};
use crate::text;

/// Lowercase function words dropped before any lexical comparison.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StopWords(HashSet<String>);

impl StopWords {
    /// Parses a one-word-per-line list. Blank lines and `#` comments are ignored.
    pub fn parse(contents: &str) -> Self {
        StopWords(
            contents
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let contents = std::fs::read_to_string(path).map_err(|e| AprError::io(path, e))?;
        Ok(Self::parse(&contents))
    }

    /// The list shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(crate::data::STOP_WORDS)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn iter(&self) -> impl Iterator<Item = &String> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for StopWords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        StopWords(iter.into_iter().map(|s| s.into().to_lowercase()).collect())
    }
}

/// Content tokens of `text`: lowercased alphanumeric runs minus stop words.
pub fn tokenize(text: &str, stop_words: &StopWords) -> Vec<String> {
    text::words(text)
        .filter(|w| !stop_words.contains(w))
        .collect()
}

/// Levenshtein distance between two sequences (unit insert, delete, substitute).
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    // Keep the shorter sequence on the inner loop.
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut prev: Vec<usize> = (0..=short.len()).collect();
    let mut cur = vec![0; short.len() + 1];
    for (i, x) in long.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in short.iter().enumerate() {
            let substitute = prev[j] + usize::from(x != y);
            cur[j + 1] = substitute.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[short.len()]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Approach {
    #[default]
    CoverageBlend,
    EditDistanceOnly,
    CoverageOnly,
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Approach::CoverageBlend => "coverage_blend",
            Approach::EditDistanceOnly => "edit_distance_only",
            Approach::CoverageOnly => "coverage_only",
        })
    }
}

pub const DEFAULT_ALPHA: f64 = 0.8;

#[derive(Debug, Clone, PartialEq)]
pub struct EntailmentConfig {
    alpha: f64,
    approach: Approach,
    stop_words: StopWords,
}

impl EntailmentConfig {
    pub fn new(alpha: f64, approach: Approach, stop_words: StopWords) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(AprError::Config(format!(
                "entailment alpha must lie in [0, 1], got {alpha}"
            )));
        }
        Ok(Self {
            alpha,
            approach,
            stop_words,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn approach(&self) -> Approach {
        self.approach
    }

    pub fn stop_words(&self) -> &StopWords {
        &self.stop_words
    }
}

impl Default for EntailmentConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            approach: Approach::default(),
            stop_words: StopWords::bundled(),
        }
    }
}

/// Entailment strength in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct EntailmentScore(f64);

impl EntailmentScore {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// The two components of a score, exposed for tracing and tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntailmentParts {
    pub coverage: f64,
    pub edit_similarity: f64,
}

/// Coverage and edit similarity of already-tokenized sequences.
pub fn entailment_parts(text: &[String], hypothesis: &[String]) -> EntailmentParts {
    let coverage = if hypothesis.is_empty() {
        0.0
    } else {
        let text_set: HashSet<&str> = text.iter().map(String::as_str).collect();
        let hyp_set: BTreeSet<&str> = hypothesis.iter().map(String::as_str).collect();
        let covered = hyp_set.iter().filter(|t| text_set.contains(*t)).count();
        covered as f64 / hyp_set.len() as f64
    };
    let edit_similarity = match (text.is_empty(), hypothesis.is_empty()) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        (false, false) => {
            let longest = text.len().max(hypothesis.len());
            1.0 - levenshtein(text, hypothesis) as f64 / longest as f64
        }
    };
    EntailmentParts {
        coverage,
        edit_similarity,
    }
}

/// Scores how strongly `text` supports `hypothesis`.
pub fn text_entail(text: &str, hypothesis: &str, config: &EntailmentConfig) -> EntailmentScore {
    let t = tokenize(text, &config.stop_words);
    let h = tokenize(hypothesis, &config.stop_words);
    let parts = entailment_parts(&t, &h);
    let value = match config.approach {
        Approach::CoverageBlend => {
            config.alpha * parts.coverage + (1.0 - config.alpha) * parts.edit_similarity
        }
        Approach::CoverageOnly => parts.coverage,
        Approach::EditDistanceOnly => parts.edit_similarity,
    };
    EntailmentScore(value.clamp(0.0, 1.0))
}
