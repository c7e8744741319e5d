//! Crowd sentiment for a recommended pattern.
//!
//! A query `"<pattern> for <software type>"` is run against the experiential
//! knowledge index, every retrieved post body is scored with a valence
//! lexicon, the scores are added up, and the total is bucketed onto a
//! seven-level scale.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ekdb::{LsiIndex, QueryResult, RetrievalConfig};
use crate::error::{AprError, Result};
use crate::text;

const MIN_VALENCE: i32 = -5;
const MAX_VALENCE: i32 = 5;

/// Word and phrase valences in `[-5, 5]`.
///
/// Entries are stored as token sequences produced by the same splitter used
/// for scored text, so `"can't stand"` and `"can t stand"` are one entry.
#[derive(Debug, Clone, Default)]
pub struct SentimentLexicon {
    words: HashMap<String, i32>,
    phrases: HashMap<Vec<String>, i32>,
    max_phrase_len: usize,
}

impl SentimentLexicon {
    /// Parses `term<TAB>valence` lines. `#` comments and blank lines are skipped.
    pub fn parse(contents: &str) -> Result<Self> {
        let mut lexicon = SentimentLexicon::default();
        for (lineno, line) in contents.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let locator = || format!("line {}", lineno + 1);
            let (term, valence) = line
                .rsplit_once('\t')
                .ok_or_else(|| AprError::format(locator(), "expected term<TAB>valence"))?;
            let valence: i32 = valence
                .trim()
                .parse()
                .map_err(|e| AprError::format(locator(), format!("bad valence: {e}")))?;
            if !(MIN_VALENCE..=MAX_VALENCE).contains(&valence) {
                return Err(AprError::format(
                    locator(),
                    format!("valence {valence} outside [{MIN_VALENCE}, {MAX_VALENCE}]"),
                ));
            }
            let tokens: Vec<String> = text::words(term).collect();
            if tokens.is_empty() {
                return Err(AprError::format(locator(), "term has no word characters"));
            }
            lexicon.insert(tokens, valence);
        }
        Ok(lexicon)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let contents = std::fs::read_to_string(path).map_err(|e| AprError::io(path, e))?;
        Self::parse(&contents)
    }

    /// General-purpose valence list extended with architecture vocabulary.
    pub fn bundled() -> Self {
        let mut lexicon =
            Self::parse(crate::data::AFINN_LEXICON).expect("bundled valence list is well formed");
        lexicon.extend_with(
            Self::parse(crate::data::DOMAIN_LEXICON).expect("bundled domain list is well formed"),
        );
        lexicon
    }

    /// Adds every entry of `other`, overriding existing valences.
    pub fn extend_with(&mut self, other: SentimentLexicon) {
        for (w, v) in other.words {
            self.words.insert(w, v);
        }
        for (p, v) in other.phrases {
            self.max_phrase_len = self.max_phrase_len.max(p.len());
            self.phrases.insert(p, v);
        }
    }

    fn insert(&mut self, mut tokens: Vec<String>, valence: i32) {
        if tokens.len() == 1 {
            self.words.insert(tokens.pop().unwrap(), valence);
        } else {
            self.max_phrase_len = self.max_phrase_len.max(tokens.len());
            self.phrases.insert(tokens, valence);
        }
    }

    /// Valence of a single word or space-separated phrase, if listed.
    pub fn valence(&self, term: &str) -> Option<i32> {
        let tokens: Vec<String> = text::words(term).collect();
        match tokens.len() {
            0 => None,
            1 => self.words.get(&tokens[0]).copied(),
            _ => self.phrases.get(&tokens).copied(),
        }
    }

    pub fn len(&self) -> usize {
        self.words.len() + self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentimentLabel {
    StronglyPositive,
    Positive,
    SlightlyPositive,
    Neutral,
    SlightlyNegative,
    Negative,
    StronglyNegative,
}

impl SentimentLabel {
    pub const ALL: [SentimentLabel; 7] = [
        SentimentLabel::StronglyPositive,
        SentimentLabel::Positive,
        SentimentLabel::SlightlyPositive,
        SentimentLabel::Neutral,
        SentimentLabel::SlightlyNegative,
        SentimentLabel::Negative,
        SentimentLabel::StronglyNegative,
    ];

    pub fn is_positive(self) -> bool {
        self < SentimentLabel::Neutral
    }

    pub fn is_negative(self) -> bool {
        self > SentimentLabel::Neutral
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SentimentLabel::StronglyPositive => "strongly positive",
            SentimentLabel::Positive => "positive",
            SentimentLabel::SlightlyPositive => "slightly positive",
            SentimentLabel::Neutral => "neutral",
            SentimentLabel::SlightlyNegative => "slightly negative",
            SentimentLabel::Negative => "negative",
            SentimentLabel::StronglyNegative => "strongly negative",
        }
    }
}

impl fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Inclusive lower bounds of the positive buckets and upper bounds of the
/// negative ones. A zero total is always neutral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BucketThresholds {
    pub strongly_positive_min: i64,
    pub positive_min: i64,
    pub slightly_positive_min: i64,
    pub slightly_negative_max: i64,
    pub negative_max: i64,
    pub strongly_negative_max: i64,
}

impl Default for BucketThresholds {
    fn default() -> Self {
        Self {
            strongly_positive_min: 8,
            positive_min: 3,
            slightly_positive_min: 1,
            slightly_negative_max: -1,
            negative_max: -3,
            strongly_negative_max: -8,
        }
    }
}

impl BucketThresholds {
    pub fn validate(&self) -> Result<()> {
        let ordered = self.strongly_negative_max < self.negative_max
            && self.negative_max < self.slightly_negative_max
            && self.slightly_negative_max < 0
            && 0 < self.slightly_positive_min
            && self.slightly_positive_min < self.positive_min
            && self.positive_min < self.strongly_positive_min;
        if ordered {
            Ok(())
        } else {
            Err(AprError::Config(format!(
                "sentiment bucket thresholds must be strictly ordered around zero: {self:?}"
            )))
        }
    }
}

/// Query text used to look up experience with `pattern` in `software_type`.
pub fn synthesize_query(pattern_name: &str, software_type_label: &str) -> Result<String> {
    if pattern_name.trim().is_empty() || software_type_label.trim().is_empty() {
        return Err(AprError::InvalidInput(
            "sentiment query needs a pattern name and a software type".into(),
        ));
    }
    Ok(format!("{pattern_name} for {software_type_label}"))
}

/// Sum of lexicon valences in `text`. At each position the longest matching
/// phrase wins; otherwise the single word is looked up.
pub fn score_text(text: &str, lexicon: &SentimentLexicon) -> i64 {
    let tokens: Vec<String> = text::words(text).collect();
    let mut total = 0i64;
    let mut i = 0;
    'outer: while i < tokens.len() {
        let longest = lexicon.max_phrase_len.min(tokens.len() - i);
        for len in (2..=longest).rev() {
            if let Some(v) = lexicon.phrases.get(&tokens[i..i + len]) {
                total += i64::from(*v);
                i += len;
                continue 'outer;
            }
        }
        if let Some(v) = lexicon.words.get(&tokens[i]) {
            total += i64::from(*v);
        }
        i += 1;
    }
    total
}

/// `(total valence, number of posts)` over a result set.
pub fn aggregate_sentiment(results: &[QueryResult<'_>], lexicon: &SentimentLexicon) -> (i64, usize) {
    let total = results
        .iter()
        .map(|r| score_text(&r.post.body, lexicon))
        .sum();
    (total, results.len())
}

pub fn bucket(total: i64, evidence_count: usize, thresholds: &BucketThresholds) -> SentimentLabel {
    if evidence_count == 0 {
        return SentimentLabel::Neutral;
    }
    let t = thresholds;
    match total {
        x if x >= t.strongly_positive_min => SentimentLabel::StronglyPositive,
        x if x >= t.positive_min => SentimentLabel::Positive,
        x if x >= t.slightly_positive_min => SentimentLabel::SlightlyPositive,
        x if x <= t.strongly_negative_max => SentimentLabel::StronglyNegative,
        x if x <= t.negative_max => SentimentLabel::Negative,
        x if x <= t.slightly_negative_max => SentimentLabel::SlightlyNegative,
        _ => SentimentLabel::Neutral,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentimentOutcome {
    pub query: String,
    pub label: SentimentLabel,
    pub total: i64,
    pub evidence_count: usize,
}

/// Full lookup: synthesize, retrieve, score, bucket. Never fails: missing
/// evidence is reported as neutral with zero evidence.
pub fn sentiment_for(
    pattern_name: &str,
    software_type_label: &str,
    index: &LsiIndex,
    lexicon: &SentimentLexicon,
    retrieval: &RetrievalConfig,
    thresholds: &BucketThresholds,
) -> SentimentOutcome {
    let Ok(query) = synthesize_query(pattern_name, software_type_label) else {
        return SentimentOutcome {
            query: String::new(),
            label: SentimentLabel::Neutral,
            total: 0,
            evidence_count: 0,
        };
    };
    let results = index.query(&query, retrieval.max_results, retrieval.min_similarity);
    let (total, evidence_count) = aggregate_sentiment(&results, lexicon);
    SentimentOutcome {
        label: bucket(total, evidence_count, thresholds),
        query,
        total,
        evidence_count,
    }
}
