//! End-to-end recommendation and the ground-truth evaluation harness.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ekdb::{default_tag_filter, LsiIndex, RetrievalConfig, DEFAULT_RANK_K};
use crate::entailment::{Approach, EntailmentConfig, StopWords, DEFAULT_ALPHA};
use crate::error::{AprError, NfrPair, Result};
use crate::input_model::{
    check_nfr_conflicts, item_priorities, resolve_nfr_conflicts, validate_spec, ConflictMatrix,
    RequirementsSpec, Taxonomy,
};
use crate::recommender::{
    aggregate_fields, rank_top, score_patterns, ConfidenceTable, ScoringConfig, ScoringTrace,
};
use crate::sentiment::{sentiment_for, BucketThresholds, SentimentLabel, SentimentLexicon};
use crate::spdb::PatternCatalog;

pub const MAX_RECOMMENDATIONS: usize = 3;

/// Every tunable of the pipeline. Serialized into each result so a run can
/// be repeated exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub alpha: f64,
    pub approach: Approach,
    pub include_flow_term: bool,
    pub normalize_by_importance_mass: bool,
    pub top: usize,
    pub rank_k: usize,
    pub tag_filter: BTreeSet<String>,
    pub retrieval: RetrievalConfig,
    pub buckets: BucketThresholds,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            approach: Approach::default(),
            include_flow_term: false,
            normalize_by_importance_mass: false,
            top: MAX_RECOMMENDATIONS,
            rank_k: DEFAULT_RANK_K,
            tag_filter: default_tag_filter(),
            retrieval: RetrievalConfig::default(),
            buckets: BucketThresholds::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| AprError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| AprError::io(path, e))?;
        Self::from_toml(&s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(AprError::Config(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        if !(1..=MAX_RECOMMENDATIONS).contains(&self.top) {
            return Err(AprError::Config(format!(
                "top must be between 1 and {MAX_RECOMMENDATIONS}, got {}",
                self.top
            )));
        }
        if self.rank_k < 1 {
            return Err(AprError::Config("rank_k must be at least 1".into()));
        }
        if self.retrieval.max_results < 1 {
            return Err(AprError::Config("retrieval.max_results must be at least 1".into()));
        }
        if self.tag_filter.is_empty() {
            return Err(AprError::Config("tag_filter must not be empty".into()));
        }
        self.buckets.validate()
    }

    pub fn scoring_config(&self, stop_words: StopWords) -> Result<ScoringConfig> {
        Ok(ScoringConfig {
            entailment: EntailmentConfig::new(self.alpha, self.approach, stop_words)?,
            include_flow_term: self.include_flow_term,
            normalize_by_importance_mass: self.normalize_by_importance_mass,
        })
    }
}

/// Everything a recommendation run reads. Immutable once assembled.
#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    pub catalog: PatternCatalog,
    pub index: Option<LsiIndex>,
    pub lexicon: SentimentLexicon,
    pub taxonomy: Taxonomy,
    pub conflicts: ConflictMatrix,
    pub stop_words: StopWords,
}

impl KnowledgeBase {
    /// Bundled catalogue, lexicon, taxonomy, conflict matrix and stop words.
    pub fn bundled(index: Option<LsiIndex>) -> Self {
        Self {
            catalog: PatternCatalog::bundled(),
            index,
            lexicon: SentimentLexicon::bundled(),
            taxonomy: Taxonomy::bundled(),
            conflicts: ConflictMatrix::bundled(),
            stop_words: StopWords::bundled(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub rank: usize,
    pub pattern_name: String,
    pub confidence: f64,
    pub sentiment_label: SentimentLabel,
    pub sentiment_score: i64,
    pub evidence_count: usize,
    pub sentiment_query: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationSet {
    pub software_type: String,
    pub software_type_label: String,
    pub recommendations: Vec<Recommendation>,
    pub confidences: ConfidenceTable,
    pub nfr_conflicts: Vec<NfrPair>,
    pub removed_nfrs: Vec<String>,
    pub trace: ScoringTrace,
    pub config: PipelineConfig,
}

impl RecommendationSet {
    /// Pretty JSON with a trailing newline; stable for identical inputs.
    pub fn to_machine_format(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("recommendation set serializes");
        s.push('\n');
        s
    }
}

/// Runs validation, conflict resolution, scoring, ranking and sentiment.
///
/// `priorities` override any priority carried on the NFR items. Unresolved
/// conflicts surface as [`AprError::ResolutionRequired`].
pub fn recommend(
    spec: &RequirementsSpec,
    kb: &KnowledgeBase,
    config: &PipelineConfig,
    priorities: &BTreeMap<String, i64>,
) -> Result<RecommendationSet> {
    config.validate()?;
    let index = kb
        .index
        .as_ref()
        .ok_or_else(|| AprError::Config("no experiential knowledge index loaded".into()))?;
    if kb.catalog.is_empty() {
        return Err(AprError::Config("pattern catalog is empty".into()));
    }
    let validated = validate_spec(spec, &kb.taxonomy).map_err(AprError::Validation)?;

    let conflicts = check_nfr_conflicts(&validated.nfrs, &kb.conflicts)?;
    let mut all_priorities = item_priorities(&validated.nfrs);
    all_priorities.extend(priorities.iter().map(|(k, v)| (k.clone(), *v)));
    let kept = resolve_nfr_conflicts(&validated.nfrs, &conflicts, &all_priorities)?;
    let removed_nfrs: Vec<String> = validated
        .nfrs
        .iter()
        .filter(|n| !kept.contains(n))
        .map(|n| n.name.clone())
        .collect();

    let label = validated.software_type_label().to_string();
    let mut effective = validated.into_inner();
    effective.nfrs = kept;

    let scoring = config.scoring_config(kb.stop_words.clone())?;
    let agg = aggregate_fields(&effective.use_cases);
    let scored = score_patterns(&effective, &agg, &kb.catalog, &scoring)?;
    let recommendations = rank_top(&scored.table, config.top)
        .into_iter()
        .enumerate()
        .map(|(i, ranked)| {
            let s = sentiment_for(
                &ranked.pattern_name,
                &label,
                index,
                &kb.lexicon,
                &config.retrieval,
                &config.buckets,
            );
            Recommendation {
                rank: i + 1,
                pattern_name: ranked.pattern_name,
                confidence: ranked.confidence,
                sentiment_label: s.label,
                sentiment_score: s.total,
                evidence_count: s.evidence_count,
                sentiment_query: s.query,
            }
        })
        .collect();

    Ok(RecommendationSet {
        software_type: effective.software_type,
        software_type_label: label,
        recommendations,
        confidences: scored.table,
        nfr_conflicts: conflicts,
        removed_nfrs,
        trace: scored.trace,
        config: config.clone(),
    })
}

/// A requirements spec whose correct architecture is known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalCase {
    pub name: String,
    pub expected_pattern: String,
    #[serde(default)]
    pub reference_application: String,
    pub spec: RequirementsSpec,
}

impl EvalCase {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let json = std::fs::read_to_string(path).map_err(|e| AprError::io(path, e))?;
        serde_json::from_str(&json).map_err(|e| {
            AprError::format(
                format!("{}: line {} column {}", path.display(), e.line(), e.column()),
                e,
            )
        })
    }

    /// Every `*.json` file in `dir`, in file-name order.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Vec<Self>> {
        let dir = dir.as_ref();
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| AprError::io(dir, e))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "json"))
            .collect();
        paths.sort();
        paths.iter().map(Self::load).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseOutcome {
    pub name: String,
    pub expected_pattern: String,
    pub software_type: String,
    /// 1-based rank of the expected pattern; `None` when it was not returned.
    pub hit_rank: Option<usize>,
    /// Sentiment of the pattern at each returned rank.
    pub sentiments: Vec<SentimentLabel>,
    pub ranking: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankRow {
    pub rank: usize,
    /// Cases whose expected pattern appeared at this rank.
    pub expected_output: usize,
    pub positive_sentiment: usize,
    pub neutral_sentiment: usize,
    pub negative_sentiment: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub total_cases: usize,
    pub valid_cases: usize,
    pub invalid_cases: usize,
    pub rows: [RankRow; 3],
    pub misses: usize,
    pub top1_percent: f64,
    pub top3_percent: f64,
    pub cases: Vec<CaseOutcome>,
}

impl EvalReport {
    /// Tallies per-case outcomes. Cases carrying an error are excluded.
    pub fn from_outcomes(cases: Vec<CaseOutcome>) -> Self {
        let mut rows = [1, 2, 3].map(|rank| RankRow {
            rank,
            ..RankRow::default()
        });
        let mut misses = 0;
        let mut valid = 0;
        for case in cases.iter().filter(|c| c.error.is_none()) {
            valid += 1;
            match case.hit_rank {
                Some(r @ 1..=3) => rows[r - 1].expected_output += 1,
                _ => misses += 1,
            }
            for (row, label) in rows.iter_mut().zip(&case.sentiments) {
                if label.is_positive() {
                    row.positive_sentiment += 1;
                } else if label.is_negative() {
                    row.negative_sentiment += 1;
                } else {
                    row.neutral_sentiment += 1;
                }
            }
        }
        let pct = |n: usize| {
            if valid == 0 {
                0.0
            } else {
                100.0 * n as f64 / valid as f64
            }
        };
        let top3: usize = rows.iter().map(|r| r.expected_output).sum();
        EvalReport {
            total_cases: cases.len(),
            valid_cases: valid,
            invalid_cases: cases.len() - valid,
            top1_percent: pct(rows[0].expected_output),
            top3_percent: pct(top3),
            rows,
            misses,
            cases,
        }
    }

    /// Plain-text report: one row per rank with expected-output and
    /// sentiment-polarity counts.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<10} {:>15} {:>18} {:>18}",
            "", "Expected Output", "Positive Sentiment", "Negative Sentiment"
        );
        for (row, name) in self.rows.iter().zip(["1st rank", "2nd rank", "3rd rank"]) {
            let _ = writeln!(
                out,
                "{:<10} {:>15} {:>18} {:>18}",
                name, row.expected_output, row.positive_sentiment, row.negative_sentiment
            );
        }
        let _ = writeln!(out, "{:<10} {:>15}", "miss", self.misses);
        let _ = writeln!(
            out,
            "cases: {} valid, {} invalid; top-1 {:.1}%, top-3 {:.1}%",
            self.valid_cases, self.invalid_cases, self.top1_percent, self.top3_percent
        );
        for case in self.cases.iter().filter(|c| c.error.is_some()) {
            let _ = writeln!(
                out,
                "invalid case {}: {}",
                case.name,
                case.error.as_deref().unwrap_or_default()
            );
        }
        out
    }
}

/// Runs every case and tallies where the expected pattern landed.
pub fn evaluate(
    cases: &[EvalCase],
    kb: &KnowledgeBase,
    config: &PipelineConfig,
) -> Result<EvalReport> {
    if cases.is_empty() {
        return Err(AprError::InvalidInput("evaluation needs at least one case".into()));
    }
    config.validate()?;
    let outcomes = cases
        .iter()
        .map(|case| {
            let mut outcome = CaseOutcome {
                name: case.name.clone(),
                expected_pattern: case.expected_pattern.clone(),
                software_type: case.spec.software_type.clone(),
                hit_rank: None,
                sentiments: Vec::new(),
                ranking: Vec::new(),
                error: None,
            };
            match recommend(&case.spec, kb, config, &BTreeMap::new()) {
                Ok(set) => {
                    outcome.hit_rank = set
                        .recommendations
                        .iter()
                        .find(|r| r.pattern_name == case.expected_pattern)
                        .map(|r| r.rank);
                    outcome.sentiments =
                        set.recommendations.iter().map(|r| r.sentiment_label).collect();
                    outcome.ranking = set
                        .recommendations
                        .into_iter()
                        .map(|r| r.pattern_name)
                        .collect();
                }
                Err(AprError::Config(msg)) => return Err(AprError::Config(msg)),
                Err(e) => {
                    log::warn!("evaluation case {} is invalid: {e}", case.name);
                    outcome.error = Some(e.to_string());
                }
            }
            Ok(outcome)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::from_outcomes(outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(name: &str, hit: Option<usize>, sentiments: &[SentimentLabel]) -> CaseOutcome {
        CaseOutcome {
            name: name.into(),
            expected_pattern: "MVC".into(),
            software_type: "x".into(),
            hit_rank: hit,
            sentiments: sentiments.to_vec(),
            ranking: vec![],
            error: None,
        }
    }

    #[test]
    fn tallies_ranks_and_percentages() {
        use SentimentLabel::*;
        let report = EvalReport::from_outcomes(vec![
            outcome("a", Some(1), &[StronglyPositive, Neutral, Negative]),
            outcome("b", Some(1), &[Positive, SlightlyPositive, Neutral]),
            outcome("c", Some(2), &[SlightlyNegative, Positive, Neutral]),
            outcome("d", None, &[Neutral, Neutral, Neutral]),
        ]);
        let hits: Vec<usize> = report.rows.iter().map(|r| r.expected_output).collect();
        assert_eq!(hits, [2, 1, 0]);
        assert_eq!(report.misses, 1);
        assert_eq!(report.top1_percent, 50.0);
        assert_eq!(report.top3_percent, 75.0);
        assert_eq!(report.rows[0].positive_sentiment, 2);
        assert_eq!(report.rows[0].negative_sentiment, 1);
        assert_eq!(report.rows[1].positive_sentiment, 2);
        assert_eq!(report.rows[2].negative_sentiment, 1);
        for row in &report.rows {
            assert_eq!(
                row.positive_sentiment + row.neutral_sentiment + row.negative_sentiment,
                4
            );
        }
    }

    #[test]
    fn single_hit_is_full_marks() {
        let report = EvalReport::from_outcomes(vec![outcome("a", Some(1), &[])]);
        assert_eq!(report.top1_percent, 100.0);
    }

    #[test]
    fn invalid_cases_are_excluded() {
        let mut bad = outcome("bad", None, &[]);
        bad.error = Some("validation failed".into());
        let report = EvalReport::from_outcomes(vec![outcome("a", Some(3), &[]), bad]);
        assert_eq!(report.valid_cases, 1);
        assert_eq!(report.invalid_cases, 1);
        assert_eq!(report.misses, 0);
        assert_eq!(report.rows[2].expected_output, 1);
        assert!(report.to_table().contains("invalid case bad"));
    }

    #[test]
    fn table_has_three_rank_rows() {
        let report = EvalReport::from_outcomes(vec![outcome("a", Some(1), &[])]);
        let table = report.to_table();
        assert!(table.contains("Expected Output"));
        assert!(table.contains("Positive Sentiment"));
        assert!(table.contains("Negative Sentiment"));
        for r in ["1st rank", "2nd rank", "3rd rank"] {
            assert!(table.contains(r));
        }
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = PipelineConfig {
            alpha: 0.6,
            include_flow_term: true,
            ..Default::default()
        };
        assert_eq!(PipelineConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        assert_eq!(PipelineConfig::from_toml("").unwrap(), PipelineConfig::default());
    }

    #[test]
    fn config_rejects_bad_values() {
        assert!(PipelineConfig::from_toml("alpha = 2.0").is_err());
        assert!(PipelineConfig::from_toml("top = 4").is_err());
        assert!(PipelineConfig::from_toml("bogus = 1").is_err());
        assert!(PipelineConfig::from_toml("[buckets]\npositive_min = 20").is_err());
    }

    #[test]
    fn missing_index_is_a_config_error() {
        let kb = KnowledgeBase::bundled(None);
        let spec = RequirementsSpec {
            short_description: "x".into(),
            detailed_description: "y".into(),
            use_cases: vec![],
            nfrs: vec![],
            software_type: "/".into(),
        };
        let err = recommend(&spec, &kb, &PipelineConfig::default(), &BTreeMap::new()).unwrap_err();
        assert!(matches!(err, AprError::Config(_)));
    }
}
