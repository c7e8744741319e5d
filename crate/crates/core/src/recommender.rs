//! Requirement-to-pattern scoring.
//!
//! Each requirement field is matched against the pattern feature it maps to
//! (detailed description against basic definition, objectives against
//! forces, and so on). Use-case fields are first pooled across use cases
//! together with each use case's importance score; a pooled set contributes
//! the importance-weighted sum of its entailment scores. A pattern's
//! confidence is the plain sum of all term contributions.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::entailment::{text_entail, EntailmentConfig};
use crate::error::{AprError, Result};
use crate::input_model::{RequirementsSpec, UseCase};
use crate::spdb::{PatternCatalog, PatternFeature, PatternRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequirementField {
    DetailedDescription,
    ShortDescription,
    Objective,
    PostConditions,
    Constraints,
    PreConditions,
    Actors,
    Flow,
    Nfr,
}

impl fmt::Display for RequirementField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RequirementField::DetailedDescription => "detailed_description",
            RequirementField::ShortDescription => "short_description",
            RequirementField::Objective => "objective",
            RequirementField::PostConditions => "post_conditions",
            RequirementField::Constraints => "constraints",
            RequirementField::PreConditions => "pre_conditions",
            RequirementField::Actors => "actors",
            RequirementField::Flow => "flow",
            RequirementField::Nfr => "nfr",
        })
    }
}

/// Which pattern feature each requirement field is scored against.
pub const FIELD_FEATURE_MAPPING: [(RequirementField, PatternFeature); 9] = [
    (RequirementField::DetailedDescription, PatternFeature::BasicDefinition),
    (RequirementField::ShortDescription, PatternFeature::KnownApplications),
    (RequirementField::Objective, PatternFeature::Forces),
    (RequirementField::PostConditions, PatternFeature::Consequences),
    (RequirementField::Constraints, PatternFeature::Forces),
    (RequirementField::PreConditions, PatternFeature::Context),
    (RequirementField::Actors, PatternFeature::Solution),
    (RequirementField::Flow, PatternFeature::Solution),
    (RequirementField::Nfr, PatternFeature::Forces),
];

pub fn mapped_feature(field: RequirementField) -> PatternFeature {
    FIELD_FEATURE_MAPPING
        .iter()
        .find(|(f, _)| *f == field)
        .map(|&(_, feature)| feature)
        .expect("mapping is total")
}

/// Order in which terms are accumulated into a confidence value. Flow comes
/// last and only counts when enabled.
pub const TERM_ORDER: [RequirementField; 9] = [
    RequirementField::DetailedDescription,
    RequirementField::ShortDescription,
    RequirementField::Nfr,
    RequirementField::Objective,
    RequirementField::Actors,
    RequirementField::Constraints,
    RequirementField::PreConditions,
    RequirementField::PostConditions,
    RequirementField::Flow,
];

/// A use-case field text paired with its use case's importance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedText {
    pub text: String,
    pub importance: f64,
    pub use_case_id: String,
}

/// Use-case fields pooled by kind, ordered by use-case id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AggregatedFields {
    pub all_obj: Vec<WeightedText>,
    pub all_act: Vec<WeightedText>,
    pub all_cst: Vec<WeightedText>,
    pub all_precon: Vec<WeightedText>,
    pub all_postcon: Vec<WeightedText>,
    /// Normal-flow texts; only scored when the flow term is enabled.
    pub all_flo: Vec<WeightedText>,
}

impl AggregatedFields {
    pub fn set(&self, field: RequirementField) -> Option<&[WeightedText]> {
        Some(match field {
            RequirementField::Objective => &self.all_obj,
            RequirementField::Actors => &self.all_act,
            RequirementField::Constraints => &self.all_cst,
            RequirementField::PreConditions => &self.all_precon,
            RequirementField::PostConditions => &self.all_postcon,
            RequirementField::Flow => &self.all_flo,
            _ => return None,
        })
    }
}

/// Pools objective, actors, constraints, pre- and post-conditions (and
/// flow) of every use case. Empty texts are skipped and exact
/// `(text, importance)` duplicates are kept once.
pub fn aggregate_fields(use_cases: &[UseCase]) -> AggregatedFields {
    let mut sorted: Vec<&UseCase> = use_cases.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));

    fn pool<'a>(
        cases: &[&'a UseCase],
        field: impl Fn(&'a UseCase) -> &'a str,
    ) -> Vec<WeightedText> {
        let mut seen = HashSet::new();
        cases
            .iter()
            .filter_map(|uc| {
                let text = field(uc);
                let importance = uc.importance();
                (!text.trim().is_empty() && seen.insert((text, importance.to_bits()))).then(|| {
                    WeightedText {
                        text: text.to_string(),
                        importance,
                        use_case_id: uc.id.clone(),
                    }
                })
            })
            .collect()
    }

    AggregatedFields {
        all_obj: pool(&sorted, |uc| &uc.objective),
        all_act: pool(&sorted, |uc| &uc.actors),
        all_cst: pool(&sorted, |uc| &uc.constraints),
        all_precon: pool(&sorted, |uc| &uc.pre_conditions),
        all_postcon: pool(&sorted, |uc| &uc.post_conditions),
        all_flo: pool(&sorted, |uc| &uc.normal_flow),
    }
}

/// Importance-weighted sum of entailment scores of each pooled text against
/// one pattern feature.
pub fn recog_entail(tuples: &[WeightedText], pattern_attr: &str, config: &EntailmentConfig) -> f64 {
    tuples.iter().fold(0.0, |acc, t| {
        acc + text_entail(&t.text, pattern_attr, config).value() * t.importance
    })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoringConfig {
    pub entailment: EntailmentConfig,
    /// Also score normal flow against the solution.
    pub include_flow_term: bool,
    /// Divide each pooled term by the importance mass of its set.
    pub normalize_by_importance_mass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermContribution {
    pub field: RequirementField,
    pub feature: PatternFeature,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternTrace {
    pub pattern_name: String,
    /// All nine mapped terms in accumulation order.
    pub terms: Vec<TermContribution>,
    pub total: f64,
}

impl PatternTrace {
    pub fn term(&self, field: RequirementField) -> f64 {
        self.terms
            .iter()
            .find(|t| t.field == field)
            .map_or(0.0, |t| t.value)
    }
}

/// Per-pattern term breakdown, ordered by pattern name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoringTrace {
    pub patterns: Vec<PatternTrace>,
}

impl ScoringTrace {
    pub fn pattern(&self, name: &str) -> Option<&PatternTrace> {
        self.patterns.iter().find(|p| p.pattern_name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }
}

/// Confidence per pattern name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConfidenceTable(pub BTreeMap<String, f64>);

impl ConfidenceTable {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scored {
    pub table: ConfidenceTable,
    pub trace: ScoringTrace,
}

fn score_record(
    spec: &RequirementsSpec,
    agg: &AggregatedFields,
    record: &PatternRecord,
    config: &ScoringConfig,
) -> PatternTrace {
    let entail = |text: &str, field: RequirementField| {
        text_entail(text, record.feature(mapped_feature(field)), &config.entailment).value()
    };
    let pooled = |field: RequirementField| {
        let set = agg.set(field).expect("pooled field");
        let attr = record.feature(mapped_feature(field));
        let raw = recog_entail(set, attr, &config.entailment);
        if config.normalize_by_importance_mass {
            let mass: f64 = set.iter().map(|t| t.importance).sum();
            if mass > 0.0 {
                raw / mass
            } else {
                0.0
            }
        } else {
            raw
        }
    };

    let mut total = 0.0;
    let terms = TERM_ORDER
        .iter()
        .map(|&field| {
            let value = match field {
                RequirementField::DetailedDescription => {
                    entail(&spec.detailed_description, field)
                }
                RequirementField::ShortDescription => entail(&spec.short_description, field),
                RequirementField::Nfr => spec
                    .nfrs
                    .iter()
                    .fold(0.0, |acc, n| acc + entail(&n.text(), field)),
                RequirementField::Flow if !config.include_flow_term => 0.0,
                _ => pooled(field),
            };
            total += value;
            TermContribution {
                field,
                feature: mapped_feature(field),
                value,
            }
        })
        .collect();

    PatternTrace {
        pattern_name: record.pattern_name.clone(),
        terms,
        total,
    }
}

/// Confidence of every catalogue pattern for the given requirements.
///
/// `agg` must be built from `spec.use_cases` and the spec should already be
/// validated.
pub fn score_patterns(
    spec: &RequirementsSpec,
    agg: &AggregatedFields,
    catalog: &PatternCatalog,
    config: &ScoringConfig,
) -> Result<Scored> {
    if catalog.is_empty() {
        return Err(AprError::Config("pattern catalog is empty".into()));
    }
    let patterns: Vec<PatternTrace> = catalog
        .iter()
        .map(|record| score_record(spec, agg, record, config))
        .collect();
    let table = ConfidenceTable(
        patterns
            .iter()
            .map(|p| (p.pattern_name.clone(), p.total))
            .collect(),
    );
    Ok(Scored {
        table,
        trace: ScoringTrace { patterns },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedPattern {
    pub pattern_name: String,
    pub confidence: f64,
}

/// Up to `n` best patterns, confidence descending, ties by name.
pub fn rank_top(table: &ConfidenceTable, n: usize) -> Vec<RankedPattern> {
    let mut ranked: Vec<RankedPattern> = table
        .iter()
        .map(|(name, confidence)| RankedPattern {
            pattern_name: name.to_string(),
            confidence,
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.confidence
            .total_cmp(&a.confidence)
            .then_with(|| a.pattern_name.cmp(&b.pattern_name))
    });
    ranked.truncate(n);
    ranked
}

pub fn rank_top3(table: &ConfidenceTable) -> Vec<RankedPattern> {
    rank_top(table, 3)
}
