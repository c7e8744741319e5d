//! Architecture pattern recommendation.
//!
//! Requirements written against a fixed template are scored against a
//! catalogue of architecture patterns by textual entailment. The best three
//! patterns are then annotated with the community sentiment found in a
//! latent semantic index of forum posts.

pub mod data;
pub mod ekdb;
pub mod entailment;
pub mod error;
pub mod input_model;
pub mod pipeline;
pub mod recommender;
pub mod sentiment;
pub mod spdb;
pub mod text;

pub use entailment::{text_entail, Approach, EntailmentConfig, EntailmentScore, StopWords};
pub use error::{AprError, FieldError, NfrPair, Result};
pub use input_model::{
    check_nfr_conflicts, resolve_nfr_conflicts, validate_spec, ConflictMatrix, NfrItem,
    RequirementsSpec, Taxonomy, UseCase, ValidatedSpec,
};
pub use pipeline::{
    evaluate, recommend, EvalCase, EvalReport, KnowledgeBase, PipelineConfig, Recommendation,
    RecommendationSet,
};
pub use recommender::{aggregate_fields, rank_top3, recog_entail, score_patterns, ScoringConfig};
pub use sentiment::{sentiment_for, SentimentLabel, SentimentLexicon};
pub use spdb::{PatternCatalog, PatternRecord};
