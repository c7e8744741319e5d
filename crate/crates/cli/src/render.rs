//! Human-readable output.

use std::fmt::Write as _;

use apr_core::recommender::{RequirementField, TERM_ORDER};
use apr_core::RecommendationSet;

pub fn recommendations_text(set: &RecommendationSet) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Recommendations for {}", set.software_type_label);
    if !set.removed_nfrs.is_empty() {
        let _ = writeln!(out, "NFRs dropped by priority: {}", set.removed_nfrs.join(", "));
    }
    let _ = writeln!(out, "{:<4}  {:<20} {:>10}  sentiment", "rank", "pattern", "confidence");
    for r in &set.recommendations {
        let _ = writeln!(
            out,
            "{:<4}  {:<20} {:>10.4}  {} ({:+}, {} posts)",
            r.rank, r.pattern_name, r.confidence, r.sentiment_label, r.sentiment_score, r.evidence_count
        );
    }
    out
}

fn short(field: RequirementField) -> &'static str {
    match field {
        RequirementField::DetailedDescription => "dd",
        RequirementField::ShortDescription => "sd",
        RequirementField::Nfr => "nfr",
        RequirementField::Objective => "obj",
        RequirementField::Actors => "act",
        RequirementField::Constraints => "cst",
        RequirementField::PreConditions => "precon",
        RequirementField::PostConditions => "postcon",
        RequirementField::Flow => "flow",
    }
}

/// Per-pattern term contributions, one row per pattern.
pub fn trace_text(set: &RecommendationSet) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<20}", "pattern");
    for field in TERM_ORDER {
        let _ = write!(out, " {:>8}", short(field));
    }
    let _ = writeln!(out, " {:>8}", "total");
    for p in &set.trace.patterns {
        let _ = write!(out, "{:<20}", p.pattern_name);
        for field in TERM_ORDER {
            let _ = write!(out, " {:>8.4}", p.term(field));
        }
        let _ = writeln!(out, " {:>8.4}", p.total);
    }
    out
}
