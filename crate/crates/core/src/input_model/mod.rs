//! The requirements template an architect fills in, and its validation.

mod nfr;
mod taxonomy;

use std::collections::BTreeSet;
use std::ops::Deref;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use nfr::{check_nfr_conflicts, item_priorities, resolve_nfr_conflicts, ConflictMatrix};
pub use taxonomy::{load_taxonomy, resolve_type, Taxonomy, TaxonomyNode, ROOT_PATH};

use crate::error::{AprError, FieldError, Result};
use crate::text::word_count;

pub const MAX_SHORT_DESCRIPTION_WORDS: usize = 25;
pub const MAX_DETAILED_DESCRIPTION_WORDS: usize = 500;
pub const MIN_USE_CASES: usize = 1;
pub const MAX_USE_CASES: usize = 20;
pub const DEFAULT_IMPORTANCE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UseCase {
    pub id: String,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub objective: String,
    #[serde(default)]
    pub actors: String,
    #[serde(default)]
    pub pre_conditions: String,
    #[serde(default)]
    pub post_conditions: String,
    #[serde(default)]
    pub constraints: String,
    #[serde(default)]
    pub normal_flow: String,
    /// In `[0, 1]`; absent means [`DEFAULT_IMPORTANCE`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub importance_score: Option<f64>,
}

impl UseCase {
    pub fn importance(&self) -> f64 {
        self.importance_score.unwrap_or(DEFAULT_IMPORTANCE)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NfrItem {
    /// Canonical label from the conflict matrix vocabulary.
    pub name: String,
    /// Smaller is more important.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priority: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free_text: Option<String>,
}

impl NfrItem {
    /// Text compared against pattern forces: the label plus any elaboration.
    pub fn text(&self) -> String {
        match &self.free_text {
            Some(t) if !t.trim().is_empty() => format!("{} {}", self.name, t),
            _ => self.name.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequirementsSpec {
    pub short_description: String,
    pub detailed_description: String,
    pub use_cases: Vec<UseCase>,
    #[serde(default)]
    pub nfrs: Vec<NfrItem>,
    /// Path into the software-type taxonomy, e.g. `data-dominant/web-application`.
    pub software_type: String,
}

impl RequirementsSpec {
    pub fn parse(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| {
            AprError::format(format!("line {} column {}", e.line(), e.column()), e)
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let json = std::fs::read_to_string(path).map_err(|e| AprError::io(path, e))?;
        Self::parse(&json).map_err(|e| match e {
            AprError::Format { locator, message } => AprError::Format {
                locator: format!("{}: {locator}", path.display()),
                message,
            },
            other => other,
        })
    }
}

/// A spec that passed [`validate_spec`]: every use case has a concrete
/// importance score and the software type is resolved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidatedSpec {
    spec: RequirementsSpec,
    software_type_label: String,
}

impl ValidatedSpec {
    pub fn spec(&self) -> &RequirementsSpec {
        &self.spec
    }

    pub fn software_type_label(&self) -> &str {
        &self.software_type_label
    }

    pub fn into_inner(self) -> RequirementsSpec {
        self.spec
    }
}

impl Deref for ValidatedSpec {
    type Target = RequirementsSpec;

    fn deref(&self) -> &RequirementsSpec {
        &self.spec
    }
}

/// Checks every template limit, collecting all violations.
pub fn validate_spec(
    spec: &RequirementsSpec,
    taxonomy: &Taxonomy,
) -> std::result::Result<ValidatedSpec, Vec<FieldError>> {
    let mut errors = Vec::new();

    let short = word_count(&spec.short_description);
    if short > MAX_SHORT_DESCRIPTION_WORDS {
        errors.push(FieldError::new(
            "short_description",
            format!("short_description exceeds {MAX_SHORT_DESCRIPTION_WORDS} words ({short})"),
        ));
    }
    let detailed = word_count(&spec.detailed_description);
    if detailed > MAX_DETAILED_DESCRIPTION_WORDS {
        errors.push(FieldError::new(
            "detailed_description",
            format!(
                "detailed_description exceeds {MAX_DETAILED_DESCRIPTION_WORDS} words ({detailed})"
            ),
        ));
    }

    let n = spec.use_cases.len();
    if !(MIN_USE_CASES..=MAX_USE_CASES).contains(&n) {
        errors.push(FieldError::new(
            "use_cases",
            format!("between {MIN_USE_CASES} and {MAX_USE_CASES} use cases required, got {n}"),
        ));
    }
    let mut ids = BTreeSet::new();
    for (i, uc) in spec.use_cases.iter().enumerate() {
        if uc.id.trim().is_empty() {
            errors.push(FieldError::new(format!("use_cases[{i}].id"), "id is empty"));
        } else if !ids.insert(uc.id.as_str()) {
            errors.push(FieldError::new(
                format!("use_cases[{i}].id"),
                format!("duplicate use case id {:?}", uc.id),
            ));
        }
        if uc.objective.trim().is_empty() {
            errors.push(FieldError::new(
                format!("use_cases[{i}].objective"),
                "objective is empty",
            ));
        }
        if let Some(score) = uc.importance_score {
            if !(0.0..=1.0).contains(&score) {
                errors.push(FieldError::new(
                    format!("use_cases[{i}].importance_score"),
                    format!("importance_score must lie between 0 and 1, got {score}"),
                ));
            }
        }
    }

    let label = match taxonomy.resolve(&spec.software_type) {
        Ok(node) => Some(node.label.clone()),
        Err(_) => {
            errors.push(FieldError::new(
                "software_type",
                format!("unknown taxonomy path {:?}", spec.software_type),
            ));
            None
        }
    };

    match label {
        Some(software_type_label) if errors.is_empty() => {
            let mut spec = spec.clone();
            for uc in &mut spec.use_cases {
                uc.importance_score.get_or_insert(DEFAULT_IMPORTANCE);
            }
            Ok(ValidatedSpec {
                spec,
                software_type_label,
            })
        }
        _ => Err(errors),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn use_case(id: &str) -> UseCase {
        UseCase {
            id: id.into(),
            name: "Publish page".into(),
            objective: "publish web pages without programming".into(),
            actors: "editor".into(),
            pre_conditions: "editor is logged in".into(),
            post_conditions: "page is visible".into(),
            constraints: "approval required".into(),
            normal_flow: "editor writes, reviewer approves".into(),
            importance_score: None,
        }
    }

    fn spec() -> RequirementsSpec {
        RequirementsSpec {
            short_description: "A content management system".into(),
            detailed_description: "Users build and maintain web pages.".into(),
            use_cases: vec![use_case("UC1")],
            nfrs: vec![],
            software_type: "data-dominant/web-application".into(),
        }
    }

    fn words(n: usize) -> String {
        vec!["word"; n].join(" ")
    }

    fn fields(errors: &[FieldError]) -> Vec<&str> {
        errors.iter().map(|e| e.field.as_str()).collect()
    }

    #[test]
    fn valid_spec_gets_defaults() {
        let v = validate_spec(&spec(), &Taxonomy::bundled()).unwrap();
        assert_eq!(v.use_cases[0].importance_score, Some(1.0));
        assert_eq!(v.software_type_label(), "Web Based Application");
    }

    #[test]
    fn validation_is_idempotent() {
        let tax = Taxonomy::bundled();
        let once = validate_spec(&spec(), &tax).unwrap();
        let twice = validate_spec(once.spec(), &tax).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn short_description_limit() {
        let mut s = spec();
        s.short_description = words(25);
        assert!(validate_spec(&s, &Taxonomy::bundled()).is_ok());
        s.short_description = words(26);
        let errors = validate_spec(&s, &Taxonomy::bundled()).unwrap_err();
        assert_eq!(fields(&errors), ["short_description"]);
        assert!(errors[0].message.starts_with("short_description exceeds 25 words"));
    }

    #[test]
    fn detailed_description_limit() {
        let mut s = spec();
        s.detailed_description = words(500);
        assert!(validate_spec(&s, &Taxonomy::bundled()).is_ok());
        s.detailed_description = words(501);
        let errors = validate_spec(&s, &Taxonomy::bundled()).unwrap_err();
        assert_eq!(fields(&errors), ["detailed_description"]);
    }

    #[test]
    fn use_case_count_limits() {
        let tax = Taxonomy::bundled();
        let mut s = spec();
        s.use_cases.clear();
        assert_eq!(fields(&validate_spec(&s, &tax).unwrap_err()), ["use_cases"]);
        s.use_cases = (0..21).map(|i| use_case(&format!("UC{i}"))).collect();
        assert_eq!(fields(&validate_spec(&s, &tax).unwrap_err()), ["use_cases"]);
        s.use_cases.pop();
        assert!(validate_spec(&s, &tax).is_ok());
    }

    #[test]
    fn importance_outside_unit_interval() {
        let tax = Taxonomy::bundled();
        for bad in [1.2, -0.1, f64::NAN] {
            let mut s = spec();
            s.use_cases[0].importance_score = Some(bad);
            let errors = validate_spec(&s, &tax).unwrap_err();
            assert_eq!(fields(&errors), ["use_cases[0].importance_score"]);
        }
        let mut s = spec();
        s.use_cases[0].importance_score = Some(0.0);
        assert!(validate_spec(&s, &tax).is_ok());
    }

    #[test]
    fn errors_are_collected_not_fail_fast() {
        let mut s = spec();
        s.short_description = words(30);
        s.software_type = "no/such/type".into();
        s.use_cases.push(use_case("UC1"));
        s.use_cases[0].objective.clear();
        let errors = validate_spec(&s, &Taxonomy::bundled()).unwrap_err();
        assert_eq!(
            fields(&errors),
            [
                "short_description",
                "use_cases[0].objective",
                "use_cases[1].id",
                "software_type"
            ]
        );
    }

    #[test]
    fn nfr_text_includes_free_text() {
        let n = NfrItem {
            name: "performance".into(),
            priority: Some(1),
            free_text: Some("pages render fast".into()),
        };
        assert_eq!(n.text(), "performance pages render fast");
    }
}
