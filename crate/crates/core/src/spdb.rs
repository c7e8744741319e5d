//! Standard pattern database: curated architectural pattern records.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{AprError, FieldError, Result};

/// One architectural pattern described by its catalogue features.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternRecord {
    #[serde(default)]
    pub pattern_name: String,
    #[serde(default)]
    pub basic_definition: String,
    #[serde(default)]
    pub context: String,
    #[serde(default)]
    pub forces: String,
    #[serde(default)]
    pub solution: String,
    #[serde(default)]
    pub consequences: String,
    #[serde(default)]
    pub variants: String,
    #[serde(default)]
    pub known_applications: String,
    #[serde(default)]
    pub source: String,
}

/// Features a requirement field can be matched against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternFeature {
    BasicDefinition,
    Context,
    Forces,
    Solution,
    Consequences,
    Variants,
    KnownApplications,
}

impl PatternFeature {
    pub fn as_str(self) -> &'static str {
        match self {
            PatternFeature::BasicDefinition => "basic_definition",
            PatternFeature::Context => "context",
            PatternFeature::Forces => "forces",
            PatternFeature::Solution => "solution",
            PatternFeature::Consequences => "consequences",
            PatternFeature::Variants => "variants",
            PatternFeature::KnownApplications => "known_applications",
        }
    }
}

impl fmt::Display for PatternFeature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl PatternRecord {
    pub fn feature(&self, feature: PatternFeature) -> &str {
        match feature {
            PatternFeature::BasicDefinition => &self.basic_definition,
            PatternFeature::Context => &self.context,
            PatternFeature::Forces => &self.forces,
            PatternFeature::Solution => &self.solution,
            PatternFeature::Consequences => &self.consequences,
            PatternFeature::Variants => &self.variants,
            PatternFeature::KnownApplications => &self.known_applications,
        }
    }

    fn required(&self) -> [(&'static str, &str); 7] {
        [
            ("pattern_name", &self.pattern_name),
            ("basic_definition", &self.basic_definition),
            ("context", &self.context),
            ("forces", &self.forces),
            ("solution", &self.solution),
            ("consequences", &self.consequences),
            ("known_applications", &self.known_applications),
        ]
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CatalogDocument {
    Versioned {
        #[serde(default)]
        version: String,
        records: Vec<PatternRecord>,
    },
    Bare(Vec<PatternRecord>),
}

#[derive(Serialize)]
struct CatalogOut<'a> {
    version: &'a str,
    records: &'a [PatternRecord],
}

/// Validated, name-sorted pattern records. Immutable once loaded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternCatalog {
    version: String,
    records: Vec<PatternRecord>,
}

impl PatternCatalog {
    /// Validates records and sorts them by name.
    pub fn new(version: impl Into<String>, mut records: Vec<PatternRecord>) -> Result<Self> {
        let mut errors = Vec::new();
        let mut names = BTreeSet::new();
        for (i, record) in records.iter().enumerate() {
            let label = if record.pattern_name.trim().is_empty() {
                format!("records[{i}]")
            } else {
                format!("records[{i}] ({})", record.pattern_name)
            };
            for (field, value) in record.required() {
                if value.trim().is_empty() {
                    errors.push(FieldError::new(
                        format!("{label}.{field}"),
                        "missing required field",
                    ));
                }
            }
            if !record.pattern_name.trim().is_empty() && !names.insert(record.pattern_name.as_str())
            {
                errors.push(FieldError::new(
                    format!("{label}.pattern_name"),
                    format!("duplicate pattern name {:?}", record.pattern_name),
                ));
            }
        }
        if !errors.is_empty() {
            return Err(AprError::Validation(errors));
        }
        records.sort_by(|a, b| a.pattern_name.cmp(&b.pattern_name));
        Ok(Self {
            version: version.into(),
            records,
        })
    }

    pub fn empty() -> Self {
        Self {
            version: String::new(),
            records: Vec::new(),
        }
    }

    /// Parses a JSON catalogue: either `{"version": .., "records": [..]}` or a
    /// bare array of records.
    pub fn parse(json: &str) -> Result<Self> {
        let doc: CatalogDocument = serde_json::from_str(json).map_err(|e| {
            AprError::format(format!("line {} column {}", e.line(), e.column()), e)
        })?;
        match doc {
            CatalogDocument::Versioned { version, records } => Self::new(version, records),
            CatalogDocument::Bare(records) => Self::new("", records),
        }
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

    /// Catalogue shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(crate::data::PATTERN_CATALOG).expect("bundled catalog is valid")
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&CatalogOut {
            version: &self.version,
            records: &self.records,
        })
        .expect("catalog serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| AprError::io(path, e))
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn records(&self) -> &[PatternRecord] {
        &self.records
    }

    pub fn iter(&self) -> std::slice::Iter<'_, PatternRecord> {
        self.records.iter()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Exact, case-sensitive lookup by pattern name.
    pub fn get_pattern(&self, name: &str) -> Option<&PatternRecord> {
        self.records
            .binary_search_by(|r| r.pattern_name.as_str().cmp(name))
            .ok()
            .map(|i| &self.records[i])
    }
}

pub fn load_catalog(path: impl AsRef<Path>) -> Result<PatternCatalog> {
    PatternCatalog::load(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(name: &str) -> PatternRecord {
        PatternRecord {
            pattern_name: name.into(),
            basic_definition: "d".into(),
            context: "c".into(),
            forces: "f".into(),
            solution: "s".into(),
            consequences: "q".into(),
            variants: String::new(),
            known_applications: "k".into(),
            source: String::new(),
        }
    }

    #[test]
    fn bundled_catalog_has_the_eight_patterns() {
        let cat = PatternCatalog::bundled();
        let names: Vec<&str> = cat.iter().map(|r| r.pattern_name.as_str()).collect();
        assert_eq!(
            names,
            [
                "Blackboard",
                "Broker",
                "Layers",
                "MVC",
                "Microkernel",
                "PAC",
                "Pipes-and-Filters",
                "Reflection"
            ]
        );
        for r in cat.iter() {
            for (field, value) in r.required() {
                assert!(!value.trim().is_empty(), "{} {field}", r.pattern_name);
            }
        }
    }

    #[test]
    fn lookup_is_exact() {
        let cat = PatternCatalog::bundled();
        assert_eq!(cat.get_pattern("MVC").unwrap().pattern_name, "MVC");
        assert!(cat.get_pattern("mvc").is_none());
        assert!(PatternCatalog::empty().get_pattern("MVC").is_none());
    }

    #[test]
    fn empty_collection_is_valid() {
        let cat = PatternCatalog::parse("[]").unwrap();
        assert!(cat.is_empty());
        let cat = PatternCatalog::parse(r#"{"version": "v0", "records": []}"#).unwrap();
        assert_eq!(cat.version(), "v0");
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let err = PatternCatalog::new("t", vec![record("MVC"), record("MVC")]).unwrap_err();
        let AprError::Validation(errors) = err else {
            panic!("expected validation error")
        };
        assert_eq!(errors.len(), 1);
        assert!(errors[0].message.contains("MVC"));
    }

    #[test]
    fn missing_field_names_record_and_field() {
        let json = r#"[{"pattern_name": "Layers", "basic_definition": "x", "context": "x",
            "forces": "x", "solution": "x", "consequences": "x"}]"#;
        let AprError::Validation(errors) = PatternCatalog::parse(json).unwrap_err() else {
            panic!("expected validation error")
        };
        assert_eq!(errors[0].field, "records[0] (Layers).known_applications");
    }

    #[test]
    fn parse_error_has_locator() {
        let err = PatternCatalog::parse("[\n{\"pattern_name\": }]").unwrap_err();
        match err {
            AprError::Format { locator, .. } => assert!(locator.starts_with("line 2"), "{locator}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn save_then_load_round_trips() {
        let cat = PatternCatalog::bundled();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("catalog.json");
        cat.save(&path).unwrap();
        assert_eq!(load_catalog(&path).unwrap(), cat);
    }
}
