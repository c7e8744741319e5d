use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::NfrItem;
use crate::error::{AprError, NfrPair, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDoc {
    #[serde(default)]
    version: String,
    labels: Vec<String>,
    conflicting: Vec<(String, String)>,
}

/// Symmetric, irreflexive conflict relation over canonical NFR labels.
/// Pairs not listed are compatible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConflictMatrix {
    version: String,
    labels: BTreeSet<String>,
    /// Stored with the smaller label first.
    conflicts: BTreeSet<(String, String)>,
}

fn ordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl ConflictMatrix {
    pub fn new(
        version: impl Into<String>,
        labels: impl IntoIterator<Item = String>,
        conflicting: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self> {
        let labels: BTreeSet<String> = labels.into_iter().map(|l| l.to_lowercase()).collect();
        let mut conflicts = BTreeSet::new();
        for (a, b) in conflicting {
            let (a, b) = (a.to_lowercase(), b.to_lowercase());
            for l in [&a, &b] {
                if !labels.contains(l) {
                    return Err(AprError::Vocabulary(l.clone()));
                }
            }
            if a == b {
                return Err(AprError::format(
                    format!("conflict ({a}, {b})"),
                    "an NFR cannot conflict with itself",
                ));
            }
            conflicts.insert(ordered(&a, &b));
        }
        Ok(Self {
            version: version.into(),
            labels,
            conflicts,
        })
    }

    pub fn parse(json: &str) -> Result<Self> {
        let doc: MatrixDoc = serde_json::from_str(json).map_err(|e| {
            AprError::format(format!("line {} column {}", e.line(), e.column()), e)
        })?;
        Self::new(doc.version, doc.labels, doc.conflicting)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let json = std::fs::read_to_string(path).map_err(|e| AprError::io(path, e))?;
        Self::parse(&json)
    }

    pub fn bundled() -> Self {
        Self::parse(crate::data::CONFLICT_MATRIX).expect("bundled conflict matrix is valid")
    }

    pub fn labels(&self) -> &BTreeSet<String> {
        &self.labels
    }

    pub fn knows(&self, label: &str) -> bool {
        self.labels.contains(label)
    }

    pub fn conflicting(&self, a: &str, b: &str) -> bool {
        a != b && self.conflicts.contains(&ordered(a, b))
    }
}

/// Every unordered pair of supplied NFRs that the matrix marks conflicting,
/// in input order.
pub fn check_nfr_conflicts(nfrs: &[NfrItem], matrix: &ConflictMatrix) -> Result<Vec<NfrPair>> {
    if let Some(unknown) = nfrs.iter().find(|n| !matrix.knows(&n.name)) {
        return Err(AprError::Vocabulary(unknown.name.clone()));
    }
    let mut pairs = Vec::new();
    for (i, a) in nfrs.iter().enumerate() {
        for b in &nfrs[i + 1..] {
            if matrix.conflicting(&a.name, &b.name) {
                let pair = (a.name.clone(), b.name.clone());
                if !pairs.contains(&pair) {
                    pairs.push(pair);
                }
            }
        }
    }
    Ok(pairs)
}

/// Drops the lower-priority member of every conflicting pair. A smaller
/// number means a higher priority; equal priorities must be broken by the
/// user, so they are reported like missing ones.
pub fn resolve_nfr_conflicts(
    nfrs: &[NfrItem],
    conflicts: &[NfrPair],
    priorities: &BTreeMap<String, i64>,
) -> Result<Vec<NfrItem>> {
    let unresolved: Vec<NfrPair> = conflicts
        .iter()
        .filter(|(a, b)| match (priorities.get(a), priorities.get(b)) {
            (Some(pa), Some(pb)) => pa == pb,
            _ => true,
        })
        .cloned()
        .collect();
    if !unresolved.is_empty() {
        return Err(AprError::ResolutionRequired { pairs: unresolved });
    }
    let removed: BTreeSet<&str> = conflicts
        .iter()
        .map(|(a, b)| if priorities[a] < priorities[b] { b } else { a })
        .map(String::as_str)
        .collect();
    Ok(nfrs
        .iter()
        .filter(|n| !removed.contains(n.name.as_str()))
        .cloned()
        .collect())
}

/// Priorities carried on the items themselves.
pub fn item_priorities(nfrs: &[NfrItem]) -> BTreeMap<String, i64> {
    nfrs.iter()
        .filter_map(|n| n.priority.map(|p| (n.name.clone(), p)))
        .collect()
}
