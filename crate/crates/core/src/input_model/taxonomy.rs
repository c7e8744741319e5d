use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{AprError, Result};

pub const ROOT_PATH: &str = "/";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    slug: String,
    label: String,
    #[serde(default)]
    children: Vec<NodeDoc>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaxonomyDoc {
    #[serde(default)]
    version: String,
    root: NodeDoc,
}

/// A node of the software-type tree. `path` joins slugs with `/`; the root's
/// path is `/`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaxonomyNode {
    pub path: String,
    pub label: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<TaxonomyNode>,
}

impl TaxonomyNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    fn walk<'a>(&'a self, out: &mut Vec<&'a TaxonomyNode>) {
        out.push(self);
        for c in &self.children {
            c.walk(out);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Taxonomy {
    pub version: String,
    pub root: TaxonomyNode,
}

impl Taxonomy {
    pub fn parse(json: &str) -> Result<Self> {
        let doc: TaxonomyDoc = serde_json::from_str(json).map_err(|e| {
            AprError::format(format!("line {} column {}", e.line(), e.column()), e)
        })?;
        let mut seen = BTreeSet::new();
        let root = TaxonomyNode {
            path: ROOT_PATH.to_string(),
            label: doc.root.label.clone(),
            children: doc
                .root
                .children
                .iter()
                .map(|c| build(c, "", &mut seen))
                .collect::<Result<_>>()?,
        };
        Ok(Taxonomy {
            version: doc.version,
            root,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let json = std::fs::read_to_string(path).map_err(|e| AprError::io(path, e))?;
        Self::parse(&json)
    }

    pub fn bundled() -> Self {
        Self::parse(crate::data::TAXONOMY).expect("bundled taxonomy is valid")
    }

    /// Exact lookup on the node path.
    pub fn resolve(&self, path: &str) -> Result<&TaxonomyNode> {
        self.nodes()
            .into_iter()
            .find(|n| n.path == path)
            .ok_or_else(|| AprError::Taxonomy(path.to_string()))
    }

    /// Every node, pre-order.
    pub fn nodes(&self) -> Vec<&TaxonomyNode> {
        let mut out = Vec::new();
        self.root.walk(&mut out);
        out
    }

    pub fn leaves(&self) -> Vec<&TaxonomyNode> {
        self.nodes().into_iter().filter(|n| n.is_leaf()).collect()
    }
}

fn build(doc: &NodeDoc, parent: &str, seen: &mut BTreeSet<String>) -> Result<TaxonomyNode> {
    let slug = doc.slug.trim();
    if slug.is_empty() || slug.contains('/') {
        return Err(AprError::format(
            format!("node {:?}", doc.label),
            "slug must be non-empty and must not contain '/'",
        ));
    }
    let path = if parent.is_empty() {
        slug.to_string()
    } else {
        format!("{parent}/{slug}")
    };
    if !seen.insert(path.clone()) {
        return Err(AprError::format(path, "duplicate taxonomy path"));
    }
    Ok(TaxonomyNode {
        children: doc
            .children
            .iter()
            .map(|c| build(c, &path, seen))
            .collect::<Result<_>>()?,
        path,
        label: doc.label.clone(),
    })
}

pub fn load_taxonomy(path: impl AsRef<Path>) -> Result<Taxonomy> {
    Taxonomy::load(path)
}

pub fn resolve_type<'a>(taxonomy: &'a Taxonomy, path: &str) -> Result<&'a TaxonomyNode> {
    taxonomy.resolve(path)
}
