//! Command line and HTTP front end.

pub mod exit;
pub mod render;
pub mod server;
pub mod store;

use std::path::Path;

use apr_core::ekdb::LsiIndex;
use apr_core::{KnowledgeBase, PatternCatalog, PipelineConfig, Result};

/// Bundled knowledge bases, with the catalogue optionally replaced from a
/// file and the index loaded from its directory.
pub fn load_knowledge_base(catalog: Option<&Path>, index: Option<&Path>) -> Result<KnowledgeBase> {
    let index = index.map(LsiIndex::load).transpose()?;
    let mut kb = KnowledgeBase::bundled(index);
    if let Some(path) = catalog {
        kb.catalog = PatternCatalog::load(path)?;
    }
    Ok(kb)
}

pub fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    match path {
        Some(p) => PipelineConfig::load(p),
        None => Ok(PipelineConfig::default()),
    }
}
