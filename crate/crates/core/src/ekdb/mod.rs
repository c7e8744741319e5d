//! Experiential knowledge base: tag-filtered forum posts behind a latent
//! semantic index.

mod html;
mod index;
mod ingest;
pub mod svd;

pub use html::{decode_entities, strip_html};
pub use index::{
    LsiIndex, QueryResult, RetrievalConfig, DEFAULT_MAX_RESULTS, DEFAULT_MIN_SIMILARITY,
    DEFAULT_RANK_K,
};
pub use ingest::{
    default_tag_filter, ingest_posts, ingest_str, load_corpus, parse_tags, save_corpus, Ingested,
    Post, PostKind, CORPUS_FILE,
};
