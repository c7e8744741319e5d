//! Knowledge-base files compiled into the crate.

pub const STOP_WORDS: &str = include_str!("../data/stopwords.txt");
pub const PATTERN_CATALOG: &str = include_str!("../data/posa_catalog.json");
pub const AFINN_LEXICON: &str = include_str!("../data/afinn.tsv");
pub const DOMAIN_LEXICON: &str = include_str!("../data/domain_lexicon.tsv");
pub const CONFLICT_MATRIX: &str = include_str!("../data/nfr_conflicts.json");
pub const TAXONOMY: &str = include_str!("../data/taxonomy.json");
