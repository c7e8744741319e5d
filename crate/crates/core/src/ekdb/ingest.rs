//! Reading Stack Exchange style post dumps.
//!
//! Two row encodings are accepted, one row per line:
//!
//! * `Posts.xml` rows: `<row Id="1" PostTypeId="1" Tags="&lt;mvc&gt;" ... />`
//! * JSON lines with the same attribute names as keys.
//!
//! Lines that are neither (XML prolog, `<posts>` wrapper, blanks) are ignored.
//! Rows that look like posts but cannot be decoded are skipped and counted.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use quick_xml::events::Event;
use quick_xml::Reader;
use serde::{Deserialize, Serialize};

use super::html::strip_html;
use crate::error::{AprError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PostKind {
    Question,
    Answer,
}

/// A forum post with markup removed. Answers carry their question's tags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub id: u64,
    pub kind: PostKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_id: Option<u64>,
    #[serde(default)]
    pub title: String,
    pub body: String,
    pub tags: BTreeSet<String>,
    pub score: i64,
}

impl Post {
    /// Text that gets indexed: title (if any) followed by the body.
    pub fn indexed_text(&self) -> String {
        if self.title.is_empty() {
            self.body.clone()
        } else {
            format!("{}\n{}", self.title, self.body)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ingested {
    pub posts: Vec<Post>,
    pub skipped_rows: usize,
}

/// Default relevance tags for architecture discussions.
pub fn default_tag_filter() -> BTreeSet<String> {
    [
        "software-architecture",
        "architecture",
        "design-patterns",
        "model-view-controller",
        "microkernel",
        "pipes-and-filters",
        "layered-architecture",
        "broker",
    ]
    .into_iter()
    .map(String::from)
    .collect()
}

pub fn ingest_posts(dump: impl AsRef<Path>, tag_filter: &BTreeSet<String>) -> Result<Ingested> {
    let path = dump.as_ref();
    let contents = std::fs::read_to_string(path).map_err(|e| AprError::io(path, e))?;
    ingest_str(&contents, tag_filter)
}

pub fn ingest_str(contents: &str, tag_filter: &BTreeSet<String>) -> Result<Ingested> {
    if tag_filter.is_empty() {
        return Err(AprError::InvalidInput("tag filter must not be empty".into()));
    }
    let filter: BTreeSet<String> = tag_filter.iter().map(|t| t.to_lowercase()).collect();

    let mut skipped_rows = 0;
    let mut rows: BTreeMap<u64, RawRow> = BTreeMap::new();
    for (lineno, line) in contents.lines().enumerate() {
        let line = line.trim();
        let parsed = if line.starts_with("<row") {
            parse_xml_row(line)
        } else if line.starts_with('{') {
            parse_json_row(line)
        } else {
            continue;
        };
        match parsed.and_then(RawRow::validate) {
            Ok(row) if rows.contains_key(&row.id) => {
                log::warn!("line {}: duplicate post id {}", lineno + 1, row.id);
                skipped_rows += 1;
            }
            Ok(row) => {
                rows.insert(row.id, row);
            }
            Err(reason) => {
                log::warn!("line {}: skipping malformed row: {reason}", lineno + 1);
                skipped_rows += 1;
            }
        }
    }

    let mut question_tags: HashMap<u64, BTreeSet<String>> = HashMap::new();
    for row in rows.values() {
        if row.post_type == 1 && row.tags.iter().any(|t| filter.contains(t)) {
            question_tags.insert(row.id, row.tags.clone());
        }
    }

    let posts = rows
        .into_values()
        .filter_map(|row| {
            let (kind, tags) = match row.post_type {
                1 => (PostKind::Question, question_tags.get(&row.id)?.clone()),
                2 => (PostKind::Answer, question_tags.get(&row.parent_id?)?.clone()),
                _ => return None,
            };
            Some(Post {
                id: row.id,
                kind,
                parent_id: row.parent_id,
                title: row.title.trim().to_string(),
                body: strip_html(&row.body),
                tags,
                score: row.score,
            })
        })
        .collect();

    Ok(Ingested {
        posts,
        skipped_rows,
    })
}

/// Parses `<a><b>` or `|a|b|` tag encodings into lowercase tag names.
pub fn parse_tags(encoded: &str) -> BTreeSet<String> {
    encoded
        .split(['<', '>', '|'])
        .map(|t| t.trim().to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

#[derive(Debug, Default)]
struct RawRow {
    id: u64,
    post_type: u8,
    parent_id: Option<u64>,
    title: String,
    body: String,
    tags: BTreeSet<String>,
    score: i64,
}

impl RawRow {
    fn validate(self) -> std::result::Result<Self, String> {
        match self.post_type {
            1 | 2 if self.id == 0 => Err("missing Id".into()),
            2 if self.parent_id.is_none() => Err(format!("answer {} has no ParentId", self.id)),
            _ => Ok(self),
        }
    }
}

fn parse_num<T: std::str::FromStr>(field: &str, value: &str) -> std::result::Result<T, String> {
    value
        .trim()
        .parse()
        .map_err(|_| format!("{field} is not a number: {value:?}"))
}

fn parse_xml_row(line: &str) -> std::result::Result<RawRow, String> {
    let mut reader = Reader::from_str(line);
    let element = match reader.read_event() {
        Ok(Event::Empty(e)) | Ok(Event::Start(e)) => e,
        Ok(other) => return Err(format!("expected a row element, got {other:?}")),
        Err(e) => return Err(e.to_string()),
    };
    let mut row = RawRow::default();
    let mut seen_type = false;
    for attr in element.attributes() {
        let attr = attr.map_err(|e| e.to_string())?;
        let value = attr.unescape_value().map_err(|e| e.to_string())?;
        match attr.key.as_ref() {
            b"Id" => row.id = parse_num("Id", &value)?,
            b"PostTypeId" => {
                row.post_type = parse_num("PostTypeId", &value)?;
                seen_type = true;
            }
            b"ParentId" => row.parent_id = Some(parse_num("ParentId", &value)?),
            b"Score" => row.score = parse_num("Score", &value)?,
            b"Title" => row.title = value.into_owned(),
            b"Body" => row.body = value.into_owned(),
            b"Tags" => row.tags = parse_tags(&value),
            _ => {}
        }
    }
    if !seen_type {
        return Err("missing PostTypeId".into());
    }
    Ok(row)
}

#[derive(Deserialize)]
#[serde(rename_all = "PascalCase")]
struct JsonRow {
    id: u64,
    post_type_id: u8,
    #[serde(default)]
    parent_id: Option<u64>,
    #[serde(default)]
    title: String,
    #[serde(default)]
    body: String,
    #[serde(default)]
    tags: String,
    #[serde(default)]
    score: i64,
}

fn parse_json_row(line: &str) -> std::result::Result<RawRow, String> {
    let row: JsonRow = serde_json::from_str(line).map_err(|e| e.to_string())?;
    Ok(RawRow {
        id: row.id,
        post_type: row.post_type_id,
        parent_id: row.parent_id,
        title: row.title,
        body: row.body,
        tags: parse_tags(&row.tags),
        score: row.score,
    })
}

/// File holding an ingested corpus inside its directory.
pub const CORPUS_FILE: &str = "posts.jsonl";

/// Writes one post per line to `dir/posts.jsonl`, creating `dir`.
pub fn save_corpus(dir: impl AsRef<Path>, posts: &[Post]) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| AprError::io(dir, e))?;
    let mut out = String::new();
    for post in posts {
        out.push_str(&serde_json::to_string(post).expect("post serializes"));
        out.push('\n');
    }
    let path = dir.join(CORPUS_FILE);
    std::fs::write(&path, out).map_err(|e| AprError::io(&path, e))
}

pub fn load_corpus(dir: impl AsRef<Path>) -> Result<Vec<Post>> {
    let path = dir.as_ref().join(CORPUS_FILE);
    let contents = std::fs::read_to_string(&path).map_err(|e| AprError::io(&path, e))?;
    contents
        .lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line)
                .map_err(|e| AprError::format(format!("{}:{}", path.display(), i + 1), e))
        })
        .collect()
}
