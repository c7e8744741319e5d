use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ingest::Post;
use super::svd::thin_svd;
use crate::entailment::{tokenize, StopWords};
use crate::error::{AprError, Result};

pub const DEFAULT_RANK_K: usize = 100;
pub const DEFAULT_MAX_RESULTS: usize = 50;
pub const DEFAULT_MIN_SIMILARITY: f64 = 0.2;

const FORMAT_NAME: &str = "apr-lsi";
const FORMAT_VERSION: u32 = 1;
const FACTORS_MAGIC: &[u8; 8] = b"APRLSI01";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrievalConfig {
    pub max_results: usize,
    pub min_similarity: f64,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        Self {
            max_results: DEFAULT_MAX_RESULTS,
            min_similarity: DEFAULT_MIN_SIMILARITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryResult<'a> {
    pub post: &'a Post,
    /// Cosine in the latent space, in `[-1, 1]`.
    pub similarity: f64,
}

/// Latent semantic index over a post corpus.
///
/// The TF-IDF term-document matrix `A` (raw counts times `ln(N / df)`) is
/// factored as `A ~ U_k S_k V_k^T`. A document's latent vector is its row of
/// `V_k S_k`, which equals `U_k^T a_j`; queries are projected with `U_k^T` as
/// well, so at full rank latent cosines coincide with TF-IDF cosines.
#[derive(Debug, Clone, PartialEq)]
pub struct LsiIndex {
    stop_words: StopWords,
    /// Terms in row order; `vocabulary` maps back.
    terms: Vec<String>,
    vocabulary: BTreeMap<String, usize>,
    idf: Vec<f64>,
    documents: Vec<Post>,
    /// Sparse TF-IDF columns, one per document, sorted by term row.
    tfidf: Vec<Vec<(usize, f64)>>,
    rank_k: usize,
    /// `rank_k` columns of length `terms.len()`.
    left_factor: Vec<Vec<f64>>,
    singular_values: Vec<f64>,
    /// `rank_k` columns of length `documents.len()`.
    doc_factor: Vec<Vec<f64>>,
    doc_latent: Vec<Vec<f64>>,
    doc_norms: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl LsiIndex {
    pub fn build(corpus: &[Post], rank_k: usize, stop_words: &StopWords) -> Result<Self> {
        if corpus.is_empty() {
            return Err(AprError::InvalidInput("cannot index an empty corpus".into()));
        }
        if rank_k < 1 {
            return Err(AprError::InvalidInput("rank_k must be at least 1".into()));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = corpus.iter().find(|p| !seen.insert(p.id)) {
            return Err(AprError::InvalidInput(format!(
                "duplicate post id {} in corpus",
                dup.id
            )));
        }

        let counts: Vec<BTreeMap<String, u32>> = corpus
            .iter()
            .map(|post| {
                let mut tf = BTreeMap::new();
                for token in tokenize(&post.indexed_text(), stop_words) {
                    *tf.entry(token).or_insert(0) += 1;
                }
                tf
            })
            .collect();

        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for tf in &counts {
            for term in tf.keys() {
                *df.entry(term.as_str()).or_insert(0) += 1;
            }
        }
        if df.is_empty() {
            return Err(AprError::InvalidInput(
                "corpus has no indexable terms".into(),
            ));
        }
        let n_docs = corpus.len() as f64;
        let terms: Vec<String> = df.keys().map(|t| t.to_string()).collect();
        let idf: Vec<f64> = df.values().map(|&d| (n_docs / d as f64).ln()).collect();
        let vocabulary: BTreeMap<String, usize> = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();

        let tfidf: Vec<Vec<(usize, f64)>> = counts
            .iter()
            .map(|tf| {
                tf.iter()
                    .map(|(term, &c)| {
                        let row = vocabulary[term];
                        (row, f64::from(c) * idf[row])
                    })
                    .filter(|&(_, w)| w != 0.0)
                    .collect()
            })
            .collect();

        let n_terms = terms.len();
        let dense: Vec<Vec<f64>> = tfidf
            .iter()
            .map(|col| {
                let mut d = vec![0.0; n_terms];
                for &(row, w) in col {
                    d[row] = w;
                }
                d
            })
            .collect();
        let svd = thin_svd(&dense, n_terms);
        let numerical_rank = svd.numerical_rank(n_terms, corpus.len());
        let k = rank_k.min(numerical_rank).max(1);
        log::debug!(
            "lsi: {} docs, {} terms, numerical rank {}, keeping {} ({} sweeps)",
            corpus.len(),
            n_terms,
            numerical_rank,
            k,
            svd.sweeps
        );

        let mut s = svd.s;
        s.truncate(k);
        let mut u = svd.u;
        u.truncate(k);
        let mut v = svd.v;
        v.truncate(k);

        let mut index = LsiIndex {
            stop_words: stop_words.clone(),
            terms,
            vocabulary,
            idf,
            documents: corpus.to_vec(),
            tfidf,
            rank_k: k,
            left_factor: u,
            singular_values: s,
            doc_factor: v,
            doc_latent: Vec::new(),
            doc_norms: Vec::new(),
        };
        index.derive_latent();
        Ok(index)
    }

    fn derive_latent(&mut self) {
        self.doc_latent = (0..self.documents.len())
            .map(|d| {
                (0..self.rank_k)
                    .map(|k| self.singular_values[k] * self.doc_factor[k][d])
                    .collect()
            })
            .collect();
        self.doc_norms = self.doc_latent.iter().map(|x| dot(x, x).sqrt()).collect();
    }

    pub fn rank_k(&self) -> usize {
        self.rank_k
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn documents(&self) -> &[Post] {
        &self.documents
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term_id(&self, term: &str) -> Option<usize> {
        self.vocabulary.get(term).copied()
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    /// Sparse TF-IDF column of document `doc` as `(term row, weight)`.
    pub fn tfidf_column(&self, doc: usize) -> &[(usize, f64)] {
        &self.tfidf[doc]
    }

    pub fn latent_vector(&self, doc: usize) -> &[f64] {
        &self.doc_latent[doc]
    }

    pub fn doc_norms(&self) -> &[f64] {
        &self.doc_norms
    }

    pub fn stop_words(&self) -> &StopWords {
        &self.stop_words
    }

    /// Cosine between two documents in latent space; 0 if either is the zero vector.
    pub fn latent_cosine(&self, a: usize, b: usize) -> f64 {
        let denom = self.doc_norms[a] * self.doc_norms[b];
        if denom == 0.0 {
            0.0
        } else {
            (dot(&self.doc_latent[a], &self.doc_latent[b]) / denom).clamp(-1.0, 1.0)
        }
    }

    /// Projects free text into the latent space. `None` when no query term is
    /// in the vocabulary or the projection vanishes.
    pub fn fold_in(&self, text: &str) -> Option<Vec<f64>> {
        let mut weights: BTreeMap<usize, f64> = BTreeMap::new();
        for token in tokenize(text, &self.stop_words) {
            if let Some(row) = self.term_id(&token) {
                *weights.entry(row).or_insert(0.0) += 1.0;
            }
        }
        if weights.is_empty() {
            return None;
        }
        let latent: Vec<f64> = self
            .left_factor
            .iter()
            .map(|u| weights.iter().map(|(&row, &c)| c * self.idf[row] * u[row]).sum())
            .collect();
        (dot(&latent, &latent) > 0.0).then_some(latent)
    }

    /// Posts most similar to `query_text`, best first, ties by ascending id.
    pub fn query(
        &self,
        query_text: &str,
        max_results: usize,
        min_similarity: f64,
    ) -> Vec<QueryResult<'_>> {
        let Some(q) = self.fold_in(query_text) else {
            return Vec::new();
        };
        let q_norm = dot(&q, &q).sqrt();
        let mut results: Vec<QueryResult<'_>> = self
            .documents
            .iter()
            .enumerate()
            .map(|(d, post)| {
                let similarity = if self.doc_norms[d] == 0.0 {
                    0.0
                } else {
                    (dot(&q, &self.doc_latent[d]) / (q_norm * self.doc_norms[d])).clamp(-1.0, 1.0)
                };
                QueryResult { post, similarity }
            })
            .filter(|r| r.similarity >= min_similarity)
            .collect();
        results.sort_by(|a, b| {
            b.similarity
                .total_cmp(&a.similarity)
                .then(a.post.id.cmp(&b.post.id))
        });
        results.truncate(max_results);
        results
    }

    /// Writes the index to `dir` (created if needed).
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| AprError::io(dir, e))?;

        let manifest = Manifest {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION,
            rank_k: self.rank_k,
            terms: self.terms.len(),
            documents: self.documents.len(),
        };
        write_file(&dir.join("manifest.json"), |w| {
            serde_json::to_writer_pretty(&mut *w, &manifest).map_err(std::io::Error::other)?;
            writeln!(w)
        })?;
        write_file(&dir.join("vocabulary.txt"), |w| {
            for t in &self.terms {
                writeln!(w, "{t}")?;
            }
            Ok(())
        })?;
        write_file(&dir.join("stopwords.txt"), |w| {
            let mut words: Vec<&String> = self.stop_words.iter().collect();
            words.sort();
            for t in words {
                writeln!(w, "{t}")?;
            }
            Ok(())
        })?;
        write_file(&dir.join("documents.jsonl"), |w| {
            for post in &self.documents {
                serde_json::to_writer(&mut *w, post).map_err(std::io::Error::other)?;
                writeln!(w)?;
            }
            Ok(())
        })?;
        write_file(&dir.join("factors.bin"), |w| {
            w.write_all(FACTORS_MAGIC)?;
            for n in [self.terms.len(), self.documents.len(), self.rank_k] {
                w.write_all(&(n as u64).to_le_bytes())?;
            }
            let put = |w: &mut BufWriter<fs::File>, xs: &[f64]| -> std::io::Result<()> {
                for x in xs {
                    w.write_all(&x.to_le_bytes())?;
                }
                Ok(())
            };
            put(w, &self.idf)?;
            put(w, &self.singular_values)?;
            for col in &self.left_factor {
                put(w, col)?;
            }
            for col in &self.doc_factor {
                put(w, col)?;
            }
            for col in &self.tfidf {
                w.write_all(&(col.len() as u64).to_le_bytes())?;
                for &(row, weight) in col {
                    w.write_all(&(row as u64).to_le_bytes())?;
                    w.write_all(&weight.to_le_bytes())?;
                }
            }
            Ok(())
        })
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let manifest_path = dir.join("manifest.json");
        let manifest: Manifest = serde_json::from_str(&read_string(&manifest_path)?)
            .map_err(|e| AprError::format(manifest_path.display().to_string(), e))?;
        if manifest.format != FORMAT_NAME || manifest.version != FORMAT_VERSION {
            return Err(AprError::format(
                manifest_path.display().to_string(),
                format!(
                    "unsupported index format {} v{}",
                    manifest.format, manifest.version
                ),
            ));
        }

        let terms: Vec<String> = read_string(&dir.join("vocabulary.txt"))?
            .lines()
            .map(String::from)
            .collect();
        let stop_words = StopWords::load(dir.join("stopwords.txt"))?;
        let docs_path = dir.join("documents.jsonl");
        let docs_file = fs::File::open(&docs_path).map_err(|e| AprError::io(&docs_path, e))?;
        let mut documents = Vec::new();
        for (i, line) in BufReader::new(docs_file).lines().enumerate() {
            let line = line.map_err(|e| AprError::io(&docs_path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let post: Post = serde_json::from_str(&line).map_err(|e| {
                AprError::format(format!("{}:{}", docs_path.display(), i + 1), e)
            })?;
            documents.push(post);
        }
        if terms.len() != manifest.terms || documents.len() != manifest.documents {
            return Err(AprError::format(
                dir.display().to_string(),
                "manifest counts disagree with stored vocabulary or documents",
            ));
        }

        let factors_path = dir.join("factors.bin");
        let mut bytes = Vec::new();
        fs::File::open(&factors_path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| AprError::io(&factors_path, e))?;
        let mut r = ByteReader {
            bytes: &bytes,
            pos: 0,
            path: factors_path.display().to_string(),
        };
        if r.take(8)? != FACTORS_MAGIC {
            return Err(AprError::format(&r.path, "bad magic"));
        }
        let (n_terms, n_docs, k) = (r.u64()? as usize, r.u64()? as usize, r.u64()? as usize);
        if n_terms != terms.len() || n_docs != documents.len() || k != manifest.rank_k || k == 0 {
            return Err(AprError::format(&r.path, "factor dimensions disagree with manifest"));
        }
        let idf = r.f64s(n_terms)?;
        let singular_values = r.f64s(k)?;
        let left_factor = (0..k).map(|_| r.f64s(n_terms)).collect::<Result<Vec<_>>>()?;
        let doc_factor = (0..k).map(|_| r.f64s(n_docs)).collect::<Result<Vec<_>>>()?;
        let mut tfidf = Vec::with_capacity(n_docs);
        for _ in 0..n_docs {
            let nnz = r.u64()? as usize;
            let mut col = Vec::with_capacity(nnz.min(n_terms));
            for _ in 0..nnz {
                let row = r.u64()? as usize;
                if row >= n_terms {
                    return Err(AprError::format(&r.path, "term row out of range"));
                }
                col.push((row, r.f64()?));
            }
            tfidf.push(col);
        }
        if r.pos != bytes.len() {
            return Err(AprError::format(&r.path, "trailing bytes"));
        }

        let vocabulary = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        let mut index = LsiIndex {
            stop_words,
            terms,
            vocabulary,
            idf,
            documents,
            tfidf,
            rank_k: k,
            left_factor,
            singular_values,
            doc_factor,
            doc_latent: Vec::new(),
            doc_norms: Vec::new(),
        };
        index.derive_latent();
        Ok(index)
    }
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    format: String,
    version: u32,
    rank_k: usize,
    terms: usize,
    documents: usize,
}

fn read_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| AprError::io(path, e))
}

fn write_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| AprError::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| AprError::io(path, e))
}

struct ByteReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: String,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| AprError::format(&self.path, "truncated factor file"))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ekdb::PostKind;

    fn post(id: u64, body: &str) -> Post {
        Post {
            id,
            kind: PostKind::Question,
            parent_id: None,
            title: String::new(),
            body: body.into(),
            tags: Default::default(),
            score: 0,
        }
    }

    fn corpus() -> Vec<Post> {
        vec![
            post(1, "model view controller separates views from the model"),
            post(2, "pipes and filters stream data through filters"),
            post(3, "layers stack services, each layer uses the layer below"),
            post(4, "the broker routes requests between distributed components"),
            post(5, "controller handles input and updates the view"),
        ]
    }

    #[test]
    fn rejects_empty_corpus_and_zero_rank() {
        let sw = StopWords::bundled();
        assert!(LsiIndex::build(&[], 2, &sw).is_err());
        assert!(LsiIndex::build(&corpus(), 0, &sw).is_err());
    }

    #[test]
    fn rejects_duplicate_ids() {
        let sw = StopWords::bundled();
        let mut c = corpus();
        c[1].id = 1;
        assert!(LsiIndex::build(&c, 2, &sw).is_err());
    }

    #[test]
    fn single_document_latent_norm_matches_tfidf_norm() {
        let sw = StopWords::bundled();
        let idx = LsiIndex::build(&[post(7, "mvc views controllers")], 1, &sw).unwrap();
        assert_eq!(idx.rank_k(), 1);
        let tfidf_norm: f64 = idx.tfidf_column(0).iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        assert_eq!(idx.doc_norms()[0], tfidf_norm);
    }

    #[test]
    fn rank_is_capped_by_matrix_rank() {
        let sw = StopWords::bundled();
        let idx = LsiIndex::build(&corpus(), 100, &sw).unwrap();
        assert!(idx.rank_k() <= 5);
        assert!(idx.singular_values().windows(2).all(|w| w[0] >= w[1]));
        assert!(idx.singular_values().iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn out_of_vocabulary_query_is_empty() {
        let sw = StopWords::bundled();
        let idx = LsiIndex::build(&corpus(), 5, &sw).unwrap();
        assert!(idx.query("zebra quux", 10, -1.0).is_empty());
        assert!(idx.query("", 10, -1.0).is_empty());
    }

    #[test]
    fn query_orders_and_truncates() {
        let sw = StopWords::bundled();
        let idx = LsiIndex::build(&corpus(), 5, &sw).unwrap();
        let hits = idx.query("controller view", 2, -1.0);
        assert_eq!(hits.len(), 2);
        assert!(hits[0].similarity >= hits[1].similarity);
        assert!([1, 5].contains(&hits[0].post.id));
    }

    #[test]
    fn save_and_load_are_bit_exact() {
        let sw = StopWords::bundled();
        let idx = LsiIndex::build(&corpus(), 3, &sw).unwrap();
        let dir = tempfile::tempdir().unwrap();
        idx.save(dir.path()).unwrap();
        let back = LsiIndex::load(dir.path()).unwrap();
        assert_eq!(idx, back);
    }

    #[test]
    fn load_detects_truncation() {
        let sw = StopWords::bundled();
        let idx = LsiIndex::build(&corpus(), 3, &sw).unwrap();
        let dir = tempfile::tempdir().unwrap();
        idx.save(dir.path()).unwrap();
        let path = dir.path().join("factors.bin");
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 4]).unwrap();
        assert!(matches!(LsiIndex::load(dir.path()), Err(AprError::Format { .. })));
    }
}
