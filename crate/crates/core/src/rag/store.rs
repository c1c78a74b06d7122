use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::chunk::chunk_document;
use super::{
    cosine_with_norms, l2_norm, KnowledgeChunk, RetrievalConfig, SourceDocument, StoreError,
};
use crate::llm::{Embedder, EmbeddingVector};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct StoredChunk {
    pub(crate) chunk: KnowledgeChunk,
    pub(crate) norm: f64,
}

impl StoredChunk {
    pub(crate) fn new(chunk: KnowledgeChunk) -> Self {
        let norm = l2_norm(&chunk.embedding.values);
        Self { chunk, norm }
    }
}

/// Exact-scan vector store of criteria chunks.
///
/// Embeddings are held at `f32` precision (the persisted precision) so that
/// a saved and reloaded store retrieves identically. Readers may share the
/// store across threads; indexing needs `&mut`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeStore {
    pub(crate) dim: usize,
    pub(crate) model_id: String,
    pub(crate) config: RetrievalConfig,
    pub(crate) docs: BTreeMap<String, Vec<StoredChunk>>,
}

/// A retrieved chunk with its similarity to the query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievedChunk {
    pub chunk: KnowledgeChunk,
    pub similarity: f64,
}

/// Chunks passing the threshold, most similar first; ties by ascending
/// chunk id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalResult {
    pub query_text: String,
    pub chunks: Vec<RetrievedChunk>,
}

impl RetrievalResult {
    pub fn empty(query_text: impl Into<String>) -> Self {
        Self {
            query_text: query_text.into(),
            chunks: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    pub fn len(&self) -> usize {
        self.chunks.len()
    }
}

pub(crate) fn by_similarity_then_id(a: &RetrievedChunk, b: &RetrievedChunk) -> Ordering {
    b.similarity
        .total_cmp(&a.similarity)
        .then_with(|| a.chunk.chunk_id.cmp(&b.chunk.chunk_id))
}

fn quantize(values: &[f64]) -> Vec<f64> {
    values.iter().map(|&v| f64::from(v as f32)).collect()
}

impl KnowledgeStore {
    pub fn new(
        dim: usize,
        model_id: impl Into<String>,
        config: RetrievalConfig,
    ) -> Result<Self, StoreError> {
        config.validate()?;
        if dim == 0 {
            return Err(StoreError::InvalidConfig(
                "dimension must be positive".into(),
            ));
        }
        Ok(Self {
            dim,
            model_id: model_id.into(),
            config,
            docs: BTreeMap::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn config(&self) -> &RetrievalConfig {
        &self.config
    }

    /// Total number of chunks.
    pub fn len(&self) -> usize {
        self.docs.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.docs.keys().map(String::as_str)
    }

    /// All chunks in storage order (by document id, then position).
    pub fn chunks(&self) -> impl Iterator<Item = &KnowledgeChunk> {
        self.docs.values().flatten().map(|s| &s.chunk)
    }

    fn check_embedding(&self, e: &EmbeddingVector) -> Result<(), StoreError> {
        if e.dim() != self.dim || e.model_id != self.model_id {
            return Err(StoreError::EmbeddingMismatch {
                expected: self.model_id.clone(),
                expected_dim: self.dim,
                found: e.model_id.clone(),
                found_dim: e.dim(),
            });
        }
        Ok(())
    }

    /// Chunks, embeds and inserts `doc`, replacing any chunks previously
    /// indexed under the same `doc_id`. Nothing changes if any step fails.
    /// Returns the number of chunks indexed.
    pub fn index(
        &mut self,
        embedder: &dyn Embedder,
        doc: &SourceDocument,
    ) -> Result<usize, StoreError> {
        doc.validate()?;
        let spans = chunk_document(doc, &self.config);
        let mut chunks = Vec::with_capacity(spans.len());
        for (i, span) in spans.into_iter().enumerate() {
            let mut embedding = embedder.embed(&span.text)?;
            self.check_embedding(&embedding)?;
            embedding.values = quantize(&embedding.values);
            chunks.push(StoredChunk::new(KnowledgeChunk {
                chunk_id: format!("{}#{:04}", doc.doc_id, i),
                doc_id: doc.doc_id.clone(),
                text: span.text,
                embedding,
                char_span: (span.start, span.end),
            }));
        }
        let n = chunks.len();
        self.docs.insert(doc.doc_id.clone(), chunks);
        Ok(n)
    }

    /// Inserts already-embedded chunks for one document, replacing prior
    /// chunks with that `doc_id`.
    pub fn insert_embedded(
        &mut self,
        doc_id: &str,
        chunks: Vec<KnowledgeChunk>,
    ) -> Result<(), StoreError> {
        let mut stored = Vec::with_capacity(chunks.len());
        for mut c in chunks {
            self.check_embedding(&c.embedding)?;
            if c.doc_id != doc_id {
                return Err(StoreError::InvalidDocument {
                    doc_id: doc_id.to_string(),
                    reason: format!("chunk {} belongs to {}", c.chunk_id, c.doc_id),
                });
            }
            c.embedding.values = quantize(&c.embedding.values);
            stored.push(StoredChunk::new(c));
        }
        self.docs.insert(doc_id.to_string(), stored);
        Ok(())
    }

    pub fn remove(&mut self, doc_id: &str) -> bool {
        self.docs.remove(doc_id).is_some()
    }

    /// Embeds `query_text` and returns every chunk with similarity ≥
    /// `cfg.tau`, sorted by similarity descending then chunk id, truncated to
    /// the cap. Zero-norm vectors (query or chunk) never match.
    pub fn retrieve(
        &self,
        embedder: &dyn Embedder,
        query_text: &str,
        cfg: &RetrievalConfig,
    ) -> Result<RetrievalResult, StoreError> {
        if query_text.trim().is_empty() {
            return Err(StoreError::EmptyQuery);
        }
        if self.is_empty() {
            return Ok(RetrievalResult::empty(query_text));
        }
        let q = embedder.embed(query_text)?;
        self.check_embedding(&q)?;
        Ok(self.retrieve_vector(&q, query_text, cfg))
    }

    /// Retrieval with a precomputed query embedding.
    pub fn retrieve_vector(
        &self,
        query: &EmbeddingVector,
        query_text: &str,
        cfg: &RetrievalConfig,
    ) -> RetrievalResult {
        let qn = l2_norm(&query.values);
        let mut hits: Vec<RetrievedChunk> = Vec::new();
        if qn > 0.0 {
            for stored in self.docs.values().flatten() {
                if stored.norm == 0.0 {
                    continue;
                }
                let sim = cosine_with_norms(
                    &query.values,
                    qn,
                    &stored.chunk.embedding.values,
                    stored.norm,
                );
                if sim >= cfg.tau {
                    hits.push(RetrievedChunk {
                        chunk: stored.chunk.clone(),
                        similarity: sim,
                    });
                }
            }
        }
        hits.sort_by(by_similarity_then_id);
        if let Some(cap) = cfg.cap() {
            hits.truncate(cap);
        }
        RetrievalResult {
            query_text: query_text.to_string(),
            chunks: hits,
        }
    }
}
