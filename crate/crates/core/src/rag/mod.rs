//! External criteria knowledge store.
//!
//! Criteria documents (hiring rubrics, certification lists, university
//! rankings, profiles of strong past hires) are chunked, embedded and kept in
//! an exact-scan store. Retrieval keeps every chunk whose cosine similarity
//! to the query is at least `tau`, most similar first, optionally capped at
//! `top_k_cap` chunks.

mod chunk;
mod persist;
mod prompt;
mod store;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::{EmbeddingVector, GatewayError};

pub use chunk::{chunk_document, chunk_text, ChunkSpan};
pub use persist::{PersistError, STORE_FORMAT_VERSION, STORE_MAGIC};
pub use prompt::{
    build_prompt, render_context, render_extracted_sections, render_resume_section,
    EvaluationPrompt, ResumeSection, NO_CRITERIA_SENTINEL,
};
pub use store::{KnowledgeStore, RetrievalResult, RetrievedChunk};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimilarityError {
    #[error("vectors have dimensions {0} and {1}")]
    DimensionMismatch(usize, usize),
    #[error("vectors come from different models ({0:?} vs {1:?})")]
    ModelMismatch(String, String),
    #[error("cosine similarity is undefined for a zero vector")]
    ZeroVector,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("document {doc_id:?}: {reason}")]
    InvalidDocument { doc_id: String, reason: String },
    #[error("invalid retrieval config: {0}")]
    InvalidConfig(String),
    #[error("query text is empty")]
    EmptyQuery,
    #[error("embedding from model {found:?} with dimension {found_dim} does not match store ({expected:?}, {expected_dim})")]
    EmbeddingMismatch {
        expected: String,
        expected_dim: usize,
        found: String,
        found_dim: usize,
    },
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Persist(#[from] PersistError),
}

/// A criteria document before chunking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceDocument {
    pub doc_id: String,
    #[serde(default)]
    pub title: String,
    pub body: String,
    #[serde(default)]
    pub tags: Vec<String>,
}

impl SourceDocument {
    pub fn validate(&self) -> Result<(), StoreError> {
        let invalid = |reason: &str| StoreError::InvalidDocument {
            doc_id: self.doc_id.clone(),
            reason: reason.to_string(),
        };
        if self.doc_id.trim().is_empty() {
            return Err(invalid("doc_id is empty"));
        }
        if self.body.trim().is_empty() {
            return Err(invalid("body is empty"));
        }
        Ok(())
    }
}

fn default_tau() -> f64 {
    0.3
}
fn default_top_k() -> usize {
    8
}
fn default_chunk_size() -> usize {
    800
}
fn default_overlap() -> usize {
    120
}

/// Chunking and retrieval parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetrievalConfig {
    /// Minimum cosine similarity for a chunk to be retrieved (inclusive).
    #[serde(default = "default_tau")]
    pub tau: f64,
    /// Maximum number of chunks returned; 0 disables the cap.
    #[serde(default = "default_top_k")]
    pub top_k_cap: usize,
    #[serde(default = "default_chunk_size")]
    pub chunk_size_chars: usize,
    #[serde(default = "default_overlap")]
    pub chunk_overlap_chars: usize,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        Self {
            tau: default_tau(),
            top_k_cap: default_top_k(),
            chunk_size_chars: default_chunk_size(),
            chunk_overlap_chars: default_overlap(),
        }
    }
}

impl RetrievalConfig {
    pub fn validate(&self) -> Result<(), StoreError> {
        if !(-1.0..=1.0).contains(&self.tau) {
            return Err(StoreError::InvalidConfig(format!(
                "tau {} is outside [-1, 1]",
                self.tau
            )));
        }
        if self.chunk_size_chars == 0 {
            return Err(StoreError::InvalidConfig(
                "chunk_size_chars must be positive".into(),
            ));
        }
        if self.chunk_overlap_chars >= self.chunk_size_chars {
            return Err(StoreError::InvalidConfig(
                "chunk_overlap_chars must be smaller than chunk_size_chars".into(),
            ));
        }
        Ok(())
    }

    pub fn cap(&self) -> Option<usize> {
        (self.top_k_cap > 0).then_some(self.top_k_cap)
    }
}

/// A slice of a criteria document with its embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeChunk {
    pub chunk_id: String,
    pub doc_id: String,
    pub text: String,
    pub embedding: EmbeddingVector,
    /// `[start, end)` character offsets into the parent body.
    pub char_span: (usize, usize),
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn l2_norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// `dot / (norm_a * norm_b)`, clamped to [-1, 1]. Both norms must be
/// non-zero. Shared by [`cosine_similarity`] and the store's cached-norm scan
/// so both produce identical bits.
pub(crate) fn cosine_with_norms(a: &[f64], norm_a: f64, b: &[f64], norm_b: f64) -> f64 {
    (dot(a, b) / (norm_a * norm_b)).clamp(-1.0, 1.0)
}

/// Cosine similarity of two embeddings from the same model.
pub fn cosine_similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, SimilarityError> {
    if a.dim() != b.dim() {
        return Err(SimilarityError::DimensionMismatch(a.dim(), b.dim()));
    }
    if a.model_id != b.model_id {
        return Err(SimilarityError::ModelMismatch(
            a.model_id.clone(),
            b.model_id.clone(),
        ));
    }
    let na = l2_norm(&a.values);
    let nb = l2_norm(&b.values);
    if na == 0.0 || nb == 0.0 {
        return Err(SimilarityError::ZeroVector);
    }
    Ok(cosine_with_norms(&a.values, na, &b.values, nb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(x.to_vec(), "m")
    }

    #[test]
    fn cosine_examples() {
        let a = v(&[0.3, -1.2, 4.0]);
        assert!((cosine_similarity(&a, &a).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(
            cosine_similarity(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(),
            0.0
        );
        // 32 / (sqrt(14) * sqrt(77))
        let expected = 32.0 / (14f64.sqrt() * 77f64.sqrt());
        let got = cosine_similarity(&v(&[1.0, 2.0, 3.0]), &v(&[4.0, 5.0, 6.0])).unwrap();
        assert!((got - 0.974632).abs() < 1e-5);
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn cosine_errors() {
        assert_eq!(
            cosine_similarity(&v(&[1.0]), &v(&[1.0, 2.0])),
            Err(SimilarityError::DimensionMismatch(1, 2))
        );
        assert_eq!(
            cosine_similarity(&v(&[0.0, 0.0]), &v(&[1.0, 2.0])),
            Err(SimilarityError::ZeroVector)
        );
        let other = EmbeddingVector::new(vec![1.0, 2.0], "other");
        assert!(matches!(
            cosine_similarity(&v(&[1.0, 2.0]), &other),
            Err(SimilarityError::ModelMismatch(..))
        ));
    }

    #[test]
    fn config_validation() {
        assert!(RetrievalConfig::default().validate().is_ok());
        let bad = RetrievalConfig {
            chunk_overlap_chars: 800,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = RetrievalConfig {
            tau: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!(
            RetrievalConfig {
                top_k_cap: 0,
                ..Default::default()
            }
            .cap(),
            None
        );
    }

    fn nonzero_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (2usize..32)
            .prop_flat_map(|d| {
                (
                    proptest::collection::vec(-10.0..10.0f64, d),
                    proptest::collection::vec(-10.0..10.0f64, d),
                )
            })
            .prop_filter("nonzero", |(a, b)| l2_norm(a) > 1e-6 && l2_norm(b) > 1e-6)
    }

    proptest! {
        #[test]
        fn symmetric_and_scale_invariant((a, b) in nonzero_pair(), c in 0.01..100.0f64) {
            let (va, vb) = (v(&a), v(&b));
            let ab = cosine_similarity(&va, &vb).unwrap();
            let ba = cosine_similarity(&vb, &va).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-12);
            let scaled = v(&a.iter().map(|x| x * c).collect::<Vec<_>>());
            prop_assert!((cosine_similarity(&scaled, &vb).unwrap() - ab).abs() <= 1e-9);
            prop_assert!((-1.0..=1.0).contains(&ab));
        }
    }
}
