//! Random criteria stores and a brute-force retrieval reference.

#![allow(dead_code)]

use rand::seq::IndexedRandom;
use rand::Rng;
use resumerag::rag::{KnowledgeChunk, KnowledgeStore, RetrievalConfig, SourceDocument};

pub const VOCAB: &[&str] = &[
    "payroll",
    "compliance",
    "onboarding",
    "recruiting",
    "benefits",
    "python",
    "kubernetes",
    "leadership",
    "strategy",
    "budget",
    "mentoring",
    "excel",
    "hris",
    "workday",
    "mandarin",
    "negotiation",
    "analytics",
    "sql",
    "training",
    "retention",
];

pub fn random_text(rng: &mut impl Rng, words: usize) -> String {
    (0..words)
        .map(|_| *VOCAB.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn random_docs(rng: &mut impl Rng, n: usize) -> Vec<SourceDocument> {
    (0..n)
        .map(|i| {
            // a few duplicate bodies force exact similarity ties
            let body = if i > 0 && rng.random_bool(0.15) {
                "payroll compliance onboarding".to_string()
            } else {
                let words = rng.random_range(3..60);
                random_text(rng, words)
            };
            SourceDocument {
                doc_id: format!("doc{i:03}"),
                title: String::new(),
                body,
                tags: vec![],
            }
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// Cosine by direct formula; `None` when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// Every chunk scored, filtered at `tau` inclusive, sorted by similarity
/// descending then chunk id, cut to the cap.
pub fn brute_force(
    chunks: &[KnowledgeChunk],
    query: &[f64],
    cfg: &RetrievalConfig,
) -> Vec<(String, f64)> {
    let mut all: Vec<(String, f64)> = chunks
        .iter()
        .filter_map(|c| cosine(query, &c.embedding.values).map(|s| (c.chunk_id.clone(), s)))
        .filter(|(_, s)| *s >= cfg.tau)
        .collect();
    // selection sort on (sim desc, id asc), independent of the library sort
    for i in 0..all.len() {
        let mut best = i;
        for j in i + 1..all.len() {
            let (bj, bb) = (&all[j], &all[best]);
            if bj.1 > bb.1 || (bj.1 == bb.1 && bj.0 < bb.0) {
                best = j;
            }
        }
        all.swap(i, best);
    }
    if cfg.top_k_cap > 0 {
        all.truncate(cfg.top_k_cap);
    }
    all
}

pub fn store_chunks(store: &KnowledgeStore) -> Vec<KnowledgeChunk> {
    store.chunks().cloned().collect()
}
