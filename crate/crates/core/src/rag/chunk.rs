//! Sliding-window chunking on character counts.
//!
//! Windows are `chunk_size_chars` long and consecutive windows overlap by
//! `chunk_overlap_chars`. When a window ends before the body does, its end is
//! pulled back to the last paragraph break (`\n\n`) or, failing that, the last
//! sentence end (`.`, `!`, `?` followed by whitespace, or a line break) inside
//! the final 15% of the window. A cut is only taken if the next window would
//! still start after the current one.
//!
//! All offsets are in Unicode scalar values, not bytes.

use super::{RetrievalConfig, SourceDocument};

/// A window of a document body: `[start, end)` in characters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkSpan {
    pub start: usize,
    pub end: usize,
    pub text: String,
}

const LOOKBACK_FRACTION: f64 = 0.15;

pub fn chunk_text(body: &str, cfg: &RetrievalConfig) -> Vec<ChunkSpan> {
    let chars: Vec<char> = body.chars().collect();
    let len = chars.len();
    let size = cfg.chunk_size_chars;
    let overlap = cfg.chunk_overlap_chars;
    let lookback = (size as f64 * LOOKBACK_FRACTION).floor() as usize;
    let mut spans = Vec::new();
    if len == 0 {
        return spans;
    }
    let mut start = 0;
    loop {
        let mut end = (start + size).min(len);
        if end < len {
            if let Some(cut) = boundary_cut(&chars, end.saturating_sub(lookback).max(start), end) {
                if cut > start + overlap {
                    end = cut;
                }
            }
        }
        spans.push(ChunkSpan {
            start,
            end,
            text: chars[start..end].iter().collect(),
        });
        if end == len {
            break;
        }
        start = end - overlap;
    }
    spans
}

/// Position just after the best boundary in `chars[lo..hi]`: the last
/// paragraph break if any, else the last sentence end.
fn boundary_cut(chars: &[char], lo: usize, hi: usize) -> Option<usize> {
    let mut sentence = None;
    for i in (lo..hi).rev() {
        if chars[i] == '\n' && i > lo && chars[i - 1] == '\n' {
            return Some(i + 1);
        }
        if sentence.is_none() {
            let c = chars[i];
            let followed_by_space = chars.get(i + 1).is_some_and(|n| n.is_whitespace());
            if c == '\n' || (matches!(c, '.' | '!' | '?') && followed_by_space) {
                sentence = Some(i + 1);
            }
        }
    }
    sentence
}

pub fn chunk_document(doc: &SourceDocument, cfg: &RetrievalConfig) -> Vec<ChunkSpan> {
    chunk_text(&doc.body, cfg)
}
