//! Single-file store format.
//!
//! All integers are little-endian. Strings are a `u32` byte length followed
//! by UTF-8 bytes.
//!
//! ```text
//! magic        4 bytes  "RRKS"
//! version      u32      currently 1
//! dim          u32
//! model_id     string
//! tau          f64
//! top_k_cap    u32      0 = no cap
//! chunk_size   u32
//! overlap      u32
//! chunk_count  u32
//! chunk_count records, each:
//!   record_len u32      bytes that follow in this record
//!   chunk_id   string
//!   doc_id     string
//!   text       string
//!   span_start u32      character offsets into the source body
//!   span_end   u32
//!   embedding  dim × f32
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

use super::store::{KnowledgeStore, StoredChunk};
use super::{KnowledgeChunk, RetrievalConfig};
use crate::llm::EmbeddingVector;

pub const STORE_MAGIC: &[u8; 4] = b"RRKS";
pub const STORE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("{path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("not a knowledge store file (bad magic)")]
    BadMagic,
    #[error("unsupported store format version {found} (expected {STORE_FORMAT_VERSION})")]
    UnsupportedVersion { found: u32 },
    #[error("corrupt store at byte {offset}: {reason}")]
    Corrupt { offset: usize, reason: String },
    #[error("value does not fit the store format: {0}")]
    TooLarge(String),
}

fn corrupt(offset: usize, reason: impl Into<String>) -> PersistError {
    PersistError::Corrupt {
        offset,
        reason: reason.into(),
    }
}

fn u32_of(v: usize, what: &str) -> Result<u32, PersistError> {
    u32::try_from(v).map_err(|_| PersistError::TooLarge(format!("{what} = {v}")))
}

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) -> Result<(), PersistError> {
        self.u32(u32_of(s.len(), "string length")?);
        self.0.extend_from_slice(s.as_bytes());
        Ok(())
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], PersistError> {
        if self.buf.len() - self.pos < n {
            return Err(corrupt(
                self.pos,
                format!(
                    "truncated while reading {what} ({n} bytes needed, {} left)",
                    self.buf.len() - self.pos
                ),
            ));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u32(&mut self, what: &str) -> Result<u32, PersistError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
    fn f64(&mut self, what: &str) -> Result<f64, PersistError> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
    fn f32(&mut self, what: &str) -> Result<f32, PersistError> {
        Ok(f32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
    fn str(&mut self, what: &str) -> Result<String, PersistError> {
        let len = self.u32(what)? as usize;
        let at = self.pos;
        let bytes = self.take(len, what)?;
        String::from_utf8(bytes.to_vec())
            .map_err(|_| corrupt(at, format!("{what} is not valid UTF-8")))
    }
}

impl KnowledgeStore {
    pub fn to_bytes(&self) -> Result<Vec<u8>, PersistError> {
        let mut w = Writer(Vec::new());
        w.0.extend_from_slice(STORE_MAGIC);
        w.u32(STORE_FORMAT_VERSION);
        w.u32(u32_of(self.dim, "dim")?);
        w.str(&self.model_id)?;
        w.0.extend_from_slice(&self.config.tau.to_le_bytes());
        w.u32(u32_of(self.config.top_k_cap, "top_k_cap")?);
        w.u32(u32_of(self.config.chunk_size_chars, "chunk_size_chars")?);
        w.u32(u32_of(
            self.config.chunk_overlap_chars,
            "chunk_overlap_chars",
        )?);
        w.u32(u32_of(self.len(), "chunk count")?);
        for stored in self.docs.values().flatten() {
            let c = &stored.chunk;
            let mut r = Writer(Vec::new());
            r.str(&c.chunk_id)?;
            r.str(&c.doc_id)?;
            r.str(&c.text)?;
            r.u32(u32_of(c.char_span.0, "span start")?);
            r.u32(u32_of(c.char_span.1, "span end")?);
            for v in &c.embedding.values {
                r.0.extend_from_slice(&(*v as f32).to_le_bytes());
            }
            w.u32(u32_of(r.0.len(), "record length")?);
            w.0.extend_from_slice(&r.0);
        }
        Ok(w.0)
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self, PersistError> {
        let mut r = Reader { buf, pos: 0 };
        if buf.len() < 4 || &buf[..4] != STORE_MAGIC {
            return Err(PersistError::BadMagic);
        }
        r.pos = 4;
        let version = r.u32("version")?;
        if version != STORE_FORMAT_VERSION {
            return Err(PersistError::UnsupportedVersion { found: version });
        }
        let dim_at = r.pos;
        let dim = r.u32("dim")? as usize;
        if dim == 0 {
            return Err(corrupt(dim_at, "dimension is zero"));
        }
        let model_id = r.str("model_id")?;
        let cfg_at = r.pos;
        let config = RetrievalConfig {
            tau: r.f64("tau")?,
            top_k_cap: r.u32("top_k_cap")? as usize,
            chunk_size_chars: r.u32("chunk_size")? as usize,
            chunk_overlap_chars: r.u32("overlap")? as usize,
        };
        config
            .validate()
            .map_err(|e| corrupt(cfg_at, format!("retrieval config: {e}")))?;
        let count = r.u32("chunk count")? as usize;
        let mut docs: BTreeMap<String, Vec<StoredChunk>> = BTreeMap::new();
        let mut seen_ids = std::collections::HashSet::new();
        for i in 0..count {
            let rec_at = r.pos;
            let len = r.u32("record length")? as usize;
            let body = r.take(len, &format!("record {i}"))?;
            let mut rr = Reader { buf: body, pos: 0 };
            let at = |rr: &Reader| rec_at + 4 + rr.pos;
            let parse = |rr: &mut Reader| -> Result<KnowledgeChunk, PersistError> {
                let chunk_id = rr.str("chunk_id")?;
                let doc_id = rr.str("doc_id")?;
                let text = rr.str("text")?;
                let start = rr.u32("span start")? as usize;
                let end = rr.u32("span end")? as usize;
                let mut values = Vec::with_capacity(dim);
                for _ in 0..dim {
                    values.push(f64::from(rr.f32("embedding")?));
                }
                Ok(KnowledgeChunk {
                    chunk_id,
                    doc_id,
                    text,
                    embedding: EmbeddingVector::new(values, model_id.clone()),
                    char_span: (start, end),
                })
            };
            let chunk = parse(&mut rr).map_err(|e| match e {
                PersistError::Corrupt { offset, reason } => corrupt(rec_at + 4 + offset, reason),
                other => other,
            })?;
            if rr.pos != body.len() {
                return Err(corrupt(at(&rr), format!("record {i} has trailing bytes")));
            }
            let (start, end) = chunk.char_span;
            if end < start || end - start != chunk.text.chars().count() || chunk.text.is_empty() {
                return Err(corrupt(
                    rec_at,
                    format!("record {i} span does not match its text"),
                ));
            }
            if chunk.embedding.values.iter().any(|v| !v.is_finite()) {
                return Err(corrupt(
                    rec_at,
                    format!("record {i} has a non-finite embedding"),
                ));
            }
            if !seen_ids.insert(chunk.chunk_id.clone()) {
                return Err(corrupt(
                    rec_at,
                    format!("duplicate chunk id {}", chunk.chunk_id),
                ));
            }
            docs.entry(chunk.doc_id.clone())
                .or_default()
                .push(StoredChunk::new(chunk));
        }
        if r.pos != buf.len() {
            return Err(corrupt(r.pos, "trailing bytes after last record"));
        }
        Ok(KnowledgeStore {
            dim,
            model_id,
            config,
            docs,
        })
    }

    /// Writes the store atomically: a temporary sibling file is written and
    /// then renamed over `path`.
    pub fn save(&self, path: &Path) -> Result<(), PersistError> {
        let bytes = self.to_bytes()?;
        let io = |source| PersistError::Io {
            path: path.display().to_string(),
            source,
        };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io)?;
        }
        let tmp = path.with_extension("tmp");
        {
            let mut f = fs::File::create(&tmp).map_err(io)?;
            f.write_all(&bytes).map_err(io)?;
            f.sync_all().map_err(io)?;
        }
        fs::rename(&tmp, path).map_err(io)
    }

    pub fn load(path: &Path) -> Result<Self, PersistError> {
        let bytes = fs::read(path).map_err(|source| PersistError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }
}
