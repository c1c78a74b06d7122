//! Deterministic offline provider.
//!
//! Chat replies come from a scripts file: an ordered list of rules, each
//! matching on any combination of prompt digest, agent label, subject label
//! and required substrings of the user prompt. The first matching rule wins.
//! A rule either replies (a single `reply`, or a `replies` sequence consumed
//! one per call that repeats its last entry) or fails with a scripted
//! transport error.
//!
//! Embeddings are feature-hashed token counts; see [`mock_embed`].

use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ChatRequest, EmbeddingVector, GatewayError, LlmProvider, ProviderKind};

pub const MOCK_EMBEDDING_MODEL: &str = "mock-hash-v1";

/// Seed folded into the FNV-1a offset basis for token hashing.
pub const MOCK_HASH_SEED: u64 = 0x5253_4d45_5f45_4d42;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Hex SHA-256 of `system ‖ 0x00 ‖ user`. This is the `digest` a script
/// rule matches against.
pub fn prompt_digest(system_prompt: &str, user_prompt: &str) -> String {
    let mut h = Sha256::new();
    h.update(system_prompt.as_bytes());
    h.update([0u8]);
    h.update(user_prompt.as_bytes());
    hex::encode(h.finalize())
}

/// Bucket index of a token under the mock hash.
pub(crate) fn token_bucket(token: &str, dim: usize) -> usize {
    let mut hash = FNV_OFFSET ^ MOCK_HASH_SEED;
    for b in token.as_bytes() {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    (hash % dim as u64) as usize
}

pub(crate) fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// Feature-hashed bag-of-tokens embedding.
///
/// Lowercases, splits on non-alphanumeric characters, hashes every token
/// with 64-bit FNV-1a (offset basis XOR [`MOCK_HASH_SEED`]) into one of
/// `dim` buckets, counts, and L2-normalizes. Text without tokens maps to
/// the zero vector. Whitespace and punctuation differences therefore never
/// change the result.
pub fn mock_embed(text: &str, dim: usize) -> EmbeddingVector {
    let mut counts = vec![0.0f64; dim];
    for tok in tokens(text) {
        counts[token_bucket(&tok, dim)] += 1.0;
    }
    let norm = counts.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm > 0.0 {
        for c in &mut counts {
            *c /= norm;
        }
    }
    EmbeddingVector::new(counts, MOCK_EMBEDDING_MODEL)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockFailure {
    /// HTTP status to report; absent means a connection-level failure.
    #[serde(default)]
    pub status: Option<u16>,
    #[serde(default)]
    pub body: String,
    #[serde(default)]
    pub timeout: bool,
}

impl MockFailure {
    pub fn status(code: u16) -> Self {
        Self {
            status: Some(code),
            body: format!("scripted failure {code}"),
            timeout: false,
        }
    }

    fn to_error(&self) -> GatewayError {
        if self.timeout {
            GatewayError::Timeout
        } else {
            GatewayError::Transport {
                status: self.status,
                body: self.body.clone(),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockRule {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub contains: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reply: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub replies: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fail: Option<MockFailure>,
}

impl MockRule {
    pub fn reply(text: impl Into<String>) -> Self {
        Self {
            reply: Some(text.into()),
            ..Default::default()
        }
    }

    pub fn sequence<I, S>(replies: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            replies: replies.into_iter().map(Into::into).collect(),
            ..Default::default()
        }
    }

    pub fn fail(failure: MockFailure) -> Self {
        Self {
            fail: Some(failure),
            ..Default::default()
        }
    }

    pub fn for_agent(mut self, agent: impl Into<String>) -> Self {
        self.agent = Some(agent.into());
        self
    }

    pub fn for_subject(mut self, subject: impl Into<String>) -> Self {
        self.subject = Some(subject.into());
        self
    }

    pub fn for_digest(mut self, digest: impl Into<String>) -> Self {
        self.digest = Some(digest.into());
        self
    }

    pub fn containing(mut self, needle: impl Into<String>) -> Self {
        self.contains.push(needle.into());
        self
    }

    fn matches(&self, req: &ChatRequest, digest: &str) -> bool {
        self.digest
            .as_deref()
            .is_none_or(|d| d.eq_ignore_ascii_case(digest))
            && self.agent.as_deref().is_none_or(|a| a == req.agent)
            && self.subject.as_deref().is_none_or(|s| s == req.subject)
            && self
                .contains
                .iter()
                .all(|c| req.user_prompt.contains(c.as_str()))
    }

    fn responses(&self) -> Vec<&str> {
        self.reply
            .iter()
            .chain(self.replies.iter())
            .map(String::as_str)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockScripts {
    #[serde(default)]
    pub rules: Vec<MockRule>,
    /// Reply used when no rule matches. Without it an unmatched call fails.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_reply: Option<String>,
}

impl MockScripts {
    pub fn load(path: &Path) -> Result<Self, GatewayError> {
        let text = fs::read_to_string(path)
            .map_err(|e| GatewayError::Config(format!("mock scripts {}: {e}", path.display())))?;
        let scripts: MockScripts = serde_json::from_str(&text)
            .map_err(|e| GatewayError::Config(format!("mock scripts {}: {e}", path.display())))?;
        scripts.validate()?;
        Ok(scripts)
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        for (i, rule) in self.rules.iter().enumerate() {
            let has_reply = !rule.responses().is_empty();
            if has_reply == rule.fail.is_some() {
                return Err(GatewayError::Config(format!(
                    "mock rule {i} must have exactly one of reply/replies or fail"
                )));
            }
        }
        Ok(())
    }

    /// Inserts a rule ahead of all existing ones.
    pub fn prepend(&mut self, rule: MockRule) {
        self.rules.insert(0, rule);
    }
}

pub struct MockProvider {
    scripts: MockScripts,
    cursors: Vec<AtomicUsize>,
    dim: usize,
}

impl MockProvider {
    pub fn new(scripts: MockScripts, dim: usize) -> Self {
        let cursors = scripts.rules.iter().map(|_| AtomicUsize::new(0)).collect();
        Self {
            scripts,
            cursors,
            dim,
        }
    }
}

impl LlmProvider for MockProvider {
    fn chat(&self, req: &ChatRequest) -> Result<String, GatewayError> {
        let digest = prompt_digest(&req.system_prompt, &req.user_prompt);
        let hit = self
            .scripts
            .rules
            .iter()
            .enumerate()
            .find(|(_, r)| r.matches(req, &digest));
        match hit {
            Some((_, rule)) if rule.fail.is_some() => Err(rule.fail.as_ref().unwrap().to_error()),
            Some((i, rule)) => {
                let responses = rule.responses();
                if responses.is_empty() {
                    return Err(GatewayError::Config(format!(
                        "mock rule {i} has no replies"
                    )));
                }
                let n = self.cursors[i].fetch_add(1, Ordering::SeqCst);
                Ok(responses[n.min(responses.len() - 1)].to_string())
            }
            None => self
                .scripts
                .default_reply
                .clone()
                .ok_or(GatewayError::NoScript {
                    agent: req.agent.clone(),
                    subject: req.subject.clone(),
                    digest,
                }),
        }
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, GatewayError> {
        Ok(mock_embed(text, self.dim))
    }

    fn kind(&self) -> ProviderKind {
        ProviderKind::Mock
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(agent: &str, subject: &str, user: &str) -> ChatRequest {
        ChatRequest::new(agent, subject, "system", user)
    }

    fn dot(a: &EmbeddingVector, b: &EmbeddingVector) -> f64 {
        a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn digest_rule_echoes_scripted_reply() {
        let digest = prompt_digest("system", "hello");
        let p = MockProvider::new(
            MockScripts {
                rules: vec![MockRule::reply("OK").for_digest(digest)],
                default_reply: None,
            },
            8,
        );
        assert_eq!(p.chat(&req("x", "y", "hello")).unwrap(), "OK");
        assert!(matches!(
            p.chat(&req("x", "y", "other")),
            Err(GatewayError::NoScript { .. })
        ));
    }

    #[test]
    fn first_matching_rule_wins_and_sequences_advance() {
        let p = MockProvider::new(
            MockScripts {
                rules: vec![
                    MockRule::sequence(["one", "two"])
                        .for_agent("a")
                        .for_subject("r1"),
                    MockRule::reply("role").containing("Level: junior"),
                ],
                default_reply: Some("fallback".into()),
            },
            8,
        );
        assert_eq!(p.chat(&req("a", "r1", "x")).unwrap(), "one");
        assert_eq!(p.chat(&req("a", "r1", "x")).unwrap(), "two");
        assert_eq!(p.chat(&req("a", "r1", "x")).unwrap(), "two");
        assert_eq!(p.chat(&req("a", "r2", "Level: junior")).unwrap(), "role");
        assert_eq!(
            p.chat(&req("a", "r2", "Level: senior")).unwrap(),
            "fallback"
        );
    }

    #[test]
    fn scripts_file_validation() {
        let bad: MockScripts =
            serde_json::from_str(r#"{"rules":[{"agent":"a","reply":"x","fail":{"status":500}}]}"#)
                .unwrap();
        assert!(bad.validate().is_err());
        let empty: MockScripts = serde_json::from_str(r#"{"rules":[{"agent":"a"}]}"#).unwrap();
        assert!(empty.validate().is_err());
    }

    #[test]
    fn embedding_is_deterministic_and_unit_norm() {
        let a = mock_embed("abc", 256);
        assert_eq!(a, mock_embed("abc", 256));
        assert_eq!(a.dim(), 256);
        assert!((a.norm() - 1.0).abs() < 1e-9);
        let long = mock_embed("Senior HR manager; 8 years, payroll & compliance!", 256);
        assert!((long.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn empty_text_is_zero_vector() {
        let z = mock_embed("", 256);
        assert_eq!(z.dim(), 256);
        assert!(z.is_zero());
        assert!(mock_embed(" ,;- ", 256).is_zero());
    }

    #[test]
    fn whitespace_and_case_are_normalized() {
        assert_eq!(
            mock_embed("software engineer", 256),
            mock_embed("software engineer ", 256)
        );
        assert_eq!(
            mock_embed("Software  Engineer", 256),
            mock_embed("software engineer", 256)
        );
    }

    #[test]
    fn disjoint_buckets_give_zero_similarity() {
        let a_tokens = ["payroll", "compliance"];
        let b_tokens = ["python", "kubernetes"];
        let a_buckets: Vec<_> = a_tokens.iter().map(|t| token_bucket(t, 256)).collect();
        let b_buckets: Vec<_> = b_tokens.iter().map(|t| token_bucket(t, 256)).collect();
        assert!(a_buckets.iter().all(|b| !b_buckets.contains(b)));
        let a = mock_embed(&a_tokens.join(" "), 256);
        let b = mock_embed(&b_tokens.join(" "), 256);
        assert_eq!(dot(&a, &b), 0.0);
    }
}
