//! Chat-completion and embedding access behind one gateway.
//!
//! [`Gateway`] wraps an [`LlmProvider`] with request validation, retry with
//! exponential backoff for transient failures, a concurrency bound, and call
//! counters. Two providers exist: [`OpenAiProvider`] speaks the
//! OpenAI-compatible HTTP protocol and [`MockProvider`] replays scripted
//! replies and hashes text into embeddings without touching the network.

mod gateway;
mod mock;
mod openai;

use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use gateway::{Gateway, GatewayStats};
pub use mock::{
    mock_embed, prompt_digest, MockFailure, MockProvider, MockRule, MockScripts,
    MOCK_EMBEDDING_MODEL, MOCK_HASH_SEED,
};
pub use openai::OpenAiProvider;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GatewayError {
    #[error("transport error{}: {body}", status.map(|s| format!(" (HTTP {s})")).unwrap_or_default())]
    Transport { status: Option<u16>, body: String },
    #[error("request timed out")]
    Timeout,
    #[error("environment variable {0} holding the API key is not set")]
    AuthMissing(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("no mock script matches agent {agent:?} subject {subject:?} (digest {digest})")]
    NoScript {
        agent: String,
        subject: String,
        digest: String,
    },
    #[error("embedding has dimension {actual}, expected {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("malformed provider response: {0}")]
    Decode(String),
    #[error("provider configuration: {0}")]
    Config(String),
}

impl GatewayError {
    /// Whether a retry has a chance of succeeding.
    pub fn is_transient(&self) -> bool {
        match self {
            GatewayError::Timeout => true,
            GatewayError::Transport { status: None, .. } => true,
            GatewayError::Transport {
                status: Some(s), ..
            } => *s == 408 || *s == 429 || *s >= 500,
            _ => false,
        }
    }
}

/// One chat-completion call.
///
/// `agent` and `subject` label the call for transcripts and mock script
/// matching; they are never sent to a remote provider.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub system_prompt: String,
    pub user_prompt: String,
    pub model_id: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub agent: String,
    pub subject: String,
}

impl ChatRequest {
    pub fn new(
        agent: impl Into<String>,
        subject: impl Into<String>,
        system_prompt: impl Into<String>,
        user_prompt: impl Into<String>,
    ) -> Self {
        Self {
            system_prompt: system_prompt.into(),
            user_prompt: user_prompt.into(),
            model_id: String::new(),
            temperature: 0.0,
            max_tokens: 1024,
            agent: agent.into(),
            subject: subject.into(),
        }
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.system_prompt.trim().is_empty() {
            return Err(GatewayError::InvalidRequest(
                "system prompt is empty".into(),
            ));
        }
        if self.user_prompt.trim().is_empty() {
            return Err(GatewayError::InvalidRequest("user prompt is empty".into()));
        }
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err(GatewayError::InvalidRequest(format!(
                "temperature {} must be a non-negative number",
                self.temperature
            )));
        }
        if self.max_tokens == 0 {
            return Err(GatewayError::InvalidRequest(
                "max_tokens must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// A dense embedding tagged with the model that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub values: Vec<f64>,
    pub model_id: String,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>, model_id: impl Into<String>) -> Self {
        Self {
            values,
            model_id: model_id.into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// A backend that answers chat and embedding requests.
pub trait LlmProvider: Send + Sync {
    fn chat(&self, req: &ChatRequest) -> Result<String, GatewayError>;
    fn embed(&self, text: &str) -> Result<EmbeddingVector, GatewayError>;
    fn kind(&self) -> ProviderKind;
    /// HTTP requests issued so far. Always zero for offline providers.
    fn network_requests(&self) -> u64 {
        0
    }
}

/// Anything that turns text into an [`EmbeddingVector`].
pub trait Embedder: Sync {
    fn embed(&self, text: &str) -> Result<EmbeddingVector, GatewayError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    #[default]
    Mock,
    OpenAi,
}

fn default_base_url() -> String {
    "https://openrouter.ai/api/v1".into()
}
fn default_timeout_secs() -> u64 {
    60
}
fn default_max_retries() -> u32 {
    2
}
fn default_embedding_dim() -> usize {
    256
}
fn default_backoff_ms() -> u64 {
    500
}
fn default_max_concurrency() -> usize {
    4
}
fn default_temperature() -> f64 {
    0.0
}
fn default_max_tokens() -> u32 {
    1024
}
fn default_chat_model() -> String {
    "mock-chat".into()
}
fn default_embedding_model() -> String {
    MOCK_EMBEDDING_MODEL.into()
}

/// Provider settings. API keys are read from the environment variable named
/// in `api_key_env_var`, never from the config itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    #[serde(default)]
    pub kind: ProviderKind,
    #[serde(default = "default_base_url")]
    pub base_url: String,
    #[serde(default)]
    pub api_key_env_var: Option<String>,
    #[serde(default = "default_chat_model")]
    pub chat_model: String,
    #[serde(default = "default_embedding_model")]
    pub embedding_model: String,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_backoff_ms")]
    pub backoff_ms: u64,
    #[serde(default = "default_embedding_dim")]
    pub embedding_dim: usize,
    #[serde(default = "default_max_concurrency")]
    pub max_concurrency: usize,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    /// Scripted replies for the mock provider.
    #[serde(default)]
    pub mock_scripts: Option<PathBuf>,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            kind: ProviderKind::Mock,
            base_url: default_base_url(),
            api_key_env_var: None,
            chat_model: default_chat_model(),
            embedding_model: default_embedding_model(),
            timeout_secs: default_timeout_secs(),
            max_retries: default_max_retries(),
            backoff_ms: 0,
            embedding_dim: default_embedding_dim(),
            max_concurrency: default_max_concurrency(),
            temperature: default_temperature(),
            max_tokens: default_max_tokens(),
            mock_scripts: None,
        }
    }
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.kind == ProviderKind::OpenAi {
            validate_base_url(&self.base_url)?;
        }
        if self.embedding_dim == 0 {
            return Err(GatewayError::Config(
                "embedding_dim must be positive".into(),
            ));
        }
        if self.max_concurrency == 0 {
            return Err(GatewayError::Config(
                "max_concurrency must be positive".into(),
            ));
        }
        if self.timeout_secs == 0 {
            return Err(GatewayError::Config("timeout_secs must be positive".into()));
        }
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err(GatewayError::Config("temperature must be >= 0".into()));
        }
        if self.max_tokens == 0 {
            return Err(GatewayError::Config("max_tokens must be positive".into()));
        }
        Ok(())
    }

    /// Model id stamped on embeddings from this provider.
    pub fn embedding_model_id(&self) -> &str {
        match self.kind {
            ProviderKind::Mock => MOCK_EMBEDDING_MODEL,
            ProviderKind::OpenAi => &self.embedding_model,
        }
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.timeout_secs)
    }
}

fn validate_base_url(url: &str) -> Result<(), GatewayError> {
    let uri: ureq::http::Uri = url
        .parse()
        .map_err(|e| GatewayError::Config(format!("base_url {url:?}: {e}")))?;
    match (uri.scheme_str(), uri.host()) {
        (Some("http" | "https"), Some(h)) if !h.is_empty() => Ok(()),
        _ => Err(GatewayError::Config(format!(
            "base_url {url:?} must be an absolute http(s) URL"
        ))),
    }
}
