use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::thread;
use std::time::Duration;

use super::{
    ChatRequest, Embedder, EmbeddingVector, GatewayError, LlmProvider, MockProvider, MockScripts,
    OpenAiProvider, ProviderConfig, ProviderKind,
};

/// Counting semaphore bounding in-flight provider calls.
struct Semaphore {
    permits: Mutex<usize>,
    cv: Condvar,
}

impl Semaphore {
    fn new(n: usize) -> Self {
        Self {
            permits: Mutex::new(n),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut p = self.permits.lock().unwrap_or_else(|e| e.into_inner());
        while *p == 0 {
            p = self.cv.wait(p).unwrap_or_else(|e| e.into_inner());
        }
        *p -= 1;
        Permit(self)
    }
}

struct Permit<'a>(&'a Semaphore);

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut p = self.0.permits.lock().unwrap_or_else(|e| e.into_inner());
        *p += 1;
        self.0.cv.notify_one();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GatewayStats {
    /// Provider chat attempts, retries included.
    pub chat_attempts: u64,
    /// Provider embed attempts, retries included.
    pub embed_attempts: u64,
    /// Outbound HTTP requests made by the provider.
    pub network_requests: u64,
}

/// Shared handle over a provider. Cheap to clone; clones share counters and
/// the concurrency bound.
#[derive(Clone)]
pub struct Gateway {
    inner: Arc<Inner>,
}

struct Inner {
    provider: Arc<dyn LlmProvider>,
    chat_model: String,
    temperature: f64,
    max_tokens: u32,
    dim: usize,
    max_retries: u32,
    backoff: Duration,
    semaphore: Semaphore,
    chat_attempts: AtomicU64,
    embed_attempts: AtomicU64,
}

impl Gateway {
    pub fn new(provider: Arc<dyn LlmProvider>, cfg: &ProviderConfig) -> Self {
        Self {
            inner: Arc::new(Inner {
                provider,
                chat_model: cfg.chat_model.clone(),
                temperature: cfg.temperature,
                max_tokens: cfg.max_tokens,
                dim: cfg.embedding_dim,
                max_retries: cfg.max_retries,
                backoff: Duration::from_millis(cfg.backoff_ms),
                semaphore: Semaphore::new(cfg.max_concurrency.max(1)),
                chat_attempts: AtomicU64::new(0),
                embed_attempts: AtomicU64::new(0),
            }),
        }
    }

    /// Builds the provider named by `cfg.kind`. Relative script paths are
    /// resolved against `base_dir`.
    pub fn from_config(cfg: &ProviderConfig, base_dir: &Path) -> Result<Self, GatewayError> {
        cfg.validate()?;
        let provider: Arc<dyn LlmProvider> = match cfg.kind {
            ProviderKind::Mock => {
                let scripts = match &cfg.mock_scripts {
                    Some(p) => MockScripts::load(&base_dir.join(p))?,
                    None => MockScripts::default(),
                };
                Arc::new(MockProvider::new(scripts, cfg.embedding_dim))
            }
            ProviderKind::OpenAi => Arc::new(OpenAiProvider::new(cfg)?),
        };
        Ok(Self::new(provider, cfg))
    }

    /// Offline gateway with the given scripts and no retry delay.
    pub fn mock(scripts: MockScripts) -> Self {
        let cfg = ProviderConfig::default();
        Self::new(
            Arc::new(MockProvider::new(scripts, cfg.embedding_dim)),
            &cfg,
        )
    }

    pub fn kind(&self) -> ProviderKind {
        self.inner.provider.kind()
    }

    pub fn dimension(&self) -> usize {
        self.inner.dim
    }

    pub fn stats(&self) -> GatewayStats {
        GatewayStats {
            chat_attempts: self.inner.chat_attempts.load(Ordering::Relaxed),
            embed_attempts: self.inner.embed_attempts.load(Ordering::Relaxed),
            network_requests: self.inner.provider.network_requests(),
        }
    }

    /// Fills model, temperature and token limit from the provider config.
    pub fn request(
        &self,
        agent: &str,
        subject: &str,
        system_prompt: String,
        user_prompt: String,
    ) -> ChatRequest {
        ChatRequest {
            system_prompt,
            user_prompt,
            model_id: self.inner.chat_model.clone(),
            temperature: self.inner.temperature,
            max_tokens: self.inner.max_tokens,
            agent: agent.to_string(),
            subject: subject.to_string(),
        }
    }

    /// Sends one chat request, retrying transient failures up to
    /// `max_retries` times. Invalid requests fail before reaching the
    /// provider.
    pub fn chat(&self, req: &ChatRequest) -> Result<String, GatewayError> {
        req.validate()?;
        self.with_retries(&self.inner.chat_attempts, || self.inner.provider.chat(req))
    }

    pub fn embed(&self, text: &str) -> Result<EmbeddingVector, GatewayError> {
        if text.trim().is_empty() {
            return Err(GatewayError::InvalidRequest(
                "embedding input is empty".into(),
            ));
        }
        let v = self.with_retries(&self.inner.embed_attempts, || {
            self.inner.provider.embed(text)
        })?;
        if v.dim() != self.inner.dim {
            return Err(GatewayError::DimensionMismatch {
                expected: self.inner.dim,
                actual: v.dim(),
            });
        }
        if v.values.iter().any(|x| !x.is_finite()) {
            return Err(GatewayError::Decode(
                "embedding contains non-finite values".into(),
            ));
        }
        Ok(v)
    }

    fn with_retries<T>(
        &self,
        counter: &AtomicU64,
        mut call: impl FnMut() -> Result<T, GatewayError>,
    ) -> Result<T, GatewayError> {
        let mut attempt = 0u32;
        loop {
            let result = {
                let _permit = self.inner.semaphore.acquire();
                counter.fetch_add(1, Ordering::Relaxed);
                call()
            };
            match result {
                Err(e) if e.is_transient() && attempt < self.inner.max_retries => {
                    let delay = self.inner.backoff.saturating_mul(1 << attempt.min(16));
                    if !delay.is_zero() {
                        thread::sleep(delay);
                    }
                    attempt += 1;
                }
                other => return other,
            }
        }
    }
}

impl Embedder for Gateway {
    fn embed(&self, text: &str) -> Result<EmbeddingVector, GatewayError> {
        Gateway::embed(self, text)
    }
}

impl std::fmt::Debug for Gateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gateway")
            .field("kind", &self.kind())
            .field("dim", &self.inner.dim)
            .field("stats", &self.stats())
            .finish()
    }
}
