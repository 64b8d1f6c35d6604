//! Language-model access: a chat-completion HTTP client, deterministic mock
//! models, and the prompt templates for the informalize, autoformalize and
//! judge tasks.

pub mod client;
pub mod mocks;
pub mod templates;

use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use client::{AuditLog, HttpModel, RateLimiter};
pub use mocks::{mock_model, MockKind, MOCK_NAMES};
pub use templates::{parse_judge_answer, JudgeAnswer, Payload, PromptError, PromptTemplate, Task};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransportError {
    #[error("endpoint unreachable after {attempts} attempt(s): {message}")]
    Unreachable { attempts: u32, message: String },
    #[error("authentication rejected (HTTP {status})")]
    Auth { status: u16 },
    #[error("HTTP {status} after {attempts} attempt(s): {body}")]
    Http { status: u16, attempts: u32, body: String },
    #[error("request timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("invalid model configuration: {0}")]
    Config(String),
}

/// A text-completion model. Every call is independent: no conversation
/// state is carried between calls.
pub trait LanguageModel: Send + Sync {
    fn name(&self) -> &str;
    fn complete(&self, prompt: &str) -> Result<String, TransportError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    /// Total attempts, the first one included.
    pub max_attempts: u32,
    pub backoff_base_ms: u64,
    pub backoff_max_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { max_attempts: 3, backoff_base_ms: 500, backoff_max_ms: 30_000 }
    }
}

impl RetryPolicy {
    /// Delay before attempt `attempt + 1`, counting from 1.
    pub fn backoff(&self, attempt: u32) -> Duration {
        let factor = 1u64 << (attempt.saturating_sub(1)).min(20);
        Duration::from_millis(self.backoff_base_ms.saturating_mul(factor).min(self.backoff_max_ms))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    /// Base URL of an OpenAI-style API, or `mock` for the built-in mocks.
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout_secs: u64,
    pub retry: RetryPolicy,
    /// Environment variable holding the bearer token.
    pub api_key_env: String,
    pub max_concurrent: usize,
    /// Token-bucket rate; `None` disables rate limiting.
    pub requests_per_minute: Option<f64>,
    pub audit_log: Option<std::path::PathBuf>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            endpoint: "mock".into(),
            model: "perfect-oracle".into(),
            temperature: 0.1,
            max_tokens: 1024,
            timeout_secs: 60,
            retry: RetryPolicy::default(),
            api_key_env: "OPENAI_API_KEY".into(),
            max_concurrent: 4,
            requests_per_minute: None,
            audit_log: None,
        }
    }
}

impl ModelConfig {
    pub fn mock(name: &str) -> Self {
        Self { endpoint: "mock".into(), model: name.into(), ..Self::default() }
    }

    pub fn is_mock(&self) -> bool {
        self.endpoint == "mock" || self.endpoint.starts_with("mock:")
    }

    pub fn validate(&self) -> Result<(), TransportError> {
        if !(self.temperature >= 0.0) {
            return Err(TransportError::Config("temperature must be non-negative".into()));
        }
        if self.retry.max_attempts == 0 {
            return Err(TransportError::Config("retry.max_attempts must be at least 1".into()));
        }
        if self.max_concurrent == 0 {
            return Err(TransportError::Config("max_concurrent must be at least 1".into()));
        }
        if self.model.is_empty() {
            return Err(TransportError::Config("model name is empty".into()));
        }
        Ok(())
    }
}

/// Builds the model described by `cfg`: a mock when the endpoint is `mock`,
/// otherwise an HTTP client.
pub fn build_model(cfg: &ModelConfig) -> Result<Arc<dyn LanguageModel>, TransportError> {
    cfg.validate()?;
    if cfg.is_mock() {
        return mock_model(&cfg.model)
            .ok_or_else(|| TransportError::Config(format!("unknown mock model `{}`", cfg.model)));
    }
    Ok(Arc::new(HttpModel::new(cfg.clone())?))
}
