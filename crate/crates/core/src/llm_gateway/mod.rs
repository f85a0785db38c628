//! Uniform backend contract for text completion and embedding.
//!
//! Every LLM application in the pipeline goes through [`complete`] and every
//! embedding through [`embed`]; both take a [`CallLedger`] so call accounting
//! stays accurate regardless of backend. Two backends ship: a live HTTP
//! client ([`HttpBackend`]) and a deterministic scripted mock
//! ([`MockBackend`]).

mod http;
mod ledger;
mod mock;

pub use http::HttpBackend;
pub use ledger::{
    CallLedger, LedgerSnapshot, PHASE_GRAPH_EXTRACT, PHASE_JUDGE, PHASE_KEYWORDS, PHASE_SUMMARY,
    PHASE_THOUGHT, REASONING_PHASES,
};
pub use mock::{hash_embedding, Matcher, MockBackend, MockScript, ScriptRule, DEFAULT_EMBED_DIM};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable consulted for the bearer key by default.
pub const DEFAULT_API_KEY_ENV: &str = "MOT_API_KEY";

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("backend unavailable: {detail}")]
    BackendUnavailable { detail: String },
    #[error("no script rule matches prompt starting with {prompt_head:?}")]
    NoScriptMatch { prompt_head: String },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("empty input")]
    EmptyInput,
    #[error("invalid backend descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("invalid mock script: {0}")]
    Script(String),
}

impl GatewayError {
    /// Transport and 5xx-class failures retry; everything else does not.
    pub fn is_retryable(&self) -> bool {
        matches!(self, GatewayError::BackendUnavailable { .. })
    }
}

/// Connection parameters for a live backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendDescriptor {
    pub endpoint: String,
    pub model_id: String,
    /// Sampling temperature in [0, 1]. Defaults to 0 for determinism.
    pub temperature: f64,
    pub max_retries: u32,
    pub timeout_secs: f64,
    /// Name of the environment variable holding the bearer key.
    pub api_key_env: String,
    /// Dimension the embedding endpoint is expected to return.
    pub embed_dim: usize,
    /// Model id for the embedding endpoint; falls back to `model_id`.
    pub embed_model: Option<String>,
}

impl Default for BackendDescriptor {
    fn default() -> Self {
        Self {
            endpoint: String::new(),
            model_id: "gpt-4o-mini".into(),
            temperature: 0.0,
            max_retries: 2,
            timeout_secs: 30.0,
            api_key_env: DEFAULT_API_KEY_ENV.into(),
            embed_dim: 1536,
            embed_model: None,
        }
    }
}

impl BackendDescriptor {
    pub fn validate(&self) -> Result<(), GatewayError> {
        if !(0.0..=1.0).contains(&self.temperature) {
            return Err(GatewayError::InvalidDescriptor(format!(
                "temperature {} outside [0, 1]",
                self.temperature
            )));
        }
        if self.timeout_secs <= 0.0 {
            return Err(GatewayError::InvalidDescriptor("timeout must be positive".into()));
        }
        if self.embed_dim == 0 {
            return Err(GatewayError::InvalidDescriptor("embed_dim must be at least 1".into()));
        }
        Ok(())
    }

    pub fn embed_model_id(&self) -> String {
        self.embed_model.clone().unwrap_or_else(|| self.model_id.clone())
    }
}

/// The backend contract. Implementations must be safe for concurrent use;
/// retry policy lives inside the implementation so a call that eventually
/// succeeds still counts once.
pub trait LlmBackend: Send + Sync {
    fn complete_raw(&self, prompt: &str) -> Result<String, GatewayError>;
    fn embed_raw(&self, text: &str) -> Result<Vec<f32>, GatewayError>;
    fn embed_dim(&self) -> usize;
}

/// Run one completion and record it on the ledger under `phase`.
///
/// The ledger increments exactly once per successful call, after the
/// backend's own retries have resolved.
pub fn complete(
    backend: &dyn LlmBackend,
    prompt: &str,
    ledger: &CallLedger,
    phase: &str,
) -> Result<String, GatewayError> {
    if prompt.is_empty() {
        return Err(GatewayError::EmptyInput);
    }
    let response = backend.complete_raw(prompt)?;
    if response.is_empty() {
        return Err(GatewayError::Protocol("backend returned empty response".into()));
    }
    ledger.record_completion(phase);
    Ok(response)
}

/// Embed one text, recording the call. The returned vector always has the
/// backend's configured dimension.
pub fn embed(
    backend: &dyn LlmBackend,
    text: &str,
    ledger: &CallLedger,
) -> Result<Vec<f32>, GatewayError> {
    if text.is_empty() {
        return Err(GatewayError::EmptyInput);
    }
    let vector = backend.embed_raw(text)?;
    if vector.len() != backend.embed_dim() {
        return Err(GatewayError::Protocol(format!(
            "embedding length {} does not match configured dimension {}",
            vector.len(),
            backend.embed_dim()
        )));
    }
    ledger.record_embed();
    Ok(vector)
}
