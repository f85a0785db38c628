//! Live HTTP backend speaking the common JSON chat-completion protocol.
//!
//! Requests carry `{model, messages, temperature}` and the response text is
//! read from the first choice's message content; embeddings use
//! `{model, input}` with a float-array response. The API key is read from an
//! environment variable named in the descriptor and sent as a bearer token
//! when present.

use super::{BackendDescriptor, GatewayError, LlmBackend};
use rand::Rng;
use serde::Deserialize;
use serde_json::json;
use std::time::Duration;

/// Base delay for exponential backoff between retry attempts.
const BACKOFF_BASE_MS: u64 = 200;
/// Upper bound on the random jitter added to each backoff delay.
const BACKOFF_JITTER_MS: u64 = 100;

pub struct HttpBackend {
    descriptor: BackendDescriptor,
    client: reqwest::blocking::Client,
    api_key: Option<String>,
}

impl HttpBackend {
    pub fn new(descriptor: BackendDescriptor) -> Result<Self, GatewayError> {
        descriptor.validate()?;
        if descriptor.endpoint.is_empty() {
            return Err(GatewayError::InvalidDescriptor(
                "endpoint must be non-empty for live mode".into(),
            ));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(descriptor.timeout_secs))
            .build()
            .map_err(|e| GatewayError::BackendUnavailable {
                detail: e.to_string(),
            })?;
        let api_key = std::env::var(&descriptor.api_key_env).ok().filter(|k| !k.is_empty());
        Ok(Self {
            descriptor,
            client,
            api_key,
        })
    }

    fn post_with_retries(
        &self,
        url: &str,
        body: serde_json::Value,
    ) -> Result<serde_json::Value, GatewayError> {
        with_retries(self.descriptor.max_retries, BACKOFF_BASE_MS, || {
            self.post_once(url, &body)
        })
    }

    fn post_once(&self, url: &str, body: &serde_json::Value) -> Result<serde_json::Value, GatewayError> {
        let mut request = self.client.post(url).json(body);
        if let Some(key) = &self.api_key {
            request = request.bearer_auth(key);
        }
        let response = request.send().map_err(|e| GatewayError::BackendUnavailable {
            detail: e.to_string(),
        })?;
        let status = response.status();
        if status.is_server_error() {
            return Err(GatewayError::BackendUnavailable {
                detail: format!("server returned {status}"),
            });
        }
        if !status.is_success() {
            return Err(GatewayError::Protocol(format!("server returned {status}")));
        }
        response
            .json()
            .map_err(|e| GatewayError::Protocol(format!("invalid JSON response: {e}")))
    }
}

impl LlmBackend for HttpBackend {
    fn complete_raw(&self, prompt: &str) -> Result<String, GatewayError> {
        let url = join_url(&self.descriptor.endpoint, "chat/completions");
        let body = completion_request_body(&self.descriptor.model_id, prompt, self.descriptor.temperature);
        let value = self.post_with_retries(&url, body)?;
        parse_completion_response(&value)
    }

    fn embed_raw(&self, text: &str) -> Result<Vec<f32>, GatewayError> {
        let url = join_url(&self.descriptor.endpoint, "embeddings");
        let body = embedding_request_body(&self.descriptor.embed_model_id(), text);
        let value = self.post_with_retries(&url, body)?;
        parse_embedding_response(&value)
    }

    fn embed_dim(&self) -> usize {
        self.descriptor.embed_dim
    }
}

/// Exponential backoff with jitter around a fallible attempt. Only
/// transport and 5xx-class failures retry; content errors surface to the
/// caller immediately, so a call that eventually succeeds still counts as
/// one semantic call.
pub(crate) fn with_retries<T>(
    max_retries: u32,
    base_delay_ms: u64,
    mut attempt_fn: impl FnMut() -> Result<T, GatewayError>,
) -> Result<T, GatewayError> {
    let mut attempt = 0u32;
    loop {
        match attempt_fn() {
            Ok(value) => return Ok(value),
            Err(err) if err.is_retryable() && attempt < max_retries => {
                let delay = base_delay_ms << attempt;
                let jitter = rand::thread_rng().gen_range(0..=BACKOFF_JITTER_MS.min(base_delay_ms));
                std::thread::sleep(Duration::from_millis(delay + jitter));
                attempt += 1;
            }
            Err(err) => return Err(err),
        }
    }
}

fn join_url(endpoint: &str, path: &str) -> String {
    format!("{}/{}", endpoint.trim_end_matches('/'), path)
}

pub(crate) fn completion_request_body(model: &str, prompt: &str, temperature: f64) -> serde_json::Value {
    json!({
        "model": model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": temperature,
    })
}

pub(crate) fn embedding_request_body(model: &str, input: &str) -> serde_json::Value {
    json!({ "model": model, "input": input })
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: String,
}

pub(crate) fn parse_completion_response(value: &serde_json::Value) -> Result<String, GatewayError> {
    let parsed: ChatResponse = serde_json::from_value(value.clone())
        .map_err(|e| GatewayError::Protocol(format!("unexpected completion shape: {e}")))?;
    parsed
        .choices
        .into_iter()
        .next()
        .map(|c| c.message.content)
        .ok_or_else(|| GatewayError::Protocol("completion response had no choices".into()))
}

#[derive(Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingItem>,
}

#[derive(Deserialize)]
struct EmbeddingItem {
    embedding: Vec<f32>,
}

pub(crate) fn parse_embedding_response(value: &serde_json::Value) -> Result<Vec<f32>, GatewayError> {
    let parsed: EmbeddingResponse = serde_json::from_value(value.clone())
        .map_err(|e| GatewayError::Protocol(format!("unexpected embedding shape: {e}")))?;
    parsed
        .data
        .into_iter()
        .next()
        .map(|d| d.embedding)
        .ok_or_else(|| GatewayError::Protocol("embedding response had no data".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn completion_body_carries_model_messages_temperature() {
        let body = completion_request_body("test-model", "hello", 0.0);
        assert_eq!(body["model"], "test-model");
        assert_eq!(body["messages"][0]["role"], "user");
        assert_eq!(body["messages"][0]["content"], "hello");
        assert_eq!(body["temperature"], 0.0);
    }

    #[test]
    fn completion_response_reads_first_choice() {
        let value = json!({
            "choices": [
                {"message": {"role": "assistant", "content": "first"}},
                {"message": {"role": "assistant", "content": "second"}}
            ]
        });
        assert_eq!(parse_completion_response(&value).unwrap(), "first");
    }

    #[test]
    fn empty_choices_is_a_protocol_error() {
        let value = json!({"choices": []});
        assert!(matches!(
            parse_completion_response(&value),
            Err(GatewayError::Protocol(_))
        ));
    }

    #[test]
    fn embedding_response_reads_float_array() {
        let value = json!({"data": [{"embedding": [0.25, -0.5]}]});
        assert_eq!(parse_embedding_response(&value).unwrap(), vec![0.25, -0.5]);
    }

    #[test]
    fn url_join_handles_trailing_slash() {
        assert_eq!(join_url("http://host/v1/", "embeddings"), "http://host/v1/embeddings");
        assert_eq!(join_url("http://host/v1", "embeddings"), "http://host/v1/embeddings");
    }

    #[test]
    fn transport_failures_retry_until_success() {
        let mut attempts = 0;
        let result = with_retries(3, 1, || {
            attempts += 1;
            if attempts < 3 {
                Err(GatewayError::BackendUnavailable {
                    detail: "connection refused".into(),
                })
            } else {
                Ok("response")
            }
        });
        assert_eq!(result.unwrap(), "response");
        assert_eq!(attempts, 3);
    }

    #[test]
    fn retries_stop_at_the_configured_limit() {
        let mut attempts = 0;
        let result: Result<(), _> = with_retries(2, 1, || {
            attempts += 1;
            Err(GatewayError::BackendUnavailable { detail: "down".into() })
        });
        assert!(matches!(result, Err(GatewayError::BackendUnavailable { .. })));
        assert_eq!(attempts, 3);
    }

    #[test]
    fn content_errors_never_retry() {
        let mut attempts = 0;
        let result: Result<(), _> = with_retries(5, 1, || {
            attempts += 1;
            Err(GatewayError::Protocol("bad shape".into()))
        });
        assert!(matches!(result, Err(GatewayError::Protocol(_))));
        assert_eq!(attempts, 1);
    }
}
