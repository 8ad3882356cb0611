// SPDX-License-Identifier: Apache-2.0

//! Provider transports.

use std::sync::Arc;
use std::time::Duration;

use serde_json::{json, Value};

use super::LlmRequest;

#[derive(Debug, Clone)]
pub struct TransportReply {
    pub text: String,
    pub meta: Value,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransportError {
    /// Worth retrying: timeouts, connection resets, 429 and 5xx.
    #[error("transient: {0}")]
    Transient(String),
    #[error("{0}")]
    Fatal(String),
    #[error("authentication: {0}")]
    Auth(String),
}

pub trait Transport: Send + Sync {
    fn send(&self, request: &LlmRequest) -> Result<TransportReply, TransportError>;

    fn name(&self) -> &str;
}

/// Refuses every call. Used for cache-only runs.
#[derive(Debug, Default)]
pub struct Offline;

impl Transport for Offline {
    fn send(&self, request: &LlmRequest) -> Result<TransportReply, TransportError> {
        Err(TransportError::Fatal(format!(
            "no cached response for request {} and live calls are disabled",
            &request.digest()[..12]
        )))
    }

    fn name(&self) -> &str {
        "offline"
    }
}

/// Sends requests for particular model ids to dedicated transports.
pub struct ModelRouter {
    default: Arc<dyn Transport>,
    routes: Vec<(String, Arc<dyn Transport>)>,
    name: String,
}

impl ModelRouter {
    pub fn new(default: Arc<dyn Transport>) -> ModelRouter {
        let name = default.name().to_owned();
        ModelRouter { default, routes: Vec::new(), name }
    }

    pub fn route(mut self, model_id: impl Into<String>, transport: Arc<dyn Transport>) -> ModelRouter {
        self.routes.push((model_id.into(), transport));
        self
    }
}

impl Transport for ModelRouter {
    fn send(&self, request: &LlmRequest) -> Result<TransportReply, TransportError> {
        self.routes.iter().find(|(m, _)| *m == request.model_id).map_or(&self.default, |(_, t)| t).send(request)
    }

    fn name(&self) -> &str {
        &self.name
    }
}

/// Endpoint settings for an OpenAI-compatible chat-completions server.
#[derive(Debug, Clone)]
pub struct ProviderConfig {
    pub base_url: String,
    pub api_key: String,
    pub model: Option<String>,
    pub timeout: Duration,
}

impl ProviderConfig {
    /// Reads `<PREFIX>_BASE_URL`, `<PREFIX>_API_KEY` and `<PREFIX>_MODEL`,
    /// e.g. with prefix `ATRI_LLM` or `ATRI_JUDGE`.
    pub fn from_env(prefix: &str) -> Result<ProviderConfig, TransportError> {
        let var = |k: &str| std::env::var(format!("{prefix}_{k}")).ok().filter(|v| !v.trim().is_empty());
        let api_key = var("API_KEY").ok_or_else(|| TransportError::Auth(format!("{prefix}_API_KEY is not set")))?;
        Ok(ProviderConfig {
            base_url: var("BASE_URL").unwrap_or_else(|| "https://api.openai.com/v1".into()),
            api_key,
            model: var("MODEL"),
            timeout: Duration::from_secs(300),
        })
    }
}

/// Single chat-completions wire adapter; model identity is configuration.
pub struct HttpTransport {
    client: reqwest::blocking::Client,
    config: ProviderConfig,
}

impl HttpTransport {
    pub fn new(config: ProviderConfig) -> Result<HttpTransport, TransportError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| TransportError::Fatal(format!("http client: {e}")))?;
        Ok(HttpTransport { client, config })
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }
}

impl Transport for HttpTransport {
    fn send(&self, request: &LlmRequest) -> Result<TransportReply, TransportError> {
        let body = json!({
            "model": request.model_id,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        });
        let resp = self
            .client
            .post(self.endpoint())
            .bearer_auth(&self.config.api_key)
            .json(&body)
            .send()
            .map_err(|e| TransportError::Transient(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| TransportError::Transient(e.to_string()))?;
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(TransportError::Auth(format!("HTTP {status}")));
        }
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(TransportError::Transient(format!("HTTP {status}")));
        }
        if !status.is_success() {
            return Err(TransportError::Fatal(format!("HTTP {status}: {}", truncate(&text, 300))));
        }
        let value: Value =
            serde_json::from_str(&text).map_err(|e| TransportError::Fatal(format!("invalid response body: {e}")))?;
        let content = value
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .ok_or_else(|| TransportError::Fatal("response has no choices[0].message.content".into()))?
            .to_owned();
        let meta = json!({
            "id": value.get("id").cloned().unwrap_or(Value::Null),
            "model": value.get("model").cloned().unwrap_or(Value::Null),
            "usage": value.get("usage").cloned().unwrap_or(Value::Null),
            "finish_reason": value.pointer("/choices/0/finish_reason").cloned().unwrap_or(Value::Null),
        });
        Ok(TransportReply { text: content, meta })
    }

    fn name(&self) -> &str {
        "http"
    }
}

fn truncate(s: &str, max: usize) -> &str {
    match s.char_indices().nth(max) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}
