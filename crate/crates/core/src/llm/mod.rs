// SPDX-License-Identifier: Apache-2.0

//! Model gateway: every model call goes through [`Gateway::complete`], which
//! adds response caching, retries and a call log on top of a [`Transport`].

mod cache;
mod fixture;
pub mod markers;
mod template;
mod transport;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use cache::{CacheEntry, DiskCache, MemoryCache, ResponseCache};
pub use fixture::{prompt_digest, FixtureRule, FixtureScript, FixtureTransport};
pub use template::{slot, Language, PromptSet, PromptTemplate, RenderMode, TemplateError, TemplateId};
pub use transport::{HttpTransport, ModelRouter, Offline, ProviderConfig, Transport, TransportError, TransportReply};

/// Default completion budget. The reference setup does not state one.
pub const DEFAULT_MAX_TOKENS: u32 = 2048;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmRequest {
    pub model_id: String,
    pub prompt: String,
    pub temperature: f64,
    /// Distinguishes repeated samples of the same prompt.
    pub rep_index: u32,
    pub max_tokens: u32,
    /// Caller label for the call log (template id). Not part of the cache key.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub purpose: Option<String>,
}

#[derive(Serialize)]
struct CacheKey<'a> {
    model_id: &'a str,
    prompt: &'a str,
    temperature: f64,
    rep_index: u32,
    max_tokens: u32,
}

impl LlmRequest {
    pub fn new(model_id: impl Into<String>, prompt: impl Into<String>, temperature: f64, rep_index: u32) -> Self {
        LlmRequest {
            model_id: model_id.into(),
            prompt: prompt.into(),
            temperature,
            rep_index,
            max_tokens: DEFAULT_MAX_TOKENS,
            purpose: None,
        }
    }

    pub fn with_purpose(mut self, purpose: impl Into<String>) -> Self {
        self.purpose = Some(purpose.into());
        self
    }

    pub fn with_max_tokens(mut self, max_tokens: u32) -> Self {
        self.max_tokens = max_tokens;
        self
    }

    /// Cache key: SHA-256 over (model_id, prompt, temperature, rep_index, max_tokens).
    pub fn digest(&self) -> String {
        let key = CacheKey {
            model_id: &self.model_id,
            prompt: &self.prompt,
            temperature: self.temperature,
            rep_index: self.rep_index,
            max_tokens: self.max_tokens,
        };
        let bytes = serde_json::to_vec(&key).expect("cache key serializes");
        hex::encode(Sha256::digest(bytes))
    }

    fn validate(&self) -> Result<(), LlmError> {
        if self.prompt.is_empty() {
            return Err(LlmError::InvalidRequest("empty prompt".into()));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(LlmError::InvalidRequest(format!("temperature {} outside [0, 2]", self.temperature)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmResponse {
    pub text: String,
    pub cached: bool,
    pub latency_ms: u64,
    pub provider_meta: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LlmError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("provider error after {attempts} attempt(s): {message}")]
    Provider { attempts: u32, message: String },
    #[error("authentication failure: {0}")]
    Auth(String),
}

#[derive(Debug, Clone)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_retries: 4, base_delay: Duration::from_millis(500), max_delay: Duration::from_secs(30) }
    }
}

impl RetryPolicy {
    pub fn delay(&self, retry: u32) -> Duration {
        let factor = 1u32.checked_shl(retry).unwrap_or(u32::MAX);
        self.base_delay.saturating_mul(factor).min(self.max_delay)
    }
}

/// One entry in the gateway's call log; cache hits are logged too.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CallRecord {
    pub digest: String,
    pub model_id: String,
    pub temperature: f64,
    pub rep_index: u32,
    pub purpose: Option<String>,
    pub cached: bool,
    pub ok: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GatewayStats {
    pub requests: u64,
    pub cache_hits: u64,
    pub cache_misses: u64,
    /// Transport invocations, retries included.
    pub transport_calls: u64,
}

pub struct Gateway {
    transport: Arc<dyn Transport>,
    cache: Arc<dyn ResponseCache>,
    retry: RetryPolicy,
    key_locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
    log: Mutex<Vec<CallRecord>>,
    requests: AtomicU64,
    hits: AtomicU64,
    misses: AtomicU64,
    transport_calls: AtomicU64,
}

impl std::fmt::Debug for Gateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gateway").field("transport", &self.transport.name()).field("stats", &self.stats()).finish()
    }
}

impl Gateway {
    /// Gateway with an in-memory cache and default retries.
    pub fn new(transport: Arc<dyn Transport>) -> Gateway {
        Gateway::with_cache(transport, Arc::new(MemoryCache::default()))
    }

    pub fn with_cache(transport: Arc<dyn Transport>, cache: Arc<dyn ResponseCache>) -> Gateway {
        Gateway {
            transport,
            cache,
            retry: RetryPolicy::default(),
            key_locks: Mutex::new(HashMap::new()),
            log: Mutex::new(Vec::new()),
            requests: AtomicU64::new(0),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
            transport_calls: AtomicU64::new(0),
        }
    }

    pub fn fixture(script: FixtureScript) -> Gateway {
        Gateway::new(Arc::new(FixtureTransport::new(script)))
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Gateway {
        self.retry = retry;
        self
    }

    pub fn transport_name(&self) -> &str {
        self.transport.name()
    }

    /// Serves from cache when possible, otherwise calls the transport with
    /// retries on transient failures and stores the reply. Concurrent
    /// callers with the same request are serialized so only the first one
    /// reaches the transport.
    pub fn complete(&self, request: &LlmRequest) -> Result<LlmResponse, LlmError> {
        request.validate()?;
        self.requests.fetch_add(1, Ordering::SeqCst);
        let digest = request.digest();
        let lock = {
            let mut locks = self.key_locks.lock().expect("key locks poisoned");
            locks.entry(digest.clone()).or_default().clone()
        };
        let _guard = lock.lock().expect("key lock poisoned");

        let started = Instant::now();
        if let Some(entry) = self.cache.get(&digest) {
            self.hits.fetch_add(1, Ordering::SeqCst);
            self.record(request, &digest, true, true);
            return Ok(LlmResponse {
                text: entry.text,
                cached: true,
                latency_ms: started.elapsed().as_millis() as u64,
                provider_meta: entry.provider_meta,
            });
        }
        self.misses.fetch_add(1, Ordering::SeqCst);

        let mut attempt = 0;
        let reply = loop {
            attempt += 1;
            self.transport_calls.fetch_add(1, Ordering::SeqCst);
            match self.transport.send(request) {
                Ok(reply) => break reply,
                Err(TransportError::Transient(msg)) if attempt <= self.retry.max_retries => {
                    let wait = self.retry.delay(attempt - 1);
                    log::debug!("transient failure ({msg}); retry {attempt} in {wait:?}");
                    std::thread::sleep(wait);
                }
                Err(err) => {
                    self.record(request, &digest, false, false);
                    return Err(match err {
                        TransportError::Auth(m) => LlmError::Auth(m),
                        TransportError::Transient(m) | TransportError::Fatal(m) => {
                            LlmError::Provider { attempts: attempt, message: m }
                        }
                    });
                }
            }
        };

        let entry = CacheEntry { request: request.clone(), text: reply.text, provider_meta: reply.meta };
        if let Err(e) = self.cache.put(&digest, &entry) {
            log::warn!("cache write failed for {digest}: {e}");
        }
        self.record(request, &digest, false, true);
        Ok(LlmResponse {
            text: entry.text,
            cached: false,
            latency_ms: started.elapsed().as_millis() as u64,
            provider_meta: entry.provider_meta,
        })
    }

    /// Completes all requests with at most `parallelism` in flight. Results
    /// are aligned with the input order.
    pub fn complete_batch(&self, requests: &[LlmRequest], parallelism: usize) -> Vec<Result<LlmResponse, LlmError>> {
        crate::par::par_map(requests, parallelism, |_, r| self.complete(r))
    }

    fn record(&self, request: &LlmRequest, digest: &str, cached: bool, ok: bool) {
        self.log.lock().expect("call log poisoned").push(CallRecord {
            digest: digest.to_owned(),
            model_id: request.model_id.clone(),
            temperature: request.temperature,
            rep_index: request.rep_index,
            purpose: request.purpose.clone(),
            cached,
            ok,
        });
    }

    pub fn call_log(&self) -> Vec<CallRecord> {
        self.log.lock().expect("call log poisoned").clone()
    }

    pub fn stats(&self) -> GatewayStats {
        GatewayStats {
            requests: self.requests.load(Ordering::SeqCst),
            cache_hits: self.hits.load(Ordering::SeqCst),
            cache_misses: self.misses.load(Ordering::SeqCst),
            transport_calls: self.transport_calls.load(Ordering::SeqCst),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::AtomicUsize;

    struct Flaky {
        failures_left: AtomicUsize,
        kind: TransportError,
    }

    impl Transport for Flaky {
        fn send(&self, _: &LlmRequest) -> Result<TransportReply, TransportError> {
            if self.failures_left.load(Ordering::SeqCst) > 0 {
                self.failures_left.fetch_sub(1, Ordering::SeqCst);
                return Err(self.kind.clone());
            }
            Ok(TransportReply { text: "ok".into(), meta: serde_json::Value::Null })
        }

        fn name(&self) -> &str {
            "flaky"
        }
    }

    fn fast_retry(max_retries: u32) -> RetryPolicy {
        RetryPolicy { max_retries, base_delay: Duration::from_millis(1), max_delay: Duration::from_millis(2) }
    }

    #[test]
    fn second_identical_request_is_cached() {
        let gw = Gateway::fixture(FixtureScript { default_reply: Some("答复[[是]]".into()), ..Default::default() });
        let req = LlmRequest::new("m", "prompt", 0.0, 0);
        let a = gw.complete(&req).unwrap();
        let b = gw.complete(&req).unwrap();
        assert!(!a.cached);
        assert!(b.cached);
        assert_eq!(a.text, b.text);
        assert_eq!(gw.stats().transport_calls, 1);
        assert_eq!(gw.stats().cache_hits, 1);
    }

    #[test]
    fn rep_index_is_part_of_the_key() {
        let a = LlmRequest::new("m", "p", 0.0, 0);
        let b = LlmRequest::new("m", "p", 0.0, 1);
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest(), a.clone().with_purpose("x").digest());
        assert_ne!(a.digest(), a.clone().with_max_tokens(7).digest());
    }

    #[test]
    fn transient_failures_are_retried() {
        let t = Arc::new(Flaky { failures_left: AtomicUsize::new(2), kind: TransportError::Transient("503".into()) });
        let gw = Gateway::new(t).with_retry(fast_retry(3));
        assert_eq!(gw.complete(&LlmRequest::new("m", "p", 0.0, 0)).unwrap().text, "ok");
        assert_eq!(gw.stats().transport_calls, 3);
    }

    #[test]
    fn retries_exhausted() {
        let t = Arc::new(Flaky { failures_left: AtomicUsize::new(10), kind: TransportError::Transient("503".into()) });
        let gw = Gateway::new(t).with_retry(fast_retry(2));
        let err = gw.complete(&LlmRequest::new("m", "p", 0.0, 0)).unwrap_err();
        assert_eq!(err, LlmError::Provider { attempts: 3, message: "503".into() });
    }

    #[test]
    fn auth_is_not_retried() {
        let t = Arc::new(Flaky { failures_left: AtomicUsize::new(10), kind: TransportError::Auth("401".into()) });
        let gw = Gateway::new(t).with_retry(fast_retry(5));
        assert!(matches!(gw.complete(&LlmRequest::new("m", "p", 0.0, 0)), Err(LlmError::Auth(_))));
        assert_eq!(gw.stats().transport_calls, 1);
    }

    #[test]
    fn invalid_requests() {
        let gw = Gateway::new(Arc::new(Offline));
        assert!(matches!(gw.complete(&LlmRequest::new("m", "", 0.0, 0)), Err(LlmError::InvalidRequest(_))));
        assert!(matches!(gw.complete(&LlmRequest::new("m", "p", 2.5, 0)), Err(LlmError::InvalidRequest(_))));
    }

    #[test]
    fn offline_fails_on_miss() {
        let gw = Gateway::new(Arc::new(Offline));
        assert!(matches!(gw.complete(&LlmRequest::new("m", "p", 0.0, 0)), Err(LlmError::Provider { .. })));
    }

    #[test]
    fn missing_credentials() {
        std::env::remove_var("ATRI_TEST_NOKEY_API_KEY");
        assert!(matches!(ProviderConfig::from_env("ATRI_TEST_NOKEY"), Err(TransportError::Auth(_))));
    }

    #[test]
    fn empty_batch() {
        let gw = Gateway::new(Arc::new(Offline));
        assert!(gw.complete_batch(&[], 4).is_empty());
    }

    #[test]
    fn backoff_grows_and_caps() {
        let p = RetryPolicy { max_retries: 9, base_delay: Duration::from_millis(100), max_delay: Duration::from_secs(1) };
        assert_eq!(p.delay(0), Duration::from_millis(100));
        assert_eq!(p.delay(2), Duration::from_millis(400));
        assert_eq!(p.delay(8), Duration::from_secs(1));
        assert_eq!(p.delay(40), Duration::from_secs(1));
    }
}
