// SPDX-License-Identifier: Apache-2.0

//! Scripted transport for offline runs and tests.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use super::transport::{Transport, TransportError, TransportReply};
use super::LlmRequest;

/// SHA-256 of the prompt text; the key for exact scripted replies.
pub fn prompt_digest(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

/// "If the prompt contains every string in `when_all` (and the optional
/// model / repetition filters match), reply `reply`."
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureRule {
    pub when_all: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rep_index: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_id: Option<String>,
    pub reply: String,
}

impl FixtureRule {
    pub fn new<S: Into<String>>(when_all: impl IntoIterator<Item = S>, reply: impl Into<String>) -> FixtureRule {
        FixtureRule {
            when_all: when_all.into_iter().map(Into::into).collect(),
            rep_index: None,
            model_id: None,
            reply: reply.into(),
        }
    }

    pub fn on_rep(mut self, rep_index: u32) -> FixtureRule {
        self.rep_index = Some(rep_index);
        self
    }

    fn matches(&self, request: &LlmRequest) -> bool {
        self.rep_index.is_none_or(|r| r == request.rep_index)
            && self.model_id.as_deref().is_none_or(|m| m == request.model_id)
            && self.when_all.iter().all(|s| request.prompt.contains(s.as_str()))
    }
}

/// Exact prompt-digest replies take precedence over rules; rules are tried
/// in order; the default reply (if any) catches the rest.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureScript {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub by_digest: BTreeMap<String, String>,
    #[serde(default)]
    pub rules: Vec<FixtureRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_reply: Option<String>,
}

impl FixtureScript {
    pub fn load(path: &Path) -> std::io::Result<FixtureScript> {
        crate::io::read_json(path)
    }

    pub fn reply_for(&self, request: &LlmRequest) -> Option<&str> {
        if let Some(r) = self.by_digest.get(&prompt_digest(&request.prompt)) {
            return Some(r);
        }
        self.rules.iter().find(|rule| rule.matches(request)).map(|rule| rule.reply.as_str()).or(self.default_reply.as_deref())
    }

    pub fn push(&mut self, rule: FixtureRule) -> &mut Self {
        self.rules.push(rule);
        self
    }
}

/// Transport that answers from a [`FixtureScript`] and counts calls.
#[derive(Debug, Default)]
pub struct FixtureTransport {
    script: FixtureScript,
    calls: AtomicU64,
}

impl FixtureTransport {
    pub fn new(script: FixtureScript) -> FixtureTransport {
        FixtureTransport { script, calls: AtomicU64::new(0) }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }
}

impl Transport for FixtureTransport {
    fn send(&self, request: &LlmRequest) -> Result<TransportReply, TransportError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        match self.script.reply_for(request) {
            Some(text) => Ok(TransportReply { text: text.to_owned(), meta: json!({"backend": "fixture"}) }),
            None => Err(TransportError::Fatal(format!(
                "fixture: no scripted reply for prompt {}",
                &prompt_digest(&request.prompt)[..12]
            ))),
        }
    }

    fn name(&self) -> &str {
        "fixture"
    }
}
