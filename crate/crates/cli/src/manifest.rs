// SPDX-License-Identifier: Apache-2.0

//! Run manifests: what a command read, how it was configured and what it
//! wrote. The digest covers only inputs that determine outputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use atri_core::llm::{GatewayStats, PromptSet};
use atri_core::{Corpus, Gateway};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRef {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub manifest_digest: String,
    pub command: String,
    pub tool_version: String,
    pub argv: Vec<String>,
    pub config_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_digest: Option<String>,
    /// Role → SHA-256 of the input file bytes.
    pub inputs: BTreeMap<String, String>,
    pub prompt_digests: BTreeMap<String, String>,
    pub seeds: BTreeMap<String, u64>,
    pub model_ids: BTreeMap<String, String>,
    pub params: BTreeMap<String, Value>,
    pub backend: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gateway: Option<GatewayStats>,
    /// Gateway requests per prompt purpose, cache hits included.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub calls_by_purpose: BTreeMap<String, u64>,
    /// Counts and other results worth auditing.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub summary: BTreeMap<String, Value>,
    pub outputs: BTreeMap<String, OutputRef>,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
}

#[derive(Serialize)]
struct DigestView<'a> {
    command: &'a str,
    tool_version: &'a str,
    config_digest: &'a str,
    corpus_digest: &'a Option<String>,
    inputs: &'a BTreeMap<String, String>,
    prompt_digests: &'a BTreeMap<String, String>,
    seeds: &'a BTreeMap<String, u64>,
    model_ids: &'a BTreeMap<String, String>,
    params: &'a BTreeMap<String, Value>,
}

impl RunManifest {
    pub fn new(command: &str, argv: Vec<String>, config_digest: String) -> Self {
        RunManifest {
            manifest_digest: String::new(),
            command: command.to_owned(),
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            argv,
            config_digest,
            corpus_digest: None,
            inputs: BTreeMap::new(),
            prompt_digests: BTreeMap::new(),
            seeds: BTreeMap::new(),
            model_ids: BTreeMap::new(),
            params: BTreeMap::new(),
            backend: "none".into(),
            gateway: None,
            calls_by_purpose: BTreeMap::new(),
            summary: BTreeMap::new(),
            outputs: BTreeMap::new(),
            started_unix_ms: now_ms(),
            finished_unix_ms: 0,
        }
    }

    /// Records the SHA-256 of an input file under `role`.
    pub fn input(&mut self, role: &str, path: &Path) -> CliResult<()> {
        let bytes = std::fs::read(path).map_err(|e| crate::error::CliError::runtime(format!("{}: {e}", path.display())))?;
        self.inputs.insert(role.to_owned(), sha256_hex(&bytes));
        Ok(())
    }

    pub fn corpus(&mut self, corpus: &Corpus) {
        self.corpus_digest = Some(corpus.digest());
    }

    pub fn prompts(&mut self, prompts: &PromptSet) {
        self.prompt_digests = prompts.digests();
    }

    pub fn seed(&mut self, name: &str, seed: u64) {
        self.seeds.insert(name.to_owned(), seed);
    }

    pub fn model(&mut self, role: &str, model_id: &str) {
        self.model_ids.insert(role.to_owned(), model_id.to_owned());
    }

    pub fn param(&mut self, name: &str, value: impl Serialize) {
        self.params.insert(name.to_owned(), serde_json::to_value(value).expect("parameter serializes"));
    }

    pub fn summarize(&mut self, name: &str, value: impl Serialize) {
        self.summary.insert(name.to_owned(), serde_json::to_value(value).expect("summary serializes"));
    }

    /// SHA-256 over the deterministic fields. Stable across reruns with the
    /// same inputs regardless of paths, timestamps and cache state.
    pub fn digest(&self) -> String {
        let view = DigestView {
            command: &self.command,
            tool_version: &self.tool_version,
            config_digest: &self.config_digest,
            corpus_digest: &self.corpus_digest,
            inputs: &self.inputs,
            prompt_digests: &self.prompt_digests,
            seeds: &self.seeds,
            model_ids: &self.model_ids,
            params: &self.params,
        };
        sha256_hex(&serde_json::to_vec(&view).expect("manifest serializes"))
    }

    /// Fills in gateway counters, output hashes and the finish time, then
    /// writes the manifest next to `primary` as `<primary>.manifest.json`.
    pub fn finish(mut self, gateway: Option<&Gateway>, outputs: &[(&str, &Path)], primary: &Path) -> CliResult<PathBuf> {
        self.manifest_digest = self.digest();
        if let Some(gw) = gateway {
            self.gateway = Some(gw.stats());
            for record in gw.call_log() {
                *self.calls_by_purpose.entry(record.purpose.unwrap_or_else(|| "unspecified".into())).or_default() += 1;
            }
        }
        for (role, path) in outputs {
            let bytes = std::fs::read(path)?;
            self.outputs.insert((*role).to_owned(), OutputRef { path: path.to_path_buf(), sha256: sha256_hex(&bytes) });
        }
        self.finished_unix_ms = now_ms();
        let path = manifest_path(primary);
        atri_core::io::write_json(&path, &self)?;
        Ok(path)
    }
}

pub fn manifest_path(primary: &Path) -> PathBuf {
    let mut name = primary.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    primary.with_file_name(name)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}
