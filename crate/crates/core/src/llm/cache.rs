// SPDX-License-Identifier: Apache-2.0

//! Content-addressed response cache.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::LlmRequest;

/// What the cache stores per request digest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub request: LlmRequest,
    pub text: String,
    #[serde(default)]
    pub provider_meta: serde_json::Value,
}

pub trait ResponseCache: Send + Sync {
    fn get(&self, digest: &str) -> Option<CacheEntry>;
    fn put(&self, digest: &str, entry: &CacheEntry) -> std::io::Result<()>;
}

/// `<root>/<first-2-hex>/<digest>.json`.
#[derive(Debug, Clone)]
pub struct DiskCache {
    root: PathBuf,
}

impl DiskCache {
    pub fn new(root: impl Into<PathBuf>) -> DiskCache {
        DiskCache { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path_for(&self, digest: &str) -> PathBuf {
        let prefix = digest.get(..2).unwrap_or("00");
        self.root.join(prefix).join(format!("{digest}.json"))
    }
}

impl ResponseCache for DiskCache {
    fn get(&self, digest: &str) -> Option<CacheEntry> {
        let path = self.path_for(digest);
        let bytes = std::fs::read(&path).ok()?;
        match serde_json::from_slice(&bytes) {
            Ok(entry) => Some(entry),
            Err(e) => {
                log::warn!("ignoring unreadable cache entry {}: {e}", path.display());
                None
            }
        }
    }

    fn put(&self, digest: &str, entry: &CacheEntry) -> std::io::Result<()> {
        crate::io::write_json(&self.path_for(digest), entry)
    }
}

#[derive(Debug, Default)]
pub struct MemoryCache {
    entries: Mutex<HashMap<String, CacheEntry>>,
}

impl ResponseCache for MemoryCache {
    fn get(&self, digest: &str) -> Option<CacheEntry> {
        self.entries.lock().expect("cache poisoned").get(digest).cloned()
    }

    fn put(&self, digest: &str, entry: &CacheEntry) -> std::io::Result<()> {
        self.entries.lock().expect("cache poisoned").insert(digest.to_owned(), entry.clone());
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_layout() {
        let dir = tempfile::tempdir().unwrap();
        let cache = DiskCache::new(dir.path());
        let req = LlmRequest::new("m", "p", 0.0, 0);
        let digest = req.digest();
        let entry = CacheEntry { request: req, text: "hello".into(), provider_meta: serde_json::Value::Null };
        cache.put(&digest, &entry).unwrap();
        let expected = dir.path().join(&digest[..2]).join(format!("{digest}.json"));
        assert!(expected.exists());
        assert_eq!(cache.get(&digest).unwrap(), entry);
        assert!(cache.get("ffff").is_none());
    }
}
