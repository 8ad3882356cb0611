// SPDX-License-Identifier: Apache-2.0

//! Gateway construction: live provider, scripted fixture or cache only.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use atri_core::llm::{
    DiskCache, FixtureScript, FixtureTransport, HttpTransport, ModelRouter, Offline, ProviderConfig, Transport,
};
use atri_core::Gateway;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Backend {
    /// Cache hits only; misses fail.
    Offline,
    Fixture(PathBuf),
    /// `ATRI_LLM_*`, plus `ATRI_JUDGE_*` for the judge model when set.
    Live {
        judge_model: String,
    },
}

impl Backend {
    pub fn describe(&self) -> String {
        match self {
            Backend::Offline => "offline".into(),
            Backend::Fixture(p) => format!("fixture:{}", p.display()),
            Backend::Live { .. } => "live".into(),
        }
    }

    pub fn transport(&self) -> CliResult<Arc<dyn Transport>> {
        Ok(match self {
            Backend::Offline => Arc::new(Offline),
            Backend::Fixture(path) => {
                let script =
                    FixtureScript::load(path).map_err(|e| CliError::config(format!("fixture {}: {e}", path.display())))?;
                Arc::new(FixtureTransport::new(script))
            }
            Backend::Live { judge_model } => {
                let main: Arc<dyn Transport> = Arc::new(HttpTransport::new(ProviderConfig::from_env("ATRI_LLM")?)?);
                if std::env::var_os("ATRI_JUDGE_API_KEY").is_some() {
                    let judge = Arc::new(HttpTransport::new(ProviderConfig::from_env("ATRI_JUDGE")?)?);
                    Arc::new(ModelRouter::new(main).route(judge_model.clone(), judge))
                } else {
                    main
                }
            }
        })
    }

    /// A gateway over this backend with the on-disk response cache.
    pub fn gateway(&self, cache_dir: &Path) -> CliResult<Gateway> {
        Ok(Gateway::with_cache(self.transport()?, Arc::new(DiskCache::new(cache_dir))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Category;
    use atri_core::LlmRequest;

    #[test]
    fn offline_misses_are_provider_errors() {
        let dir = tempfile::tempdir().unwrap();
        let gw = Backend::Offline.gateway(dir.path()).unwrap();
        let err: CliError = gw.complete(&LlmRequest::new("m", "p", 0.0, 0)).unwrap_err().into();
        assert_eq!(err.category, Category::Provider);
    }

    #[test]
    fn missing_fixture_is_a_config_error() {
        let err = Backend::Fixture("/nonexistent/fixture.json".into()).transport().err().unwrap();
        assert_eq!(err.category, Category::Config);
    }
}
