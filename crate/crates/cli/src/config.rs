// SPDX-License-Identifier: Apache-2.0

//! Declarative run configuration (TOML). Command-line flags override it.

use std::path::{Path, PathBuf};

use atri_core::bench::BenchConfig;
use atri_core::filter::AnnotatorConfig;
use atri_core::interpret::{CaseSource, GenerationConfig, NReasons};
use atri_core::llm::Language;
use atri_core::Method;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub language: Language,
    pub parallelism: usize,
    pub cache_dir: PathBuf,
    /// Directory of `<template_id>.<lang>.txt` prompt overrides.
    pub prompts_dir: Option<PathBuf>,
    /// Default corpus file for commands that take `--corpus`.
    pub corpus: Option<PathBuf>,
    /// Default concept file for commands that take `--concepts`.
    pub concepts: Option<PathBuf>,
    pub models: Models,
    pub filter: FilterSettings,
    pub generation: GenerationSettings,
    pub bench: BenchSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Models {
    pub annotator: String,
    pub generator: String,
    pub predictor: String,
    pub judge: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterSettings {
    pub strict: bool,
    pub temperature: f64,
    pub max_tokens: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationSettings {
    pub n_reasons: NReasons,
    pub case_source: CaseSource,
    pub temperature: f64,
    pub max_retries: u32,
    pub max_tokens: u32,
    pub min_cases: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSettings {
    pub methods: Vec<Method>,
    pub n_reps: u32,
    pub temperature: f64,
    pub max_tokens: u32,
    pub judge: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            language: Language::Zh,
            parallelism: 8,
            cache_dir: PathBuf::from(".atri-cache"),
            prompts_dir: None,
            corpus: None,
            concepts: None,
            models: Models::default(),
            filter: FilterSettings::default(),
            generation: GenerationSettings::default(),
            bench: BenchSettings::default(),
        }
    }
}

impl Default for Models {
    fn default() -> Self {
        Models {
            annotator: AnnotatorConfig::default().model_id,
            generator: GenerationConfig::default().model_id,
            predictor: BenchConfig::default().model_id,
            judge: BenchConfig::default().judge_model_id,
        }
    }
}

impl Default for FilterSettings {
    fn default() -> Self {
        let a = AnnotatorConfig::default();
        FilterSettings { strict: a.strict, temperature: a.temperature, max_tokens: a.max_tokens }
    }
}

impl Default for GenerationSettings {
    fn default() -> Self {
        let g = GenerationConfig::default();
        GenerationSettings {
            n_reasons: g.n_reasons,
            case_source: g.case_source,
            temperature: g.temperature,
            max_retries: g.max_retries,
            max_tokens: g.max_tokens,
            min_cases: g.min_cases,
        }
    }
}

impl Default for BenchSettings {
    fn default() -> Self {
        let b = BenchConfig::default();
        BenchSettings {
            methods: b.methods,
            n_reps: b.n_reps,
            temperature: b.temperature,
            max_tokens: b.max_tokens,
            judge: b.judge,
        }
    }
}

#[derive(Serialize)]
struct Semantic<'a> {
    language: Language,
    models: &'a Models,
    filter: &'a FilterSettings,
    generation: &'a GenerationSettings,
    bench: &'a BenchSettings,
}

impl Config {
    /// Reads a TOML file; `None` yields the defaults.
    pub fn load(path: Option<&Path>) -> CliResult<Config> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Config::parse(&text).map_err(|e| e.context(path.display()))
    }

    pub fn parse(text: &str) -> CliResult<Config> {
        let config: Config = toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        if config.parallelism == 0 {
            return Err(CliError::config("parallelism must be at least 1"));
        }
        if config.bench.n_reps == 0 {
            return Err(CliError::config("bench.n_reps must be at least 1"));
        }
        Ok(config)
    }

    /// SHA-256 over the settings that can change outputs. Paths and
    /// parallelism are excluded.
    pub fn digest(&self) -> String {
        let semantic = Semantic {
            language: self.language,
            models: &self.models,
            filter: &self.filter,
            generation: &self.generation,
            bench: &self.bench,
        };
        let bytes = serde_json::to_vec(&semantic).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use atri_core::InterpretationSource;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(Config::parse("").unwrap(), Config::default());
    }

    #[test]
    fn documented_schema_parses() {
        let text = r#"
language = "en"
parallelism = 4
cache_dir = "cache"
concepts = "concepts.json"

[models]
predictor = "qwen2.5-14b-instruct"

[generation]
n_reasons = 20
case_source = "court_view"

[bench]
methods = ["random", "zero_shot", "atri", "judicial"]
n_reps = 5
"#;
        let c = Config::parse(text).unwrap();
        assert_eq!(c.language, Language::En);
        assert_eq!(c.parallelism, 4);
        assert_eq!(c.models.predictor, "qwen2.5-14b-instruct");
        assert_eq!(c.models.judge, "gpt-4o-2024-08-06");
        assert_eq!(c.generation.n_reasons, NReasons::Count(20));
        assert_eq!(c.generation.case_source, CaseSource::CourtView);
        assert_eq!(c.bench.n_reps, 5);
        assert_eq!(c.bench.methods[3], Method::WithInterpretation(InterpretationSource::Judicial));
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        let e = Config::parse("paralellism = 3").unwrap_err();
        assert_eq!(e.category, crate::error::Category::Config);
        let e = Config::parse("[bench]\nn_reps = 0").unwrap_err();
        assert!(e.message.contains("n_reps"));
    }

    #[test]
    fn digest_ignores_paths_and_parallelism() {
        let a = Config::default();
        let b = Config { cache_dir: "elsewhere".into(), parallelism: 1, ..Config::default() };
        assert_eq!(a.digest(), b.digest());
        let mut c = Config::default();
        c.models.judge = "other".into();
        assert_ne!(a.digest(), c.digest());
    }
}
