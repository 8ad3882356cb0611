// SPDX-License-Identifier: Apache-2.0

//! Prompt templates with `{{slot}}` placeholders.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    #[default]
    Zh,
    En,
}

impl Language {
    pub fn as_str(self) -> &'static str {
        match self {
            Language::Zh => "zh",
            Language::En => "en",
        }
    }
}

impl FromStr for Language {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zh" => Ok(Language::Zh),
            "en" => Ok(Language::En),
            other => Err(format!("unknown language {other:?} (expected zh or en)")),
        }
    }
}

/// The prompts the pipeline knows about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    FilterHasReason,
    ClassifyLabel,
    ExtractReason,
    GenerateInterpretation,
    ConsistencyJudge,
    EntailmentZeroShot,
    EntailmentCot,
    EntailmentWithInterpretation,
    /// Fact summarization for the fact+court-view generation variant.
    SummarizeFacts,
}

impl TemplateId {
    pub const ALL: [TemplateId; 9] = [
        TemplateId::FilterHasReason,
        TemplateId::ClassifyLabel,
        TemplateId::ExtractReason,
        TemplateId::GenerateInterpretation,
        TemplateId::ConsistencyJudge,
        TemplateId::EntailmentZeroShot,
        TemplateId::EntailmentCot,
        TemplateId::EntailmentWithInterpretation,
        TemplateId::SummarizeFacts,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TemplateId::FilterHasReason => "filter_has_reason",
            TemplateId::ClassifyLabel => "classify_label",
            TemplateId::ExtractReason => "extract_reason",
            TemplateId::GenerateInterpretation => "generate_interpretation",
            TemplateId::ConsistencyJudge => "consistency_judge",
            TemplateId::EntailmentZeroShot => "entailment_zero_shot",
            TemplateId::EntailmentCot => "entailment_cot",
            TemplateId::EntailmentWithInterpretation => "entailment_with_interpretation",
            TemplateId::SummarizeFacts => "summarize_facts",
        }
    }

    fn builtin_body(self, lang: Language) -> &'static str {
        macro_rules! asset {
            ($name:literal) => {
                match lang {
                    Language::Zh => include_str!(concat!("../../prompts/zh/", $name, ".txt")),
                    Language::En => include_str!(concat!("../../prompts/en/", $name, ".txt")),
                }
            };
        }
        match self {
            TemplateId::FilterHasReason => asset!("filter_has_reason"),
            TemplateId::ClassifyLabel => asset!("classify_label"),
            TemplateId::ExtractReason => asset!("extract_reason"),
            TemplateId::GenerateInterpretation => asset!("generate_interpretation"),
            TemplateId::ConsistencyJudge => asset!("consistency_judge"),
            TemplateId::EntailmentZeroShot => asset!("entailment_zero_shot"),
            TemplateId::EntailmentCot => asset!("entailment_cot"),
            TemplateId::EntailmentWithInterpretation => asset!("entailment_with_interpretation"),
            TemplateId::SummarizeFacts => asset!("summarize_facts"),
        }
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TemplateId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TemplateId::ALL.into_iter().find(|t| t.as_str() == s).ok_or_else(|| format!("unknown template id {s:?}"))
    }
}

/// Slot names used across the shipped templates.
pub mod slot {
    pub const ARTICLE: &str = "article";
    pub const CONCEPT: &str = "concept";
    pub const COURT_VIEW: &str = "court view";
    pub const REASONS: &str = "reasons";
    pub const EXEMPLAR: &str = "Interpretation Example";
    pub const CRIME: &str = "crime";
    pub const GENERATED_REASON: &str = "generated reason";
    pub const GOLD_REASON: &str = "gold reason";
    pub const INTERPRETATION: &str = "interpretation";
    pub const FACT: &str = "fact";
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("template {template}: unbound slot {{{{{slot}}}}}")]
    MissingSlot { template: String, slot: String },
    #[error("template {template}: binding for unknown slot {slot:?}")]
    UnknownSlot { template: String, slot: String },
    #[error("template {template}: malformed placeholder at byte {offset}")]
    Malformed { template: String, offset: usize },
    #[error("template {template}: {message}")]
    Load { template: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Literal(String),
    Slot(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum RenderMode {
    /// Bindings for slots the template does not have are an error.
    #[default]
    Strict,
    Lenient,
}

/// A parsed prompt template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub template_id: String,
    pub language: Language,
    pub body: String,
    pub required_slots: BTreeSet<String>,
    segments: Vec<Segment>,
}

impl PromptTemplate {
    pub fn parse(template_id: &str, language: Language, body: &str) -> Result<Self, TemplateError> {
        let mut segments = Vec::new();
        let mut rest = body;
        let mut offset = 0;
        while let Some(open) = rest.find("{{") {
            if open > 0 {
                segments.push(Segment::Literal(rest[..open].to_owned()));
            }
            let after = &rest[open + 2..];
            let close =
                after.find("}}").ok_or(TemplateError::Malformed { template: template_id.to_owned(), offset: offset + open })?;
            let name = &after[..close];
            if name.trim().is_empty() || name.contains('{') || name.contains('}') {
                return Err(TemplateError::Malformed { template: template_id.to_owned(), offset: offset + open });
            }
            segments.push(Segment::Slot(name.to_owned()));
            let consumed = open + 2 + close + 2;
            offset += consumed;
            rest = &rest[consumed..];
        }
        if !rest.is_empty() {
            segments.push(Segment::Literal(rest.to_owned()));
        }
        if segments.iter().any(|s| matches!(s, Segment::Literal(l) if l.contains("}}"))) {
            return Err(TemplateError::Malformed { template: template_id.to_owned(), offset: 0 });
        }
        let required_slots = segments
            .iter()
            .filter_map(|s| match s {
                Segment::Slot(n) => Some(n.clone()),
                Segment::Literal(_) => None,
            })
            .collect();
        Ok(PromptTemplate { template_id: template_id.to_owned(), language, body: body.to_owned(), required_slots, segments })
    }

    /// One of the shipped prompt assets.
    pub fn builtin(id: TemplateId, language: Language) -> PromptTemplate {
        PromptTemplate::parse(id.as_str(), language, id.builtin_body(language)).expect("shipped templates are well formed")
    }

    /// Literal text between placeholders, in order.
    pub fn literals(&self) -> impl Iterator<Item = &str> {
        self.segments.iter().filter_map(|s| match s {
            Segment::Literal(l) => Some(l.as_str()),
            Segment::Slot(_) => None,
        })
    }

    pub fn render(&self, bindings: &[(&str, &str)]) -> Result<String, TemplateError> {
        self.render_with(bindings, RenderMode::Strict)
    }

    /// Replaces every placeholder occurrence with its binding in a single
    /// pass; bound values are never re-scanned.
    pub fn render_with(&self, bindings: &[(&str, &str)], mode: RenderMode) -> Result<String, TemplateError> {
        let map: BTreeMap<&str, &str> = bindings.iter().copied().collect();
        if mode == RenderMode::Strict {
            if let Some((k, _)) = map.iter().find(|(k, _)| !self.required_slots.contains(**k)) {
                return Err(TemplateError::UnknownSlot { template: self.template_id.clone(), slot: (*k).to_owned() });
            }
        }
        let mut out = String::with_capacity(self.body.len());
        for seg in &self.segments {
            match seg {
                Segment::Literal(l) => out.push_str(l),
                Segment::Slot(name) => {
                    let value = map
                        .get(name.as_str())
                        .ok_or_else(|| TemplateError::MissingSlot { template: self.template_id.clone(), slot: name.clone() })?;
                    out.push_str(value);
                }
            }
        }
        Ok(out)
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.body.as_bytes()))
    }
}

/// All templates for one language.
#[derive(Debug, Clone)]
pub struct PromptSet {
    pub language: Language,
    templates: BTreeMap<TemplateId, PromptTemplate>,
}

impl PromptSet {
    pub fn builtin(language: Language) -> PromptSet {
        let templates = TemplateId::ALL.into_iter().map(|id| (id, PromptTemplate::builtin(id, language))).collect();
        PromptSet { language, templates }
    }

    /// Built-in set with any `<template_id>.txt` found in `dir` taking
    /// precedence.
    pub fn with_overrides(language: Language, dir: &Path) -> Result<PromptSet, TemplateError> {
        let mut set = PromptSet::builtin(language);
        for id in TemplateId::ALL {
            let path = dir.join(format!("{}.txt", id.as_str()));
            if path.exists() {
                let body = std::fs::read_to_string(&path)
                    .map_err(|e| TemplateError::Load { template: id.as_str().to_owned(), message: e.to_string() })?;
                let body = body.strip_suffix('\n').unwrap_or(&body);
                set.templates.insert(id, PromptTemplate::parse(id.as_str(), language, body)?);
            }
        }
        Ok(set)
    }

    pub fn get(&self, id: TemplateId) -> &PromptTemplate {
        &self.templates[&id]
    }

    pub fn digests(&self) -> BTreeMap<String, String> {
        self.templates.iter().map(|(id, t)| (format!("{}/{}", self.language.as_str(), id), t.digest())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_render() {
        let t = PromptTemplate::parse("t", Language::En, "X{{a}}Y").unwrap();
        assert_eq!(t.render(&[("a", "Z")]).unwrap(), "XZY");
    }

    #[test]
    fn repeated_slot_replaced_each_time() {
        let t = PromptTemplate::parse("t", Language::Zh, "“{{concept}}”与“{{concept}}”").unwrap();
        assert_eq!(t.render(&[("concept", "户")]).unwrap(), "“户”与“户”");
        assert_eq!(t.required_slots.len(), 1);
    }

    #[test]
    fn missing_slot_is_named() {
        let t = PromptTemplate::builtin(TemplateId::FilterHasReason, Language::Zh);
        let err = t.render(&[("article", "a"), ("court view", "v")]).unwrap_err();
        assert_eq!(err, TemplateError::MissingSlot { template: "filter_has_reason".into(), slot: "concept".into() });
        assert!(err.to_string().contains("{{concept}}"));
    }

    #[test]
    fn unknown_slot_strict_only() {
        let t = PromptTemplate::parse("t", Language::En, "{{a}}").unwrap();
        assert!(matches!(t.render(&[("a", "1"), ("b", "2")]), Err(TemplateError::UnknownSlot { .. })));
        assert_eq!(t.render_with(&[("a", "1"), ("b", "2")], RenderMode::Lenient).unwrap(), "1");
    }

    #[test]
    fn bound_values_are_not_rescanned() {
        let t = PromptTemplate::parse("t", Language::En, "{{a}}|{{b}}").unwrap();
        assert_eq!(t.render(&[("a", "{{b}}"), ("b", "x")]).unwrap(), "{{b}}|x");
    }

    #[test]
    fn malformed_placeholders() {
        assert!(PromptTemplate::parse("t", Language::En, "a {{open").is_err());
        assert!(PromptTemplate::parse("t", Language::En, "a {{}} b").is_err());
        assert!(PromptTemplate::parse("t", Language::En, "stray }} here").is_err());
    }

    #[test]
    fn builtins_parse_with_expected_slots() {
        for lang in [Language::Zh, Language::En] {
            let set = PromptSet::builtin(lang);
            let gen = set.get(TemplateId::GenerateInterpretation);
            let want: BTreeSet<String> =
                ["article", "concept", "reasons", "Interpretation Example"].iter().map(|s| s.to_string()).collect();
            assert_eq!(gen.required_slots, want);
            let judge = set.get(TemplateId::ConsistencyJudge);
            assert!(judge.required_slots.contains("generated reason"));
            assert!(judge.required_slots.contains("gold reason"));
            assert!(!set.get(TemplateId::FilterHasReason).body.ends_with('\n'));
        }
    }

    #[test]
    fn template_id_roundtrip() {
        for id in TemplateId::ALL {
            assert_eq!(id.as_str().parse::<TemplateId>().unwrap(), id);
        }
    }
}
