// SPDX-License-Identifier: Apache-2.0

//! Interpretation generation, section parsing and validation.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::LazyLock;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::{ConceptSpec, Corpus};
use crate::filter::ReasonRecord;
use crate::label::Label;
use crate::llm::{slot, Gateway, Language, LlmError, LlmRequest, PromptSet, TemplateError, TemplateId, DEFAULT_MAX_TOKENS};

/// Where an interpretation came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterpretationSource {
    Atri,
    Direct,
    Judicial,
    Expert,
}

impl InterpretationSource {
    pub const ALL: [InterpretationSource; 4] = [Self::Atri, Self::Direct, Self::Judicial, Self::Expert];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Atri => "atri",
            Self::Direct => "direct",
            Self::Judicial => "judicial",
            Self::Expert => "expert",
        }
    }

    /// Generated sources must carry the structured sections.
    pub fn is_generated(self) -> bool {
        matches!(self, Self::Atri | Self::Direct)
    }
}

impl fmt::Display for InterpretationSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InterpretationSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|x| x.as_str() == s).ok_or_else(|| format!("unknown interpretation source {s:?}"))
    }
}

/// Top-level interpretation sections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Section {
    Analysis,
    Examples,
    Discretion,
}

impl Section {
    pub const ALL: [Section; 3] = [Section::Analysis, Section::Examples, Section::Discretion];

    pub fn heading(self, language: Language) -> &'static str {
        match (self, language) {
            (Section::Analysis, Language::Zh) => "解析",
            (Section::Examples, Language::Zh) => "举例说明",
            (Section::Discretion, Language::Zh) => "司法裁量",
            (Section::Analysis, Language::En) => "Analysis",
            (Section::Examples, Language::En) => "Example Cases",
            (Section::Discretion, Language::En) => "Judicial Discretion",
        }
    }

    fn from_heading(title: &str) -> Option<Section> {
        match title.to_lowercase().as_str() {
            "解析" | "analysis" => Some(Section::Analysis),
            "举例说明" | "example cases" | "case examples" | "examples" => Some(Section::Examples),
            "司法裁量" | "judicial discretion" => Some(Section::Discretion),
            _ => None,
        }
    }
}

/// Interpretation parts that an ablation can remove.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Analysis,
    Examples,
    Positive,
    Negative,
    Discretion,
}

impl Component {
    pub const ALL: [Component; 5] = [Self::Analysis, Self::Examples, Self::Positive, Self::Negative, Self::Discretion];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Analysis => "analysis",
            Self::Examples => "examples",
            Self::Positive => "positive",
            Self::Negative => "negative",
            Self::Discretion => "discretion",
        }
    }
}

impl FromStr for Component {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| format!("unknown component {s:?} (expected analysis, examples, positive, negative or discretion)"))
    }
}

/// Which case text feeds the reference slot.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseSource {
    #[default]
    ExtractedReason,
    CourtView,
    FactAndCourtView,
}

impl FromStr for CaseSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "extracted_reason" => Ok(Self::ExtractedReason),
            "court_view" => Ok(Self::CourtView),
            "fact_and_court_view" => Ok(Self::FactAndCourtView),
            _ => Err(format!("unknown case source {s:?}")),
        }
    }
}

/// How many reasons to bind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum NReasons {
    #[default]
    All,
    Count(usize),
}

impl fmt::Display for NReasons {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NReasons::All => f.write_str("all"),
            NReasons::Count(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for NReasons {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "all" {
            return Ok(NReasons::All);
        }
        match s.parse::<usize>() {
            Ok(0) => Err("n_reasons must be at least 1".into()),
            Ok(n) => Ok(NReasons::Count(n)),
            Err(_) => Err(format!("n_reasons {s:?} is neither a count nor `all`")),
        }
    }
}

impl Serialize for NReasons {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            NReasons::All => s.serialize_str("all"),
            NReasons::Count(n) => s.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for NReasons {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(n) => NReasons::from_str(&n.to_string()),
            Raw::S(s) => NReasons::from_str(&s),
        }
        .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationConfig {
    pub model_id: String,
    pub n_reasons: NReasons,
    pub case_source: CaseSource,
    pub drop: BTreeSet<Component>,
    pub temperature: f64,
    pub seed: u64,
    pub max_tokens: u32,
    /// Extra attempts after a structurally invalid reply.
    pub max_retries: u32,
    /// Minimum positive and negative case blurbs for generated sources.
    pub min_cases: usize,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            model_id: "qwen2.5-72b-instruct".into(),
            n_reasons: NReasons::All,
            case_source: CaseSource::ExtractedReason,
            drop: BTreeSet::new(),
            temperature: 0.9,
            seed: 0,
            max_tokens: DEFAULT_MAX_TOKENS,
            max_retries: 2,
            min_cases: 5,
        }
    }
}

impl GenerationConfig {
    fn requires(&self, section: Section) -> bool {
        match section {
            Section::Analysis => !self.drop.contains(&Component::Analysis),
            Section::Discretion => !self.drop.contains(&Component::Discretion),
            Section::Examples => !self.examples_dropped(),
        }
    }

    fn examples_dropped(&self) -> bool {
        self.drop.contains(&Component::Examples)
            || (self.drop.contains(&Component::Positive) && self.drop.contains(&Component::Negative))
    }
}

/// One section as it appears in the text: its heading line and raw body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionBlock {
    pub section: Section,
    pub heading_line: String,
    pub body: String,
}

/// Lossless section split of a model reply.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub preamble: String,
    pub blocks: Vec<SectionBlock>,
}

impl Layout {
    pub fn emit(&self) -> String {
        let mut out = self.preamble.clone();
        for b in &self.blocks {
            out.push_str(&b.heading_line);
            out.push_str(&b.body);
        }
        out
    }

    pub fn body(&self, section: Section) -> Option<&str> {
        self.blocks.iter().find(|b| b.section == section).map(|b| b.body.as_str())
    }
}

static HEADING: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^[ \t]*(?:#{1,6}[ \t]*)?(?:\*\*)?[ \t]*([^*#:：\r\n]+?)[ \t]*(?:\*\*)?[ \t]*[:：]?[ \t]*(?:\*\*)?[ \t]*\r?\n?$")
        .expect("heading regex")
});

static NUMBERED: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[ \t]*\d+[.、．]").expect("numbered regex"));

fn heading_of(line: &str) -> Option<Section> {
    HEADING.captures(line).and_then(|c| Section::from_heading(c.get(1)?.as_str()))
}

/// Splits `raw` at every recognized section heading line. Emitting the
/// result reproduces `raw` exactly.
pub fn parse_layout(raw: &str) -> Layout {
    let mut layout = Layout::default();
    let mut current: Option<SectionBlock> = None;
    for line in raw.split_inclusive('\n') {
        if let Some(section) = heading_of(line) {
            if let Some(b) = current.take() {
                layout.blocks.push(b);
            }
            current = Some(SectionBlock { section, heading_line: line.to_owned(), body: String::new() });
            continue;
        }
        match current.as_mut() {
            Some(b) => b.body.push_str(line),
            None => layout.preamble.push_str(line),
        }
    }
    if let Some(b) = current {
        layout.blocks.push(b);
    }
    layout
}

fn indent(line: &str) -> usize {
    line.chars().take_while(|c| *c == ' ' || *c == '\t').count()
}

fn is_negative_header(line: &str) -> bool {
    let lower = line.to_lowercase();
    line.contains("不符合") || lower.contains("not meet") || lower.contains("don't meet") || lower.contains("not satisfy")
}

fn is_group_candidate(line: &str) -> bool {
    if NUMBERED.is_match(line) {
        return false;
    }
    let lower = line.to_lowercase();
    (line.contains("符合") && line.contains("案例")) || (lower.contains("meet") && lower.contains("case"))
}

/// Positive and negative case blurbs inside an examples body.
pub fn parse_cases(examples: &str) -> (Vec<String>, Vec<String>) {
    let lines: Vec<&str> = examples.lines().collect();
    let candidates: Vec<usize> = (0..lines.len()).filter(|&i| is_group_candidate(lines[i])).collect();
    let Some(min_indent) = candidates.iter().map(|&i| indent(lines[i])).min() else {
        return (Vec::new(), Vec::new());
    };
    let headers: Vec<usize> = candidates.into_iter().filter(|&i| indent(lines[i]) == min_indent).collect();

    let mut positive = Vec::new();
    let mut negative = Vec::new();
    for (k, &h) in headers.iter().enumerate() {
        let end = headers.get(k + 1).copied().unwrap_or(lines.len());
        let group = &lines[h + 1..end];
        let blurbs = split_items(group);
        if is_negative_header(lines[h]) {
            negative.extend(blurbs);
        } else {
            positive.extend(blurbs);
        }
    }
    (positive, negative)
}

fn split_items(lines: &[&str]) -> Vec<String> {
    let Some(item_indent) = lines.iter().filter(|l| NUMBERED.is_match(l)).map(|l| indent(l)).min() else {
        return Vec::new();
    };
    let mut items: Vec<Vec<&str>> = Vec::new();
    for line in lines {
        if NUMBERED.is_match(line) && indent(line) == item_indent {
            items.push(vec![line]);
        } else if let Some(item) = items.last_mut() {
            item.push(line);
        }
    }
    items.into_iter().map(|item| item.join("\n").trim().to_owned()).collect()
}

/// Structural defects found by the validator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Problem {
    MissingHeading { section: Section },
    DuplicateHeading { section: Section },
    EmptySection { section: Section },
    TooFewCases { label: Label, found: usize, required: usize },
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Problem::MissingHeading { section } => write!(f, "missing {section:?} heading"),
            Problem::DuplicateHeading { section } => write!(f, "{section:?} heading appears more than once"),
            Problem::EmptySection { section } => write!(f, "{section:?} section is empty"),
            Problem::TooFewCases { label, found, required } => {
                write!(f, "{found} {label} case(s), at least {required} required")
            }
        }
    }
}

/// Generation metadata.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GenMeta {
    pub model_id: String,
    pub temperature: f64,
    pub n_reasons_used: usize,
    pub seed: u64,
    /// Cases whose text was bound into the prompt.
    pub case_ids: Vec<String>,
    pub case_source: CaseSource,
    pub drop: BTreeSet<Component>,
    pub attempts: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interpretation {
    pub concept_id: String,
    pub analysis: String,
    pub positive_cases: Vec<String>,
    pub negative_cases: Vec<String>,
    pub judicial_discretion: String,
    pub raw_text: String,
    pub source: InterpretationSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gen_meta: Option<GenMeta>,
    pub valid: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub problems: Vec<Problem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<Layout>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest_digest: Option<String>,
}

impl Interpretation {
    /// Parses a model reply into sections and validates it against `cfg`.
    pub fn from_reply(concept_id: &str, raw: &str, source: InterpretationSource, cfg: &GenerationConfig) -> Self {
        let layout = parse_layout(raw);
        let body = |s| layout.body(s).map(str::trim).unwrap_or_default().to_owned();
        let (positive_cases, negative_cases) = layout.body(Section::Examples).map(parse_cases).unwrap_or_default();
        let mut interp = Interpretation {
            concept_id: concept_id.to_owned(),
            analysis: body(Section::Analysis),
            positive_cases,
            negative_cases,
            judicial_discretion: body(Section::Discretion),
            raw_text: raw.to_owned(),
            source,
            gen_meta: None,
            valid: false,
            problems: Vec::new(),
            layout: None,
            manifest_digest: None,
        };
        interp.problems = validate(&layout, &interp, cfg);
        interp.valid = interp.problems.is_empty();
        interp.layout = Some(layout);
        interp
    }

    /// Re-emits the text from the parsed layout (raw text when unparsed).
    pub fn emit(&self) -> String {
        match &self.layout {
            Some(layout) => layout.emit(),
            None => self.raw_text.clone(),
        }
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        crate::io::write_json(path, self)
    }

    pub fn load(path: &Path) -> std::io::Result<Interpretation> {
        crate::io::read_json(path)
    }

    pub fn case_ids(&self) -> &[String] {
        self.gen_meta.as_ref().map(|m| m.case_ids.as_slice()).unwrap_or_default()
    }
}

fn validate(layout: &Layout, interp: &Interpretation, cfg: &GenerationConfig) -> Vec<Problem> {
    let mut problems = Vec::new();
    for section in Section::ALL {
        let count = layout.blocks.iter().filter(|b| b.section == section).count();
        if count > 1 {
            problems.push(Problem::DuplicateHeading { section });
        }
        if !cfg.requires(section) {
            continue;
        }
        if count == 0 {
            problems.push(Problem::MissingHeading { section });
        } else if layout.body(section).is_none_or(|b| b.trim().is_empty()) {
            problems.push(Problem::EmptySection { section });
        }
    }
    if interp.source.is_generated() && cfg.requires(Section::Examples) {
        let checks = [
            (Component::Positive, Label::Yes, interp.positive_cases.len()),
            (Component::Negative, Label::No, interp.negative_cases.len()),
        ];
        for (component, label, found) in checks {
            if !cfg.drop.contains(&component) && found < cfg.min_cases {
                problems.push(Problem::TooFewCases { label, found, required: cfg.min_cases });
            }
        }
    }
    problems
}

#[derive(Debug, thiserror::Error)]
pub enum InterpretError {
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("no reasons to interpret concept {0}")]
    NoReasons(String),
    #[error("case {0} is not in the corpus")]
    UnknownCase(String),
    #[error("case source {0:?} needs the corpus")]
    CorpusRequired(CaseSource),
    #[error("interpretation file {path}: {message}")]
    External { path: String, message: String },
}

/// The formatting example bound into the generation prompt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exemplar {
    pub concept: String,
    pub text: String,
}

const DWELLING_ZH: &str = include_str!("../assets/exemplar_dwelling_zh.md");
const DWELLING_EN: &str = include_str!("../assets/exemplar_dwelling_en.md");

impl Exemplar {
    /// The shipped dwelling ("户") interpretation.
    pub fn builtin(language: Language) -> Exemplar {
        match language {
            Language::Zh => Exemplar { concept: "户".into(), text: DWELLING_ZH.into() },
            Language::En => Exemplar { concept: "dwelling".into(), text: DWELLING_EN.into() },
        }
    }

    /// The exemplar with the dropped components removed and an omission note.
    pub fn ablated(&self, drop: &BTreeSet<Component>, language: Language) -> String {
        if drop.is_empty() {
            return self.text.clone();
        }
        let mut layout = parse_layout(&self.text);
        let cfg = GenerationConfig { drop: drop.clone(), ..Default::default() };
        layout.blocks.retain(|b| cfg.requires(b.section));
        for block in layout.blocks.iter_mut().filter(|b| b.section == Section::Examples) {
            block.body = drop_case_groups(&block.body, drop);
        }
        let mut text = layout.emit();
        let omitted: Vec<&str> =
            Component::ALL.into_iter().filter(|c| drop.contains(c)).map(|c| component_label(c, language)).collect();
        let note = match language {
            Language::Zh => format!("（注意：输出中省略{}部分。）", omitted.join("、")),
            Language::En => format!("(Note: omit the {} part(s) from the output.)", omitted.join(", ")),
        };
        if !text.ends_with('\n') {
            text.push('\n');
        }
        text.push('\n');
        text.push_str(&note);
        text
    }
}

fn component_label(c: Component, language: Language) -> &'static str {
    match (c, language) {
        (Component::Analysis, Language::Zh) => "“解析”",
        (Component::Examples, Language::Zh) => "“举例说明”",
        (Component::Positive, Language::Zh) => "“符合定义的案例”",
        (Component::Negative, Language::Zh) => "“不符合定义的案例”",
        (Component::Discretion, Language::Zh) => "“司法裁量”",
        (Component::Analysis, Language::En) => "\"Analysis\"",
        (Component::Examples, Language::En) => "\"Example Cases\"",
        (Component::Positive, Language::En) => "\"cases that meet the definition\"",
        (Component::Negative, Language::En) => "\"cases that do not meet the definition\"",
        (Component::Discretion, Language::En) => "\"Judicial Discretion\"",
    }
}

fn drop_case_groups(body: &str, drop: &BTreeSet<Component>) -> String {
    let lines: Vec<&str> = body.split_inclusive('\n').collect();
    let candidates: Vec<usize> = (0..lines.len()).filter(|&i| is_group_candidate(lines[i])).collect();
    let Some(min_indent) = candidates.iter().map(|&i| indent(lines[i])).min() else {
        return body.to_owned();
    };
    let headers: Vec<usize> = candidates.into_iter().filter(|&i| indent(lines[i]) == min_indent).collect();
    let mut keep = vec![true; lines.len()];
    for (k, &h) in headers.iter().enumerate() {
        let end = headers.get(k + 1).copied().unwrap_or(lines.len());
        let component = if is_negative_header(lines[h]) { Component::Negative } else { Component::Positive };
        if drop.contains(&component) {
            keep[h..end].iter_mut().for_each(|k| *k = false);
        }
    }
    lines.iter().zip(keep).filter(|(_, k)| *k).map(|(l, _)| *l).collect()
}

/// Selects up to `n` reasons with a seeded draw that keeps yes/no counts
/// as equal as the pools allow. The result is ordered by case id.
pub fn select_reasons(reasons: &[ReasonRecord], n: NReasons, seed: u64) -> Vec<&ReasonRecord> {
    let mut sorted: Vec<&ReasonRecord> = reasons.iter().collect();
    sorted.sort_by(|a, b| a.case_id.cmp(&b.case_id));
    let n = match n {
        NReasons::All => return sorted,
        NReasons::Count(n) if n >= sorted.len() => return sorted,
        NReasons::Count(n) => n,
    };
    let pool = |l: Option<Label>| sorted.iter().copied().filter(|r| r.label == l).collect::<Vec<_>>();
    let (pos, neg, other) = (pool(Some(Label::Yes)), pool(Some(Label::No)), pool(None));

    let mut n_pos = n.div_ceil(2).min(pos.len());
    let n_neg = (n - n_pos).min(neg.len());
    n_pos = (n - n_neg).min(pos.len());
    let n_other = n - n_pos - n_neg;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = Vec::with_capacity(n);
    for (group, k) in [(pos, n_pos), (neg, n_neg), (other, n_other)] {
        chosen.extend(sample(&mut rng, group.len(), k).into_iter().map(|i| group[i]));
    }
    chosen.sort_by(|a, b| a.case_id.cmp(&b.case_id));
    chosen
}

/// A rendered generation prompt and the cases it draws on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationInput {
    pub prompt: String,
    pub case_ids: Vec<String>,
}

pub struct Interpreter<'a> {
    gateway: &'a Gateway,
    prompts: &'a PromptSet,
    exemplar: Exemplar,
    config: GenerationConfig,
}

impl<'a> Interpreter<'a> {
    pub fn new(gateway: &'a Gateway, prompts: &'a PromptSet, config: GenerationConfig) -> Self {
        let exemplar = Exemplar::builtin(prompts.language);
        Interpreter { gateway, prompts, exemplar, config }
    }

    pub fn with_exemplar(mut self, exemplar: Exemplar) -> Self {
        self.exemplar = exemplar;
        self
    }

    pub fn config(&self) -> &GenerationConfig {
        &self.config
    }

    fn reference_text(
        &self,
        record: &ReasonRecord,
        corpus: Option<&Corpus>,
        spec: &ConceptSpec,
    ) -> Result<String, InterpretError> {
        let case = || {
            corpus
                .ok_or(InterpretError::CorpusRequired(self.config.case_source))?
                .get(&record.case_id)
                .ok_or_else(|| InterpretError::UnknownCase(record.case_id.clone()))
        };
        Ok(match self.config.case_source {
            CaseSource::ExtractedReason => record.reason.clone(),
            CaseSource::CourtView => case()?.court_view.clone(),
            CaseSource::FactAndCourtView => {
                let case = case()?;
                let prompt = self
                    .prompts
                    .get(TemplateId::SummarizeFacts)
                    .render(&[(slot::CONCEPT, &spec.concept), (slot::FACT, &case.facts)])?;
                let request = LlmRequest::new(&self.config.model_id, prompt, 0.0, 0)
                    .with_max_tokens(self.config.max_tokens)
                    .with_purpose(TemplateId::SummarizeFacts.as_str());
                let summary = self.gateway.complete(&request)?.text;
                match self.prompts.language {
                    Language::Zh => format!("事实概要：{}\n法庭观点：{}", summary.trim(), case.court_view),
                    Language::En => format!("Fact summary: {}\nCourt view: {}", summary.trim(), case.court_view),
                }
            }
        })
    }

    fn render(&self, spec: &ConceptSpec, reasons_json: &str) -> Result<String, InterpretError> {
        if spec.concept == self.exemplar.concept {
            log::warn!("concept {} is also the exemplar concept", spec.concept_id);
        }
        let exemplar = self.exemplar.ablated(&self.config.drop, self.prompts.language);
        Ok(self.prompts.get(TemplateId::GenerateInterpretation).render(&[
            (slot::ARTICLE, &spec.article_text),
            (slot::CONCEPT, &spec.concept),
            (slot::REASONS, reasons_json),
            (slot::EXEMPLAR, &exemplar),
        ])?)
    }

    /// Renders the generation prompt for `reasons` after subsampling.
    pub fn assemble_generation_input(
        &self,
        spec: &ConceptSpec,
        reasons: &[ReasonRecord],
        corpus: Option<&Corpus>,
    ) -> Result<GenerationInput, InterpretError> {
        if reasons.is_empty() {
            return Err(InterpretError::NoReasons(spec.concept_id.clone()));
        }
        let chosen = select_reasons(reasons, self.config.n_reasons, self.config.seed);
        let texts = chosen.iter().map(|r| self.reference_text(r, corpus, spec)).collect::<Result<Vec<_>, _>>()?;
        let json = serde_json::to_string(&texts).expect("string list serializes");
        Ok(GenerationInput { prompt: self.render(spec, &json)?, case_ids: chosen.iter().map(|r| r.case_id.clone()).collect() })
    }

    /// Generates an interpretation grounded in `reasons`.
    pub fn generate(
        &self,
        spec: &ConceptSpec,
        reasons: &[ReasonRecord],
        corpus: Option<&Corpus>,
    ) -> Result<Interpretation, InterpretError> {
        let input = self.assemble_generation_input(spec, reasons, corpus)?;
        self.run(spec, input, InterpretationSource::Atri)
    }

    /// Generates an interpretation from model knowledge alone.
    pub fn generate_direct(&self, spec: &ConceptSpec) -> Result<Interpretation, InterpretError> {
        let input = GenerationInput { prompt: self.render(spec, "[]")?, case_ids: Vec::new() };
        self.run(spec, input, InterpretationSource::Direct)
    }

    fn run(
        &self,
        spec: &ConceptSpec,
        input: GenerationInput,
        source: InterpretationSource,
    ) -> Result<Interpretation, InterpretError> {
        let cfg = &self.config;
        let mut best: Option<Interpretation> = None;
        let mut attempts = 0;
        for rep in 0..=cfg.max_retries {
            attempts += 1;
            let request = LlmRequest::new(&cfg.model_id, input.prompt.clone(), cfg.temperature, rep)
                .with_max_tokens(cfg.max_tokens)
                .with_purpose(TemplateId::GenerateInterpretation.as_str());
            let reply = self.gateway.complete(&request)?;
            let interp = Interpretation::from_reply(&spec.concept_id, &reply.text, source, cfg);
            let done = interp.valid;
            if best.as_ref().is_none_or(|b| interp.problems.len() < b.problems.len()) {
                best = Some(interp);
            }
            if done {
                break;
            }
            log::warn!("concept {}: invalid interpretation on attempt {attempts}", spec.concept_id);
        }
        let mut interp = best.expect("at least one attempt");
        interp.gen_meta = Some(GenMeta {
            model_id: cfg.model_id.clone(),
            temperature: cfg.temperature,
            n_reasons_used: input.case_ids.len(),
            seed: cfg.seed,
            case_ids: input.case_ids,
            case_source: cfg.case_source,
            drop: cfg.drop.clone(),
            attempts,
        });
        Ok(interp)
    }
}

/// Wraps a free-text interpretation file (judicial or expert). Sections are
/// left unparsed; only `raw_text` is used downstream.
pub fn load_external_interpretation(
    path: &Path,
    concept_id: &str,
    source: InterpretationSource,
) -> Result<Interpretation, InterpretError> {
    let external = |message: String| InterpretError::External { path: path.display().to_string(), message };
    let raw = std::fs::read_to_string(path).map_err(|e| external(e.to_string()))?;
    if raw.trim().is_empty() {
        return Err(external("file is empty".into()));
    }
    Ok(Interpretation {
        concept_id: concept_id.to_owned(),
        analysis: String::new(),
        positive_cases: Vec::new(),
        negative_cases: Vec::new(),
        judicial_discretion: String::new(),
        raw_text: raw,
        source,
        gen_meta: None,
        valid: true,
        problems: Vec::new(),
        layout: None,
        manifest_digest: None,
    })
}

/// A well-formed interpretation text with `n_pos` and `n_neg` cases, in the
/// same layout as the exemplar.
pub fn render_interpretation(
    concept: &str,
    language: Language,
    analysis: &str,
    positive: &[String],
    negative: &[String],
    discretion: &str,
) -> String {
    let (pos_header, neg_header, case_word) = match language {
        Language::Zh => (format!("符合“{concept}”定义的案例"), format!("不符合“{concept}”定义的案例"), "案例"),
        Language::En => (
            format!("Cases that meet the definition of \"{concept}\""),
            format!("Cases that do not meet the definition of \"{concept}\""),
            "Case",
        ),
    };
    let mut out = String::new();
    out.push_str(&format!("### {}\n\n{}\n\n", Section::Analysis.heading(language), analysis.trim()));
    out.push_str(&format!("### {}\n\n", Section::Examples.heading(language)));
    for (header, cases) in [(pos_header, positive), (neg_header, negative)] {
        out.push_str(&format!("- **{header}**：\n\n"));
        for (i, case) in cases.iter().enumerate() {
            out.push_str(&format!("  {}. **{case_word} {}**：{}\n\n", i + 1, i + 1, case.trim()));
        }
    }
    out.push_str(&format!("### {}\n\n{}\n", Section::Discretion.heading(language), discretion.trim()));
    out
}
