// SPDX-License-Identifier: Apache-2.0

//! Relevance filtering, labelling, reason extraction and balancing.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{CaseJudgment, ConceptSpec, Corpus};
use crate::label::Label;
use crate::llm::markers::parse_verdict;
use crate::llm::{slot, Gateway, LlmError, LlmRequest, PromptSet, TemplateError, TemplateId, DEFAULT_MAX_TOKENS};
use crate::retrieval::{CaseSet, CaseSetError, Stage};
use crate::text::{nfc, split_sentences, strip_whitespace};

/// How an extracted reason relates to the court view it came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verification {
    /// Every sentence is a verbatim substring of the court view.
    Verbatim,
    /// Every sentence matches once whitespace is removed from both sides.
    Normalized,
    Failed,
}

impl Verification {
    pub fn passed(self) -> bool {
        self != Verification::Failed
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReasonSource {
    #[default]
    CourtView,
}

/// An extracted determination reason and its applicability label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReasonRecord {
    pub case_id: String,
    pub concept_id: String,
    pub reason: String,
    pub label: Option<Label>,
    pub verification: Verification,
    #[serde(default)]
    pub source: ReasonSource,
}

/// Checks that `reason` is made of sentences taken from `court_view`.
pub fn verify_reason(reason: &str, court_view: &str) -> Verification {
    let sentences = split_sentences(reason);
    if sentences.is_empty() {
        return Verification::Failed;
    }
    let squeezed_view = strip_whitespace(court_view);
    let mut normalized = false;
    for sentence in sentences {
        if court_view.contains(sentence) {
            continue;
        }
        let squeezed = strip_whitespace(sentence);
        if !squeezed.is_empty() && squeezed_view.contains(&squeezed) {
            normalized = true;
        } else {
            return Verification::Failed;
        }
    }
    if normalized {
        Verification::Normalized
    } else {
        Verification::Verbatim
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relevance {
    Relevant,
    Irrelevant,
    ParseFailed,
}

/// A parsed decision together with the raw model text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Judged<T> {
    pub value: T,
    pub raw: String,
}

#[derive(Debug, thiserror::Error)]
pub enum FilterError {
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    CaseSet(#[from] CaseSetError),
    #[error("expected a {expected} case set, got {got}")]
    WrongStage { expected: Stage, got: Stage },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    Filter,
    Classify,
    Extract,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    ParseFailed,
    ProviderError,
    VerificationFailed,
    UnknownCase,
}

/// Per-case problem recorded instead of aborting the run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub case_id: String,
    pub step: Step,
    pub kind: DiagnosticKind,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct AnnotatorConfig {
    pub model_id: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub parallelism: usize,
    /// Drop (quarantine) records whose reason fails verification.
    pub strict: bool,
}

impl Default for AnnotatorConfig {
    fn default() -> Self {
        AnnotatorConfig {
            model_id: "qwen2.5-72b-instruct".into(),
            temperature: 0.0,
            max_tokens: DEFAULT_MAX_TOKENS,
            parallelism: 8,
            strict: false,
        }
    }
}

/// Runs the three court-view prompts for a concept.
pub struct Annotator<'a> {
    gateway: &'a Gateway,
    prompts: &'a PromptSet,
    config: AnnotatorConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct D1Counts {
    pub n_input: usize,
    pub n_relevant: usize,
    pub n_irrelevant: usize,
    pub n_parse_failed: usize,
    pub n_quarantined: usize,
}

#[derive(Debug, Clone)]
pub struct D1Outcome {
    pub d1: CaseSet,
    /// One record per D1 case, in D1 order.
    pub records: Vec<ReasonRecord>,
    pub diagnostics: Vec<Diagnostic>,
    pub counts: D1Counts,
}

enum CaseResult {
    Kept(ReasonRecord, Vec<Diagnostic>),
    Dropped(Relevance, Vec<Diagnostic>),
}

impl<'a> Annotator<'a> {
    pub fn new(gateway: &'a Gateway, prompts: &'a PromptSet, config: AnnotatorConfig) -> Self {
        Annotator { gateway, prompts, config }
    }

    pub fn config(&self) -> &AnnotatorConfig {
        &self.config
    }

    fn request(&self, id: TemplateId, case: &CaseJudgment, spec: &ConceptSpec) -> Result<LlmRequest, FilterError> {
        let prompt = self.prompts.get(id).render(&[
            (slot::ARTICLE, &spec.article_text),
            (slot::CONCEPT, &spec.concept),
            (slot::COURT_VIEW, &case.court_view),
        ])?;
        Ok(LlmRequest::new(&self.config.model_id, prompt, self.config.temperature, 0)
            .with_max_tokens(self.config.max_tokens)
            .with_purpose(id.as_str()))
    }

    /// Does the court view explain why the concept applies or not?
    pub fn filter_relevant(&self, case: &CaseJudgment, spec: &ConceptSpec) -> Result<Judged<Relevance>, FilterError> {
        let reply = self.gateway.complete(&self.request(TemplateId::FilterHasReason, case, spec)?)?;
        let value = match parse_verdict(&reply.text) {
            Some(Label::Yes) => Relevance::Relevant,
            Some(Label::No) => Relevance::Irrelevant,
            None => Relevance::ParseFailed,
        };
        Ok(Judged { value, raw: reply.text })
    }

    /// The judge's applicability decision; `None` when the reply has no marker.
    pub fn classify_label(&self, case: &CaseJudgment, spec: &ConceptSpec) -> Result<Judged<Option<Label>>, FilterError> {
        let reply = self.gateway.complete(&self.request(TemplateId::ClassifyLabel, case, spec)?)?;
        Ok(Judged { value: parse_verdict(&reply.text), raw: reply.text })
    }

    /// Extracts the reason text and verifies it against the court view.
    pub fn extract_reason(&self, case: &CaseJudgment, spec: &ConceptSpec) -> Result<ReasonRecord, FilterError> {
        let reply = self.gateway.complete(&self.request(TemplateId::ExtractReason, case, spec)?)?;
        let reason = nfc(reply.text.trim());
        let verification = verify_reason(&reason, &case.court_view);
        Ok(ReasonRecord {
            case_id: case.case_id.clone(),
            concept_id: spec.concept_id.clone(),
            reason,
            label: None,
            verification,
            source: ReasonSource::CourtView,
        })
    }

    fn process_case(&self, case: &CaseJudgment, spec: &ConceptSpec) -> CaseResult {
        let diag = |step, kind, detail: String| Diagnostic { case_id: case.case_id.clone(), step, kind, detail };
        let provider = |step, e: FilterError| {
            CaseResult::Dropped(Relevance::ParseFailed, vec![diag(step, DiagnosticKind::ProviderError, e.to_string())])
        };

        let relevance = match self.filter_relevant(case, spec) {
            Ok(j) => j,
            Err(e) => return provider(Step::Filter, e),
        };
        match relevance.value {
            Relevance::Relevant => {}
            Relevance::Irrelevant => return CaseResult::Dropped(Relevance::Irrelevant, Vec::new()),
            Relevance::ParseFailed => {
                return CaseResult::Dropped(
                    Relevance::ParseFailed,
                    vec![diag(Step::Filter, DiagnosticKind::ParseFailed, tail(&relevance.raw))],
                )
            }
        }
        let label = match self.classify_label(case, spec) {
            Ok(Judged { value: Some(l), .. }) => l,
            Ok(Judged { value: None, raw }) => {
                return CaseResult::Dropped(
                    Relevance::ParseFailed,
                    vec![diag(Step::Classify, DiagnosticKind::ParseFailed, tail(&raw))],
                )
            }
            Err(e) => return provider(Step::Classify, e),
        };
        let mut record = match self.extract_reason(case, spec) {
            Ok(r) => r,
            Err(e) => return provider(Step::Extract, e),
        };
        record.label = Some(label);
        let mut diags = Vec::new();
        if !record.verification.passed() {
            diags.push(diag(
                Step::Extract,
                DiagnosticKind::VerificationFailed,
                if record.reason.is_empty() { "empty extraction".into() } else { tail(&record.reason) },
            ));
            if self.config.strict {
                return CaseResult::Dropped(Relevance::Relevant, diags);
            }
        }
        CaseResult::Kept(record, diags)
    }

    /// filter → classify → extract for every D0 case. D1 holds relevant
    /// cases with a parsed label (and, in strict mode, a verified reason).
    pub fn build_d1(&self, d0: &CaseSet, spec: &ConceptSpec, corpus: &Corpus) -> Result<D1Outcome, FilterError> {
        if d0.stage != Stage::D0 {
            return Err(FilterError::WrongStage { expected: Stage::D0, got: d0.stage });
        }
        let results = crate::par::par_map(&d0.case_ids, self.config.parallelism, |_, id| match corpus.get(id) {
            Some(case) => self.process_case(case, spec),
            None => CaseResult::Dropped(
                Relevance::ParseFailed,
                vec![Diagnostic {
                    case_id: id.clone(),
                    step: Step::Filter,
                    kind: DiagnosticKind::UnknownCase,
                    detail: "case id not in corpus".into(),
                }],
            ),
        });

        let mut counts = D1Counts { n_input: d0.len(), ..Default::default() };
        let mut records = Vec::new();
        let mut diagnostics = Vec::new();
        for result in results {
            match result {
                CaseResult::Kept(record, diags) => {
                    counts.n_relevant += 1;
                    diagnostics.extend(diags);
                    records.push(record);
                }
                CaseResult::Dropped(relevance, diags) => {
                    match relevance {
                        Relevance::Relevant => {
                            counts.n_relevant += 1;
                            counts.n_quarantined += 1;
                        }
                        Relevance::Irrelevant => counts.n_irrelevant += 1,
                        Relevance::ParseFailed => counts.n_parse_failed += 1,
                    }
                    diagnostics.extend(diags);
                }
            }
        }
        let d1 = d0.advance(Stage::D1, records.iter().map(|r| r.case_id.clone()).collect())?;
        Ok(D1Outcome { d1, records, diagnostics, counts })
    }
}

fn tail(s: &str) -> String {
    let n = s.chars().count();
    s.chars().skip(n.saturating_sub(80)).collect()
}

/// Target positive:negative ratio for down-sampling positives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub positive: u32,
    pub negative: u32,
}

impl Default for Ratio {
    fn default() -> Self {
        Ratio { positive: 1, negative: 1 }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.positive, self.negative)
    }
}

impl FromStr for Ratio {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (p, n) = s.split_once(':').ok_or_else(|| format!("ratio {s:?} is not P:N"))?;
        let parse = |x: &str| x.trim().parse::<u32>().map_err(|e| format!("ratio {s:?}: {e}"));
        let ratio = Ratio { positive: parse(p)?, negative: parse(n)? };
        if ratio.positive == 0 || ratio.negative == 0 {
            return Err(format!("ratio {s:?}: both terms must be at least 1"));
        }
        Ok(ratio)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceConfig {
    pub target_ratio: Ratio,
    pub seed: u64,
    #[serde(default)]
    pub max_total: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BalanceWarning {
    NoNegatives,
    TooFewPositives { wanted: usize, available: usize },
    NegativesExceedMaxTotal { negatives: usize, max_total: usize },
    Unlabelled { case_id: String },
}

#[derive(Debug, Clone)]
pub struct BalanceOutcome {
    pub set: CaseSet,
    pub n_positive: usize,
    pub n_negative: usize,
    pub warnings: Vec<BalanceWarning>,
}

/// Keeps every negative and a seeded uniform sample of positives so that
/// positives = ⌊negatives · P / N⌋ (further capped by `max_total`).
pub fn balance(d1: &CaseSet, records: &[ReasonRecord], cfg: &BalanceConfig) -> Result<BalanceOutcome, FilterError> {
    if d1.stage != Stage::D1 {
        return Err(FilterError::WrongStage { expected: Stage::D1, got: d1.stage });
    }
    let labels: BTreeMap<&str, Option<Label>> = records.iter().map(|r| (r.case_id.as_str(), r.label)).collect();
    let mut warnings = Vec::new();
    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    for id in &d1.case_ids {
        match labels.get(id.as_str()).copied().flatten() {
            Some(Label::Yes) => positives.push(id.clone()),
            Some(Label::No) => negatives.push(id.clone()),
            None => warnings.push(BalanceWarning::Unlabelled { case_id: id.clone() }),
        }
    }
    positives.sort();

    if negatives.is_empty() {
        log::warn!("concept {}: no negative cases, balancing skipped", d1.concept_id);
        warnings.push(BalanceWarning::NoNegatives);
        let set = d1.advance(Stage::DBalanced, d1.case_ids.clone())?;
        return Ok(BalanceOutcome { set, n_positive: positives.len(), n_negative: 0, warnings });
    }

    let ratio = cfg.target_ratio;
    let mut wanted = negatives.len() * ratio.positive as usize / ratio.negative as usize;
    if let Some(max_total) = cfg.max_total {
        if negatives.len() > max_total {
            warnings.push(BalanceWarning::NegativesExceedMaxTotal { negatives: negatives.len(), max_total });
        }
        wanted = wanted.min(max_total.saturating_sub(negatives.len()));
    }
    let chosen: Vec<String> = if wanted >= positives.len() {
        if wanted > positives.len() {
            log::warn!(
                "concept {}: wanted {wanted} positives for ratio {ratio}, only {} available",
                d1.concept_id,
                positives.len()
            );
            warnings.push(BalanceWarning::TooFewPositives { wanted, available: positives.len() });
        }
        positives
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut idx = sample(&mut rng, positives.len(), wanted).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| positives[i].clone()).collect()
    };

    let n_positive = chosen.len();
    let n_negative = negatives.len();
    let mut ids: Vec<String> = chosen.into_iter().chain(negatives).collect();
    ids.sort();
    let set = d1.advance(Stage::DBalanced, ids)?;
    Ok(BalanceOutcome { set, n_positive, n_negative, warnings })
}
