// SPDX-License-Identifier: Apache-2.0

//! Legal concept entailment benchmark: test sets, predictions, consistency
//! judging and metrics.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{ConceptSpec, Corpus};
use crate::filter::{balance, Annotator, AnnotatorConfig, BalanceConfig, BalanceWarning, Diagnostic, FilterError};
use crate::interpret::{Interpretation, InterpretationSource};
use crate::label::{Label, Vote};
use crate::llm::markers::{parse_score, parse_verdict, strip_last_marker};
use crate::llm::{slot, Gateway, LlmError, LlmRequest, PromptSet, TemplateError, TemplateId, DEFAULT_MAX_TOKENS};
use crate::retrieval::{CaseSet, RetrievalIndex, Stage};

/// One benchmark item: the model sees `fact`; label and reason are gold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntailmentExample {
    pub case_id: String,
    pub concept_id: String,
    pub fact: String,
    pub gold_label: Label,
    pub gold_reason: String,
}

/// A prediction method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Random,
    ZeroShot,
    Cot,
    WithInterpretation(InterpretationSource),
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Random => "random",
            Method::ZeroShot => "zero_shot",
            Method::Cot => "cot",
            Method::WithInterpretation(s) => s.as_str(),
        }
    }

    fn template(self) -> Option<TemplateId> {
        match self {
            Method::Random => None,
            Method::ZeroShot => Some(TemplateId::EntailmentZeroShot),
            Method::Cot => Some(TemplateId::EntailmentCot),
            Method::WithInterpretation(_) => Some(TemplateId::EntailmentWithInterpretation),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "random" => Ok(Method::Random),
            "zero_shot" | "zero-shot" => Ok(Method::ZeroShot),
            "cot" => Ok(Method::Cot),
            other => other.parse::<InterpretationSource>().map(Method::WithInterpretation).map_err(|_| {
                format!("unknown method {other:?} (expected random, zero_shot, cot, atri, direct, judicial or expert)")
            }),
        }
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntailmentPrediction {
    pub case_id: String,
    pub concept_id: String,
    pub method: Method,
    pub votes: Vec<Vote>,
    pub label: Vote,
    pub reason: String,
    /// 0–10; `None` when unscored.
    pub consistency: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Strict majority of the valid votes; ties and all-invalid give `Invalid`.
pub fn majority_vote(votes: &[Vote]) -> Vote {
    let yes = votes.iter().filter(|v| **v == Vote::Yes).count();
    let no = votes.iter().filter(|v| **v == Vote::No).count();
    match yes.cmp(&no) {
        std::cmp::Ordering::Greater => Vote::Yes,
        std::cmp::Ordering::Less => Vote::No,
        std::cmp::Ordering::Equal => Vote::Invalid,
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error("{preds} predictions but {golds} gold labels")]
    LengthMismatch { preds: usize, golds: usize },
    #[error("method {0} needs an interpretation for concept {1}")]
    MissingInterpretation(Method, String),
    #[error("no concept spec for {0}")]
    UnknownConcept(String),
    #[error("test cases were used to generate interpretations: {}", .0.join(", "))]
    Leakage(Vec<String>),
    #[error("n_reps must be at least 1")]
    NoReps,
}

/// Scores for one method over a set of predictions.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MethodScores {
    pub acc: f64,
    pub ma_p: f64,
    pub ma_r: f64,
    pub ma_f: f64,
    /// Mean consistency with forced zeros included.
    pub cs: Option<f64>,
    /// Mean consistency over judge-scored predictions only.
    pub cs_scored_only: Option<f64>,
    pub n: usize,
    pub n_yes: usize,
    pub n_no: usize,
    pub n_invalid: usize,
}

/// Classification metrics for aligned predictions and gold labels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub n_yes: usize,
    pub n_no: usize,
    pub n_invalid: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Accuracy and macro P/R/F over {yes, no}. Invalid predictions are wrong
/// and belong to neither predicted class.
pub fn compute_metrics(preds: &[Vote], golds: &[Label]) -> Result<Metrics, BenchError> {
    if preds.len() != golds.len() {
        return Err(BenchError::LengthMismatch { preds: preds.len(), golds: golds.len() });
    }
    let mut m = Metrics::default();
    let mut correct = 0;
    let (mut p, mut r, mut f) = (0.0, 0.0, 0.0);
    for class in [Label::Yes, Label::No] {
        let vote = Vote::from(class);
        let tp = preds.iter().zip(golds).filter(|(p, g)| **p == vote && **g == class).count();
        let predicted = preds.iter().filter(|p| **p == vote).count();
        let actual = golds.iter().filter(|g| **g == class).count();
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, actual);
        let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        p += precision / 2.0;
        r += recall / 2.0;
        f += f1 / 2.0;
        correct += tp;
        match class {
            Label::Yes => m.n_yes = predicted,
            Label::No => m.n_no = predicted,
        }
    }
    m.n_invalid = preds.iter().filter(|p| **p == Vote::Invalid).count();
    m.accuracy = ratio(correct, preds.len());
    m.macro_precision = p;
    m.macro_recall = r;
    m.macro_f1 = f;
    Ok(m)
}

/// Scores a method's predictions (aligned with `examples`).
pub fn score_method(preds: &[&EntailmentPrediction], examples: &[&EntailmentExample]) -> Result<MethodScores, BenchError> {
    let votes: Vec<Vote> = preds.iter().map(|p| p.label).collect();
    let golds: Vec<Label> = examples.iter().map(|e| e.gold_label).collect();
    let m = compute_metrics(&votes, &golds)?;
    let mean = |xs: Vec<u8>| (!xs.is_empty()).then(|| xs.iter().map(|&x| x as f64).sum::<f64>() / xs.len() as f64);
    let with_zeros: Vec<u8> = preds.iter().filter_map(|p| p.consistency).collect();
    let scored: Vec<u8> = preds
        .iter()
        .zip(examples)
        .filter(|(p, e)| p.label == Vote::from(e.gold_label))
        .filter_map(|(p, _)| p.consistency)
        .collect();
    Ok(MethodScores {
        acc: m.accuracy,
        ma_p: m.macro_precision,
        ma_r: m.macro_recall,
        ma_f: m.macro_f1,
        cs: mean(with_zeros),
        cs_scored_only: mean(scored),
        n: preds.len(),
        n_yes: m.n_yes,
        n_no: m.n_no,
        n_invalid: m.n_invalid,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub methods: Vec<Method>,
    pub model_id: String,
    pub judge_model_id: String,
    pub n_reps: u32,
    pub seed: u64,
    pub temperature: f64,
    pub max_tokens: u32,
    pub parallelism: usize,
    /// Skip the consistency judge entirely.
    pub judge: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            methods: vec![Method::Random, Method::ZeroShot, Method::Cot, Method::WithInterpretation(InterpretationSource::Atri)],
            model_id: "qwen2.5-72b-instruct".into(),
            judge_model_id: "gpt-4o-2024-08-06".into(),
            n_reps: 3,
            seed: 0,
            temperature: 0.0,
            max_tokens: DEFAULT_MAX_TOKENS,
            parallelism: 8,
            judge: true,
        }
    }
}

/// Benchmark results: pooled rows per method plus per-concept rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub overall: BTreeMap<String, MethodScores>,
    pub per_concept: BTreeMap<String, BTreeMap<String, MethodScores>>,
    pub n_examples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest_digest: Option<String>,
}

impl BenchReport {
    /// Method names in configured order.
    pub fn method_order(&self) -> Vec<String> {
        let mut names: Vec<String> = self.config.methods.iter().map(|m| m.to_string()).collect();
        names.extend(self.overall.keys().filter(|k| !names.contains(k)).cloned().collect::<Vec<_>>());
        names
    }
}

fn derive_seed(parts: &[&[u8]]) -> u64 {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

/// Runs predictions and consistency judging.
pub struct Predictor<'a> {
    gateway: &'a Gateway,
    prompts: &'a PromptSet,
    config: BenchConfig,
}

impl<'a> Predictor<'a> {
    pub fn new(gateway: &'a Gateway, prompts: &'a PromptSet, config: BenchConfig) -> Self {
        Predictor { gateway, prompts, config }
    }

    pub fn config(&self) -> &BenchConfig {
        &self.config
    }

    /// The prompt a method sends for `example`.
    pub fn render(
        &self,
        example: &EntailmentExample,
        spec: &ConceptSpec,
        method: Method,
        interpretation: Option<&Interpretation>,
    ) -> Result<Option<String>, BenchError> {
        let Some(id) = method.template() else { return Ok(None) };
        let mut bindings = vec![
            (slot::ARTICLE, spec.article_text.as_str()),
            (slot::CONCEPT, spec.concept.as_str()),
            (slot::FACT, example.fact.as_str()),
        ];
        if let Method::WithInterpretation(_) = method {
            let interp = interpretation.ok_or_else(|| BenchError::MissingInterpretation(method, spec.concept_id.clone()))?;
            bindings.push((slot::INTERPRETATION, interp.raw_text.as_str()));
        }
        Ok(Some(self.prompts.get(id).render(&bindings)?))
    }

    /// `n_reps` votes, majority label and a reason drawn from the majority.
    pub fn predict_one(
        &self,
        example: &EntailmentExample,
        spec: &ConceptSpec,
        method: Method,
        interpretation: Option<&Interpretation>,
    ) -> Result<EntailmentPrediction, BenchError> {
        let n_reps = self.config.n_reps;
        if n_reps == 0 {
            return Err(BenchError::NoReps);
        }
        let seed = self.config.seed.to_le_bytes();
        let base = EntailmentPrediction {
            case_id: example.case_id.clone(),
            concept_id: example.concept_id.clone(),
            method,
            votes: Vec::new(),
            label: Vote::Invalid,
            reason: String::new(),
            consistency: None,
            error: None,
        };
        let Some(prompt) = self.render(example, spec, method, interpretation)? else {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[b"random", &seed, example.case_id.as_bytes()]));
            let vote = if rng.gen_bool(0.5) { Vote::Yes } else { Vote::No };
            return Ok(EntailmentPrediction { votes: vec![vote; n_reps as usize], label: vote, ..base });
        };

        let mut replies = Vec::with_capacity(n_reps as usize);
        for rep in 0..n_reps {
            let request = LlmRequest::new(&self.config.model_id, prompt.clone(), self.config.temperature, rep)
                .with_max_tokens(self.config.max_tokens)
                .with_purpose(method.template().expect("llm method").as_str());
            replies.push(self.gateway.complete(&request)?.text);
        }
        let votes: Vec<Vote> = replies.iter().map(|r| Vote::from(parse_verdict(r))).collect();
        let label = majority_vote(&votes);
        let reason = if label == Vote::Invalid {
            String::new()
        } else {
            let agreeing: Vec<&String> = replies.iter().zip(&votes).filter(|(_, v)| **v == label).map(|(r, _)| r).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[
                b"reason",
                &seed,
                method.as_str().as_bytes(),
                example.case_id.as_bytes(),
            ]));
            strip_last_marker(agreeing[rng.gen_range(0..agreeing.len())])
        };
        Ok(EntailmentPrediction { votes, label, reason, ..base })
    }

    /// 0 for a wrong (or invalid) label without a judge call; otherwise the
    /// judge's 1–10 score, with one retry, else `None`.
    pub fn score_consistency(
        &self,
        pred: &EntailmentPrediction,
        example: &EntailmentExample,
        spec: &ConceptSpec,
    ) -> Result<Option<u8>, BenchError> {
        if pred.label != Vote::from(example.gold_label) {
            return Ok(Some(0));
        }
        let crime = spec.crime_label();
        let prompt = self.prompts.get(TemplateId::ConsistencyJudge).render(&[
            (slot::CRIME, &crime),
            (slot::CONCEPT, &spec.concept),
            (slot::GENERATED_REASON, &pred.reason),
            (slot::GOLD_REASON, &example.gold_reason),
        ])?;
        for rep in 0..2 {
            let request = LlmRequest::new(&self.config.judge_model_id, prompt.clone(), 0.0, rep)
                .with_max_tokens(self.config.max_tokens)
                .with_purpose(TemplateId::ConsistencyJudge.as_str());
            let reply = self.gateway.complete(&request)?;
            match parse_score(&reply.text) {
                Some(n @ 1..=10) => return Ok(Some(n as u8)),
                other => log::debug!("case {}: judge score {other:?} rejected", example.case_id),
            }
        }
        log::warn!("case {}: consistency unscored", example.case_id);
        Ok(None)
    }

    fn run_one(
        &self,
        example: &EntailmentExample,
        spec: &ConceptSpec,
        method: Method,
        interpretation: Option<&Interpretation>,
    ) -> EntailmentPrediction {
        let failed = |e: BenchError| EntailmentPrediction {
            case_id: example.case_id.clone(),
            concept_id: example.concept_id.clone(),
            method,
            votes: Vec::new(),
            label: Vote::Invalid,
            reason: String::new(),
            consistency: None,
            error: Some(e.to_string()),
        };
        let mut pred = match self.predict_one(example, spec, method, interpretation) {
            Ok(p) => p,
            Err(e) => return failed(e),
        };
        if self.config.judge && method != Method::Random {
            match self.score_consistency(&pred, example, spec) {
                Ok(score) => pred.consistency = score,
                Err(e) => pred.error = Some(e.to_string()),
            }
        }
        pred
    }

    /// Every method over every example. Per-example failures are recorded
    /// in the ledger and the run continues.
    pub fn run_benchmark(
        &self,
        examples: &[EntailmentExample],
        specs: &[ConceptSpec],
        interpretations: &[Interpretation],
    ) -> Result<BenchRun, BenchError> {
        let generation_ids: BTreeSet<&str> = interpretations.iter().flat_map(|i| i.case_ids()).map(String::as_str).collect();
        check_leakage(examples, &generation_ids)?;

        let spec_of: BTreeMap<&str, &ConceptSpec> = specs.iter().map(|s| (s.concept_id.as_str(), s)).collect();
        let interp_of: BTreeMap<(&str, InterpretationSource), &Interpretation> =
            interpretations.iter().map(|i| ((i.concept_id.as_str(), i.source), i)).collect();

        let mut sorted: Vec<&EntailmentExample> = examples.iter().collect();
        sorted.sort_by(|a, b| (&a.concept_id, &a.case_id).cmp(&(&b.concept_id, &b.case_id)));

        let mut jobs = Vec::new();
        for &method in &self.config.methods {
            for ex in &sorted {
                let spec =
                    *spec_of.get(ex.concept_id.as_str()).ok_or_else(|| BenchError::UnknownConcept(ex.concept_id.clone()))?;
                let interp = match method {
                    Method::WithInterpretation(src) => Some(
                        *interp_of
                            .get(&(ex.concept_id.as_str(), src))
                            .ok_or_else(|| BenchError::MissingInterpretation(method, ex.concept_id.clone()))?,
                    ),
                    _ => None,
                };
                jobs.push((method, *ex, spec, interp));
            }
        }
        let ledger = crate::par::par_map(&jobs, self.config.parallelism, |_, (method, ex, spec, interp)| {
            self.run_one(ex, spec, *method, *interp)
        });

        let mut overall = BTreeMap::new();
        let mut per_concept: BTreeMap<String, BTreeMap<String, MethodScores>> = BTreeMap::new();
        for &method in &self.config.methods {
            let rows: Vec<(&EntailmentPrediction, &EntailmentExample)> =
                ledger.iter().zip(&jobs).filter(|(_, j)| j.0 == method).map(|(p, j)| (p, j.1)).collect();
            let (preds, exs): (Vec<_>, Vec<_>) = rows.iter().copied().unzip();
            overall.insert(method.to_string(), score_method(&preds, &exs)?);
            let concepts: BTreeSet<&str> = exs.iter().map(|e| e.concept_id.as_str()).collect();
            for concept in concepts {
                let (p, e): (Vec<_>, Vec<_>) = rows.iter().copied().filter(|(_, e)| e.concept_id == concept).unzip();
                per_concept.entry(concept.to_owned()).or_default().insert(method.to_string(), score_method(&p, &e)?);
            }
        }
        let report =
            BenchReport { config: self.config.clone(), overall, per_concept, n_examples: examples.len(), manifest_digest: None };
        Ok(BenchRun { report, ledger })
    }
}

#[derive(Debug, Clone)]
pub struct BenchRun {
    pub report: BenchReport,
    /// One prediction per (method, example), by method then concept and case.
    pub ledger: Vec<EntailmentPrediction>,
}

/// Fails when any test case was used for interpretation generation.
pub fn check_leakage(examples: &[EntailmentExample], generation_ids: &BTreeSet<&str>) -> Result<(), BenchError> {
    let leaked: BTreeSet<&str> = examples.iter().map(|e| e.case_id.as_str()).filter(|id| generation_ids.contains(id)).collect();
    if leaked.is_empty() {
        Ok(())
    } else {
        Err(BenchError::Leakage(leaked.into_iter().map(str::to_owned).collect()))
    }
}

#[derive(Debug, Clone)]
pub struct TestSet {
    pub examples: Vec<EntailmentExample>,
    /// D0 cases dropped because they were in the exclusion set.
    pub removed: Vec<String>,
    pub diagnostics: Vec<Diagnostic>,
    pub balance_warnings: Vec<BalanceWarning>,
}

/// Retrieval and strict filtering over D0 minus `exclusions`; gold labels
/// and reasons come from the court view, the example exposes the facts.
pub fn build_test_set(
    index: &RetrievalIndex,
    spec: &ConceptSpec,
    gateway: &Gateway,
    prompts: &PromptSet,
    annotator: AnnotatorConfig,
    exclusions: &BTreeSet<String>,
    balancing: Option<&BalanceConfig>,
) -> Result<TestSet, BenchError> {
    let corpus: &Corpus = index.corpus();
    let d0 = index.retrieve_d0(spec).set;
    let (removed, kept): (Vec<String>, Vec<String>) = d0.case_ids.iter().cloned().partition(|id| exclusions.contains(id));
    let d0 = CaseSet::new(spec.concept_id.clone(), Stage::D0, kept).map_err(FilterError::from)?;

    let annotator = Annotator::new(gateway, prompts, AnnotatorConfig { strict: true, ..annotator });
    let outcome = annotator.build_d1(&d0, spec, corpus)?;
    let (set, balance_warnings) = match balancing {
        Some(cfg) => {
            let b = balance(&outcome.d1, &outcome.records, cfg)?;
            (b.set, b.warnings)
        }
        None => (outcome.d1.clone(), Vec::new()),
    };
    let keep = set.id_set();
    let examples: Vec<EntailmentExample> = outcome
        .records
        .iter()
        .filter(|r| keep.contains(r.case_id.as_str()))
        .filter_map(|r| {
            let case = corpus.get(&r.case_id)?;
            let gold_label = r.label?;
            (!case.facts.trim().is_empty()).then(|| EntailmentExample {
                case_id: r.case_id.clone(),
                concept_id: spec.concept_id.clone(),
                fact: case.facts.clone(),
                gold_label,
                gold_reason: r.reason.clone(),
            })
        })
        .collect();
    if examples.is_empty() {
        log::warn!("concept {}: empty test set", spec.concept_id);
    }
    Ok(TestSet { examples, removed, diagnostics: outcome.diagnostics, balance_warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{FixtureRule, FixtureScript, Language};
    use Vote::{Invalid as I, No as N, Yes as Y};

    #[test]
    fn hand_metrics() {
        let m = compute_metrics(&[Y, Y, N, N], &[Label::Yes, Label::No, Label::Yes, Label::No]).unwrap();
        assert_eq!((m.accuracy, m.macro_precision, m.macro_recall, m.macro_f1), (0.5, 0.5, 0.5, 0.5));
        let m = compute_metrics(&[Y, Y, Y, Y], &[Label::Yes, Label::Yes, Label::No, Label::No]).unwrap();
        assert_eq!(m.macro_recall, 0.5);
        let m = compute_metrics(&[Y, N], &[Label::Yes, Label::No]).unwrap();
        assert_eq!((m.accuracy, m.macro_f1), (1.0, 1.0));
        assert!(compute_metrics(&[Y], &[]).is_err());
    }

    #[test]
    fn invalid_predictions_are_wrong_and_counted() {
        let m = compute_metrics(&[I, Y, N], &[Label::Yes, Label::Yes, Label::No]).unwrap();
        assert_eq!((m.n_yes, m.n_no, m.n_invalid), (1, 1, 1));
        assert!((m.accuracy - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(m.macro_precision, 1.0);
        assert!((m.macro_recall - 0.75).abs() < 1e-12);
    }

    #[test]
    fn votes() {
        assert_eq!(majority_vote(&[Y, Y, N]), Y);
        assert_eq!(majority_vote(&[Y, I, N]), I);
        assert_eq!(majority_vote(&[I, I, N]), N);
        assert_eq!(majority_vote(&[I, I, I]), I);
    }

    #[test]
    fn method_names_roundtrip() {
        for s in ["random", "zero_shot", "cot", "atri", "direct", "judicial", "expert"] {
            assert_eq!(s.parse::<Method>().unwrap().to_string(), s);
        }
        assert!("gpt".parse::<Method>().is_err());
    }

    fn spec() -> ConceptSpec {
        ConceptSpec {
            concept_id: "dwelling".into(),
            concept: "户".into(),
            article_id: "PRC-CL:264".parse().unwrap(),
            article_text: "入户盗窃的".into(),
            crime: Some("盗窃罪".into()),
        }
    }

    fn example(label: Label) -> EntailmentExample {
        EntailmentExample {
            case_id: "c1".into(),
            concept_id: "dwelling".into(),
            fact: "被告人进入幸福路0001号住宅。".into(),
            gold_label: label,
            gold_reason: "住宅应认定为户。".into(),
        }
    }

    #[test]
    fn prediction_and_judging_with_fixture() {
        let mut script = FixtureScript::default();
        script.push(FixtureRule::new(["幸福路0001号"], "住宅与外界隔离。[[是]]").on_rep(0));
        script.push(FixtureRule::new(["幸福路0001号"], "不确定。").on_rep(1));
        script.push(FixtureRule::new(["幸福路0001号"], "家庭生活场所。[[是]]").on_rep(2));
        script.push(FixtureRule::new(["一致性进行1-10的打分"], "较一致。[[11]]").on_rep(0));
        script.push(FixtureRule::new(["一致性进行1-10的打分"], "较一致。[[7]]").on_rep(1));
        let gateway = Gateway::fixture(script);
        let prompts = PromptSet::builtin(Language::Zh);
        let predictor = Predictor::new(&gateway, &prompts, BenchConfig::default());

        let ex = example(Label::Yes);
        let pred = predictor.predict_one(&ex, &spec(), Method::ZeroShot, None).unwrap();
        assert_eq!(pred.votes, vec![Y, I, Y]);
        assert_eq!(pred.label, Y);
        assert!(pred.reason == "住宅与外界隔离。" || pred.reason == "家庭生活场所。");
        assert_eq!(predictor.score_consistency(&pred, &ex, &spec()).unwrap(), Some(7));

        let calls = gateway.stats().requests;
        let wrong = example(Label::No);
        assert_eq!(predictor.score_consistency(&pred, &wrong, &spec()).unwrap(), Some(0));
        assert_eq!(gateway.stats().requests, calls);

        let err = predictor.predict_one(&ex, &spec(), Method::WithInterpretation(InterpretationSource::Atri), None);
        assert!(matches!(err, Err(BenchError::MissingInterpretation(..))));
    }

    #[test]
    fn random_method_makes_no_calls() {
        let gateway = Gateway::fixture(FixtureScript::default());
        let prompts = PromptSet::builtin(Language::Zh);
        let predictor = Predictor::new(&gateway, &prompts, BenchConfig { seed: 3, ..Default::default() });
        let a = predictor.predict_one(&example(Label::Yes), &spec(), Method::Random, None).unwrap();
        let b = predictor.predict_one(&example(Label::Yes), &spec(), Method::Random, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.votes.len(), 3);
        assert_eq!(gateway.stats().requests, 0);
    }

    #[test]
    fn leakage_detection() {
        let ex = vec![example(Label::Yes)];
        assert!(check_leakage(&ex, &BTreeSet::new()).is_ok());
        let ids: BTreeSet<&str> = ["c1"].into();
        assert!(matches!(check_leakage(&ex, &ids), Err(BenchError::Leakage(v)) if v == ["c1"]));
    }
}
