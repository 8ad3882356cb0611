// SPDX-License-Identifier: Apache-2.0

//! Judgment corpus: record types, ingestion, concept specs and statistics.

mod article;
mod segment;

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

pub use article::{scan_citations, ArticleId, ArticleIdError};
pub use segment::{
    segment_judgment, segment_with, Section, SectionMarkers, Sections, SegmentError, SegmentWarning, Segmentation,
};

use crate::label::Label;
use crate::text::{char_len, nfc};

/// Publication years covered by the reference database. Values outside are
/// accepted with a warning.
pub const EXPECTED_YEARS: std::ops::RangeInclusive<i32> = 1985..=2021;

/// How a case's cited articles were determined.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CitationSource {
    #[default]
    Field,
    Regex,
}

impl CitationSource {
    fn is_field(&self) -> bool {
        *self == CitationSource::Field
    }
}

/// One segmented judgment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseJudgment {
    pub case_id: String,
    pub year: i32,
    pub header: String,
    pub facts: String,
    pub court_view: String,
    pub verdict: String,
    pub conclusion: String,
    pub cited_articles: BTreeSet<ArticleId>,
    #[serde(default, skip_serializing_if = "CitationSource::is_field")]
    pub citation_source: CitationSource,
}

impl CaseJudgment {
    pub fn cites(&self, article: &ArticleId) -> bool {
        self.cited_articles.contains(article)
    }
}

/// A vague concept inside one statutory article.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptSpec {
    pub concept_id: String,
    pub concept: String,
    pub article_id: ArticleId,
    pub article_text: String,
    /// Offence name bound into the consistency judge prompt. Falls back to
    /// the article identifier when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crime: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConceptError {
    #[error("concept {0:?}: empty concept id")]
    EmptyId(String),
    #[error("concept {0}: empty concept text")]
    EmptyConcept(String),
    #[error("concept {id}: {concept:?} does not occur in the article text")]
    NotInArticle { id: String, concept: String },
    #[error("duplicate concept id {0}")]
    Duplicate(String),
    #[error("concept file: {0}")]
    Io(#[from] std::io::Error),
}

impl ConceptSpec {
    /// Normalizes text fields and checks the invariants.
    pub fn validated(mut self) -> Result<Self, ConceptError> {
        self.concept = nfc(self.concept.trim());
        self.article_text = nfc(&self.article_text);
        if self.concept_id.trim().is_empty() {
            return Err(ConceptError::EmptyId(self.concept));
        }
        if self.concept.is_empty() {
            return Err(ConceptError::EmptyConcept(self.concept_id));
        }
        if !self.article_text.contains(&self.concept) {
            return Err(ConceptError::NotInArticle { id: self.concept_id, concept: self.concept });
        }
        Ok(self)
    }

    pub fn crime_label(&self) -> String {
        self.crime.clone().unwrap_or_else(|| self.article_id.to_string())
    }
}

/// Reads and validates a concept file (a JSON list).
pub fn load_concepts(path: &Path) -> Result<Vec<ConceptSpec>, ConceptError> {
    let raw: Vec<ConceptSpec> = crate::io::read_json(path)?;
    let mut seen = BTreeSet::new();
    raw.into_iter()
        .map(|c| {
            let c = c.validated()?;
            if !seen.insert(c.concept_id.clone()) {
                return Err(ConceptError::Duplicate(c.concept_id));
            }
            Ok(c)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemaMode {
    #[default]
    Strict,
    Lenient,
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub mode: SchemaMode,
    /// Law code assigned to `第…条` citations found by the regex fallback.
    pub default_law_code: String,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions { mode: SchemaMode::Strict, default_law_code: "PRC-CL".into() }
    }
}

impl IngestOptions {
    pub fn lenient() -> Self {
        IngestOptions { mode: SchemaMode::Lenient, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum IngestWarning {
    DuplicateReplaced { line: usize, case_id: String },
    YearOutOfRange { line: usize, case_id: String, year: i32 },
    MissingSectionSkipped { line: usize, case_id: String, field: String },
    CitationsFromRegex { line: usize, case_id: String },
    Segmentation { line: usize, case_id: String, detail: SegmentWarning },
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("corpus: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: field `{field}`: {message}")]
    Malformed { line: usize, field: String, message: String },
    #[error("line {line}: duplicate case_id {case_id}")]
    DuplicateId { line: usize, case_id: String },
    #[error("line {line}: case {case_id}: required section `{field}` is empty")]
    MissingSection { line: usize, case_id: String, field: String },
}

/// Read-only, shareable collection of judgments.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    cases: Vec<CaseJudgment>,
    by_id: HashMap<String, usize>,
    warnings: Vec<IngestWarning>,
}

const SECTIONS_REQUIRED: [&str; 3] = ["facts", "court_view", "verdict"];
const SECTIONS_OPTIONAL: [&str; 2] = ["header", "conclusion"];

impl Corpus {
    /// Reads a line-delimited corpus file.
    pub fn ingest(path: &Path, opts: &IngestOptions) -> Result<Corpus, IngestError> {
        let reader = BufReader::new(File::open(path)?);
        let mut corpus = Corpus::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            corpus.ingest_line(i + 1, &line, opts)?;
        }
        Ok(corpus)
    }

    /// Builds a corpus from in-memory cases with the same checks as
    /// [`Corpus::ingest`]. Line numbers in errors are 1-based positions.
    pub fn from_cases(cases: Vec<CaseJudgment>, opts: &IngestOptions) -> Result<Corpus, IngestError> {
        let mut corpus = Corpus::default();
        for (i, case) in cases.into_iter().enumerate() {
            let value = serde_json::to_value(&case).map_err(|e| IngestError::Malformed {
                line: i + 1,
                field: "<record>".into(),
                message: e.to_string(),
            })?;
            corpus.ingest_value(i + 1, value, opts)?;
        }
        Ok(corpus)
    }

    fn ingest_line(&mut self, line: usize, text: &str, opts: &IngestOptions) -> Result<(), IngestError> {
        let value: Value = serde_json::from_str(text).map_err(|e| IngestError::Malformed {
            line,
            field: "<record>".into(),
            message: e.to_string(),
        })?;
        self.ingest_value(line, value, opts)
    }

    fn ingest_value(&mut self, line: usize, value: Value, opts: &IngestOptions) -> Result<(), IngestError> {
        let Value::Object(mut obj) = value else {
            return Err(IngestError::Malformed { line, field: "<record>".into(), message: "expected an object".into() });
        };
        let case_id = str_field(&obj, line, "case_id")?.trim().to_owned();
        if case_id.is_empty() {
            return Err(IngestError::Malformed { line, field: "case_id".into(), message: "empty".into() });
        }
        if !obj.contains_key("facts") {
            if let Some(Value::String(raw)) = obj.remove("raw") {
                let seg = segment_judgment(&raw).map_err(|e| IngestError::Malformed {
                    line,
                    field: "raw".into(),
                    message: e.to_string(),
                })?;
                for detail in seg.warnings {
                    log::warn!("line {line}: case {case_id}: segmentation {detail:?}");
                    self.warnings.push(IngestWarning::Segmentation { line, case_id: case_id.clone(), detail });
                }
                let sections = seg.sections;
                for (field, text) in [
                    ("header", sections.header),
                    ("facts", sections.facts),
                    ("court_view", sections.court_view),
                    ("verdict", sections.verdict),
                    ("conclusion", sections.conclusion),
                ] {
                    obj.insert(field.into(), Value::String(text));
                }
            }
        }
        let year = match obj.get("year") {
            Some(Value::Number(n)) => n.as_i64().and_then(|y| i32::try_from(y).ok()),
            _ => None,
        }
        .ok_or_else(|| IngestError::Malformed { line, field: "year".into(), message: "expected an integer".into() })?;

        let mut texts = HashMap::new();
        for field in SECTIONS_OPTIONAL.iter().chain(SECTIONS_REQUIRED.iter()) {
            let text = match obj.get(*field) {
                None | Some(Value::Null) if SECTIONS_OPTIONAL.contains(field) => String::new(),
                _ => str_field(&obj, line, field)?,
            };
            texts.insert(*field, nfc(&text));
        }
        for field in SECTIONS_REQUIRED {
            if texts[field].trim().is_empty() {
                match opts.mode {
                    SchemaMode::Strict => {
                        return Err(IngestError::MissingSection { line, case_id, field: field.into() });
                    }
                    SchemaMode::Lenient => {
                        log::warn!("line {line}: case {case_id}: empty {field}, record skipped");
                        self.warnings.push(IngestWarning::MissingSectionSkipped { line, case_id, field: field.into() });
                        return Ok(());
                    }
                }
            }
        }

        let mut citation_source = match obj.get("citation_source") {
            Some(Value::String(s)) if s == "regex" => CitationSource::Regex,
            _ => CitationSource::Field,
        };
        let cited_articles = match obj.get("cited_articles") {
            None | Some(Value::Null) => {
                citation_source = CitationSource::Regex;
                self.warnings.push(IngestWarning::CitationsFromRegex { line, case_id: case_id.clone() });
                scan_citations(&texts["court_view"], &opts.default_law_code).into_iter().collect()
            }
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| {
                    v.as_str()
                        .ok_or_else(|| "expected a string".to_owned())
                        .and_then(|s| s.parse::<ArticleId>().map_err(|e| e.to_string()))
                })
                .collect::<Result<BTreeSet<_>, _>>()
                .map_err(|message| IngestError::Malformed { line, field: "cited_articles".into(), message })?,
            Some(_) => {
                return Err(IngestError::Malformed {
                    line,
                    field: "cited_articles".into(),
                    message: "expected a list of article identifiers".into(),
                })
            }
        };

        if !EXPECTED_YEARS.contains(&year) {
            log::warn!("line {line}: case {case_id}: year {year} outside {EXPECTED_YEARS:?}");
            self.warnings.push(IngestWarning::YearOutOfRange { line, case_id: case_id.clone(), year });
        }

        let mut take = |k: &str| texts.remove(k).unwrap_or_default();
        let case = CaseJudgment {
            case_id: case_id.clone(),
            year,
            header: take("header"),
            facts: take("facts"),
            court_view: take("court_view"),
            verdict: take("verdict"),
            conclusion: take("conclusion"),
            cited_articles,
            citation_source,
        };

        match self.by_id.get(&case_id) {
            Some(&idx) => match opts.mode {
                SchemaMode::Strict => return Err(IngestError::DuplicateId { line, case_id }),
                SchemaMode::Lenient => {
                    log::warn!("line {line}: duplicate case_id {case_id}, keeping the later record");
                    self.warnings.push(IngestWarning::DuplicateReplaced { line, case_id });
                    self.cases[idx] = case;
                }
            },
            None => {
                self.by_id.insert(case_id, self.cases.len());
                self.cases.push(case);
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn get(&self, case_id: &str) -> Option<&CaseJudgment> {
        self.by_id.get(case_id).map(|&i| &self.cases[i])
    }

    pub fn contains(&self, case_id: &str) -> bool {
        self.by_id.contains_key(case_id)
    }

    pub fn cases(&self) -> &[CaseJudgment] {
        &self.cases
    }

    pub fn iter(&self) -> impl Iterator<Item = &CaseJudgment> {
        self.cases.iter()
    }

    pub fn warnings(&self) -> &[IngestWarning] {
        &self.warnings
    }

    /// The corpus in its line-delimited record format.
    pub fn to_jsonl(&self) -> Vec<u8> {
        crate::io::to_jsonl(&self.cases).expect("case records always serialize")
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        crate::io::write_atomic(path, &self.to_jsonl())
    }

    /// SHA-256 of the emitted record bytes.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_jsonl()))
    }
}

fn str_field(obj: &Map<String, Value>, line: usize, field: &str) -> Result<String, IngestError> {
    match obj.get(field) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(IngestError::Malformed { line, field: field.into(), message: "expected a string".into() }),
        None => Err(IngestError::Malformed { line, field: field.into(), message: "missing".into() }),
    }
}

/// Summary statistics of a (labelled) case set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_cases: usize,
    pub n_positive: usize,
    pub n_negative: usize,
    pub mean_court_view_len: f64,
    pub mean_fact_len: f64,
    pub mean_reason_len: f64,
}

impl CorpusStats {
    /// Lengths are in characters. `annotations` supplies an optional label
    /// and reason text per annotated case; positives and negatives are
    /// counted independently of `n_cases`.
    pub fn compute<'a, C, A>(cases: C, annotations: A) -> CorpusStats
    where
        C: IntoIterator<Item = &'a CaseJudgment>,
        A: IntoIterator<Item = (Option<Label>, &'a str)>,
    {
        let mut stats = CorpusStats::default();
        let (mut cv, mut facts) = (0usize, 0usize);
        for case in cases {
            stats.n_cases += 1;
            cv += char_len(&case.court_view);
            facts += char_len(&case.facts);
        }
        let (mut reasons, mut n_reasons) = (0usize, 0usize);
        for (label, reason) in annotations {
            match label {
                Some(Label::Yes) => stats.n_positive += 1,
                Some(Label::No) => stats.n_negative += 1,
                None => {}
            }
            if !reason.is_empty() {
                reasons += char_len(reason);
                n_reasons += 1;
            }
        }
        let mean = |total: usize, n: usize| if n == 0 { 0.0 } else { total as f64 / n as f64 };
        stats.mean_court_view_len = mean(cv, stats.n_cases);
        stats.mean_fact_len = mean(facts, stats.n_cases);
        stats.mean_reason_len = mean(reasons, n_reasons);
        stats
    }
}
