// SPDX-License-Identifier: Apache-2.0

//! Candidate retrieval: article postings plus exact concept matching in the
//! court view.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{ArticleId, ConceptSpec, Corpus};
use crate::text::nfc;

/// Position of a case set in the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stage {
    D0,
    D1,
    #[serde(rename = "D_balanced")]
    DBalanced,
    #[serde(rename = "test")]
    Test,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::D0 => "D0",
            Stage::D1 => "D1",
            Stage::DBalanced => "D_balanced",
            Stage::Test => "test",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CaseSetError {
    #[error("illegal stage transition {from} -> {to}")]
    Transition { from: Stage, to: Stage },
    #[error("case {0} is not in the parent set")]
    NotInParent(String),
    #[error("duplicate case id {0}")]
    Duplicate(String),
}

/// An ordered, duplicate-free set of case ids for one concept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseSet {
    pub concept_id: String,
    pub stage: Stage,
    pub case_ids: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub provenance: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest_digest: Option<String>,
}

impl CaseSet {
    pub fn new(concept_id: impl Into<String>, stage: Stage, case_ids: Vec<String>) -> Result<Self, CaseSetError> {
        let mut seen = BTreeSet::new();
        for id in &case_ids {
            if !seen.insert(id) {
                return Err(CaseSetError::Duplicate(id.clone()));
            }
        }
        Ok(CaseSet { concept_id: concept_id.into(), stage, case_ids, provenance: BTreeMap::new(), manifest_digest: None })
    }

    pub fn len(&self) -> usize {
        self.case_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.case_ids.is_empty()
    }

    pub fn contains(&self, case_id: &str) -> bool {
        self.case_ids.iter().any(|c| c == case_id)
    }

    pub fn id_set(&self) -> BTreeSet<&str> {
        self.case_ids.iter().map(String::as_str).collect()
    }

    /// Derives the next-stage set. Only D0 → D1 → D_balanced is allowed and
    /// every id must come from `self`.
    pub fn advance(&self, to: Stage, case_ids: Vec<String>) -> Result<CaseSet, CaseSetError> {
        let legal = matches!((self.stage, to), (Stage::D0, Stage::D1) | (Stage::D1, Stage::DBalanced));
        if !legal {
            return Err(CaseSetError::Transition { from: self.stage, to });
        }
        let parent = self.id_set();
        if let Some(bad) = case_ids.iter().find(|c| !parent.contains(c.as_str())) {
            return Err(CaseSetError::NotInParent(bad.clone()));
        }
        let mut next = CaseSet::new(self.concept_id.clone(), to, case_ids)?;
        next.provenance = self.provenance.iter().filter(|(k, _)| next.contains(k)).map(|(k, v)| (k.clone(), v.clone())).collect();
        Ok(next)
    }

    /// Deterministically moves `fraction` of the ids into a held-out set of
    /// stage `test`. Both halves stay in ascending order.
    pub fn split_holdout(&self, fraction: f64, seed: u64) -> (CaseSet, CaseSet) {
        let mut ids = self.case_ids.clone();
        ids.sort();
        let n_test = ((fraction.clamp(0.0, 1.0) * ids.len() as f64).round() as usize).min(ids.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ids.shuffle(&mut rng);
        let mut test: Vec<String> = ids[..n_test].to_vec();
        let mut keep: Vec<String> = ids[n_test..].to_vec();
        test.sort();
        keep.sort();
        let mut kept = self.clone();
        kept.case_ids = keep;
        let mut held = self.clone();
        held.stage = Stage::Test;
        held.case_ids = test;
        (kept, held)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RetrievalError {
    #[error("cannot index an empty corpus")]
    EmptyCorpus,
}

/// Article → sorted case-id postings over a shared corpus.
#[derive(Debug, Clone)]
pub struct RetrievalIndex {
    corpus: Arc<Corpus>,
    postings: BTreeMap<ArticleId, Vec<String>>,
}

impl RetrievalIndex {
    pub fn build(corpus: Arc<Corpus>) -> Result<RetrievalIndex, RetrievalError> {
        if corpus.is_empty() {
            return Err(RetrievalError::EmptyCorpus);
        }
        let mut postings: BTreeMap<ArticleId, Vec<String>> = BTreeMap::new();
        for case in corpus.iter() {
            for article in &case.cited_articles {
                postings.entry(article.clone()).or_default().push(case.case_id.clone());
            }
        }
        for ids in postings.values_mut() {
            ids.sort();
            ids.dedup();
        }
        Ok(RetrievalIndex { corpus, postings })
    }

    pub fn corpus(&self) -> &Arc<Corpus> {
        &self.corpus
    }

    /// Cases citing `article`, ascending. Empty when nothing cites it.
    pub fn postings(&self, article: &ArticleId) -> &[String] {
        self.postings.get(article).map_or(&[], Vec::as_slice)
    }

    pub fn articles(&self) -> impl Iterator<Item = (&ArticleId, usize)> {
        self.postings.iter().map(|(a, ids)| (a, ids.len()))
    }

    /// Cases that cite the concept's article and contain the concept as a
    /// verbatim substring of the court view, in ascending case-id order.
    pub fn retrieve_d0(&self, spec: &ConceptSpec) -> Retrieved {
        let concept = nfc(&spec.concept);
        let Some(posting) = self.postings.get(&spec.article_id) else {
            log::warn!("concept {}: no case cites {}", spec.concept_id, spec.article_id);
            return Retrieved {
                set: CaseSet::new(spec.concept_id.clone(), Stage::D0, Vec::new()).expect("empty set"),
                unknown_article: true,
            };
        };
        let ids: Vec<String> = posting
            .iter()
            .filter(|id| self.corpus.get(id).is_some_and(|case| case.court_view.contains(concept.as_str())))
            .cloned()
            .collect();
        let mut set = CaseSet::new(spec.concept_id.clone(), Stage::D0, ids).expect("postings are deduplicated");
        for id in &set.case_ids {
            set.provenance.insert(id.clone(), format!("cites {}; court view mentions concept", spec.article_id));
        }
        Retrieved { set, unknown_article: false }
    }
}

#[derive(Debug, Clone)]
pub struct Retrieved {
    pub set: CaseSet,
    /// No case in the corpus cites the concept's article.
    pub unknown_article: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CaseJudgment, CitationSource, IngestOptions};

    fn case(id: &str, article: &str, facts: &str, court_view: &str) -> CaseJudgment {
        CaseJudgment {
            case_id: id.into(),
            year: 2018,
            header: String::new(),
            facts: facts.into(),
            court_view: court_view.into(),
            verdict: "判决如下".into(),
            conclusion: String::new(),
            cited_articles: [article.parse().unwrap()].into_iter().collect(),
            citation_source: CitationSource::Field,
        }
    }

    fn dwelling() -> ConceptSpec {
        ConceptSpec {
            concept_id: "dwelling".into(),
            concept: "户".into(),
            article_id: "PRC-CL:264".parse().unwrap(),
            article_text: "入户盗窃".into(),
            crime: None,
        }
    }

    fn index(cases: Vec<CaseJudgment>) -> RetrievalIndex {
        RetrievalIndex::build(Arc::new(Corpus::from_cases(cases, &IngestOptions::default()).unwrap())).unwrap()
    }

    #[test]
    fn postings_and_substring_filter() {
        let idx = index(vec![
            case("c3", "PRC-CL:264", "事实", "被告人入户盗窃，数额较大。"),
            case("c1", "PRC-CL:264", "被告人入户", "被告人盗窃，数额较大。"),
            case("c2", "PRC-CL:264", "事实", "本院认为，该处不属于户。"),
            case("c4", "PRC-CL:133", "事实", "入户"),
        ]);
        assert_eq!(idx.postings(&"PRC-CL:264".parse().unwrap()).len(), 3);
        assert!(idx.postings(&"PRC-CL:999".parse().unwrap()).is_empty());
        let got = idx.retrieve_d0(&dwelling());
        // c1 mentions the concept only in the facts.
        assert_eq!(got.set.case_ids, vec!["c2", "c3"]);
        assert_eq!(got.set.stage, Stage::D0);
    }

    #[test]
    fn unknown_article_is_empty_not_error() {
        let idx = index(vec![case("c1", "PRC-CL:133", "f", "逃逸")]);
        let got = idx.retrieve_d0(&dwelling());
        assert!(got.set.is_empty());
        assert!(got.unknown_article);
    }

    #[test]
    fn one_char_substitution_not_retrieved() {
        let spec = ConceptSpec { concept: "情节严重".into(), article_text: "情节严重的".into(), ..dwelling() };
        let idx = index(vec![
            case("a", "PRC-CL:264", "f", "本院认为，情节特重。"),
            case("b", "PRC-CL:264", "f", "本院认为，情节严重。"),
            case("c", "PRC-CL:264", "f", "本院认为，情节严肃。"),
        ]);
        assert_eq!(idx.retrieve_d0(&spec).set.case_ids, vec!["b"]);
    }

    #[test]
    fn empty_corpus_rejected() {
        assert_eq!(RetrievalIndex::build(Arc::new(Corpus::default())).unwrap_err(), RetrievalError::EmptyCorpus);
    }

    #[test]
    fn stage_transitions_forward_only() {
        let d0 = CaseSet::new("x", Stage::D0, vec!["a".into(), "b".into()]).unwrap();
        let d1 = d0.advance(Stage::D1, vec!["a".into()]).unwrap();
        assert!(d1.advance(Stage::DBalanced, vec!["a".into()]).is_ok());
        assert!(matches!(d1.advance(Stage::D1, vec![]), Err(CaseSetError::Transition { .. })));
        assert!(matches!(d0.advance(Stage::DBalanced, vec![]), Err(CaseSetError::Transition { .. })));
        assert_eq!(d0.advance(Stage::D1, vec!["z".into()]).unwrap_err(), CaseSetError::NotInParent("z".into()));
        assert!(CaseSet::new("x", Stage::D0, vec!["a".into(), "a".into()]).is_err());
    }

    #[test]
    fn holdout_split_is_disjoint_and_deterministic() {
        let d0 = CaseSet::new("x", Stage::D0, (0..20).map(|i| format!("c{i:02}")).collect()).unwrap();
        let (a1, t1) = d0.split_holdout(0.25, 3);
        let (a2, t2) = d0.split_holdout(0.25, 3);
        assert_eq!((a1.case_ids.clone(), t1.case_ids.clone()), (a2.case_ids, t2.case_ids));
        assert_eq!(t1.len(), 5);
        assert_eq!(t1.stage, Stage::Test);
        assert!(t1.case_ids.iter().all(|c| !a1.contains(c)));
        assert_eq!(a1.len() + t1.len(), 20);
    }

    #[test]
    fn case_set_serialization_shape() {
        let s = CaseSet::new("x", Stage::DBalanced, vec!["a".into()]).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"concept_id":"x","stage":"D_balanced","case_ids":["a"]}"#);
    }
}
