// SPDX-License-Identifier: Apache-2.0

//! Independent reimplementations checked against the library.

use std::sync::Arc;

use atri_core::bench::{compute_metrics, majority_vote};
use atri_core::corpus::IngestOptions;
use atri_core::synthetic::{generate, sample_concepts, SyntheticConfig};
use atri_core::{ConceptSpec, Corpus, Label, RetrievalIndex, Vote};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Confusion matrix with rows = predicted {yes, no, invalid}, columns =
/// gold {yes, no}.
pub fn oracle_metrics(preds: &[Vote], golds: &[Label]) -> [f64; 4] {
    let mut m = [[0usize; 2]; 3];
    for (p, g) in preds.iter().zip(golds) {
        let row = match p {
            Vote::Yes => 0,
            Vote::No => 1,
            Vote::Invalid => 2,
        };
        let col = if *g == Label::Yes { 0 } else { 1 };
        m[row][col] += 1;
    }
    let total = preds.len() as f64;
    let acc = (m[0][0] + m[1][1]) as f64 / total;
    let div = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let p_yes = div(m[0][0], m[0][0] + m[0][1]);
    let p_no = div(m[1][1], m[1][0] + m[1][1]);
    let r_yes = div(m[0][0], m[0][0] + m[1][0] + m[2][0]);
    let r_no = div(m[1][1], m[0][1] + m[1][1] + m[2][1]);
    let f = |p: f64, r: f64| if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
    [acc, (p_yes + p_no) / 2.0, (r_yes + r_no) / 2.0, (f(p_yes, r_yes) + f(p_no, r_no)) / 2.0]
}

/// Largest absolute difference between library and oracle over `n` random
/// prediction/gold vectors.
pub fn metric_max_error(n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let len = rng.gen_range(1..=200);
        let p_invalid = rng.gen_range(0.0..0.3);
        let preds: Vec<Vote> = (0..len)
            .map(|_| match rng.gen::<f64>() {
                x if x < p_invalid => Vote::Invalid,
                x if x < (1.0 + p_invalid) / 2.0 => Vote::Yes,
                _ => Vote::No,
            })
            .collect();
        let golds: Vec<Label> = (0..len).map(|_| if rng.gen_bool(0.6) { Label::Yes } else { Label::No }).collect();
        let got = compute_metrics(&preds, &golds).expect("equal lengths");
        let got = [got.accuracy, got.macro_precision, got.macro_recall, got.macro_f1];
        for (g, w) in got.iter().zip(oracle_metrics(&preds, &golds)) {
            worst = worst.max((g - w).abs());
        }
    }
    worst
}

/// Hand-written majority table: Y/N/I per vote, then the expected label.
pub const VOTE_TABLE: &str = "
YYY Y  YYN Y  YYI Y  YNY Y  YNN N  YNI I  YIY Y  YIN I  YII Y
NYY Y  NYN N  NYI I  NNY N  NNN N  NNI N  NIY I  NIN N  NII N
IYY Y  IYN I  IYI Y  INY I  INN N  INI N  IIY Y  IIN N  III I";

pub fn vote(c: char) -> Vote {
    match c {
        'Y' => Vote::Yes,
        'N' => Vote::No,
        _ => Vote::Invalid,
    }
}

/// (table rows checked, mismatches including all permutations).
pub fn vote_table_mismatches() -> (usize, Vec<String>) {
    let entries: Vec<&str> = VOTE_TABLE.split_whitespace().collect();
    let mut bad = Vec::new();
    for pair in entries.chunks(2) {
        let votes: Vec<Vote> = pair[0].chars().map(vote).collect();
        let want = vote(pair[1].chars().next().expect("label"));
        for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            let permuted: Vec<Vote> = perm.iter().map(|&i| votes[i]).collect();
            if majority_vote(&permuted) != want {
                bad.push(format!("{} {perm:?}", pair[0]));
            }
        }
    }
    (entries.len() / 2, bad)
}

pub fn brute_force(corpus: &Corpus, spec: &ConceptSpec) -> Vec<String> {
    let mut ids: Vec<String> = corpus
        .cases()
        .iter()
        .filter(|c| c.cited_articles.contains(&spec.article_id))
        .filter(|c| c.court_view.contains(&spec.concept))
        .map(|c| c.case_id.clone())
        .collect();
    ids.sort();
    ids
}

/// Mismatching (corpus, concept) pairs over `n` random synthetic corpora of
/// at most 500 cases.
pub fn retrieval_mismatches(n: u64, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = 0;
    for i in 0..n {
        let mut cfg = SyntheticConfig::new(i, rng.gen_range(1..=500), sample_concepts(), rng.gen_range(0.0..=1.0));
        cfg.detail_fraction = rng.gen_range(0.0..=1.0);
        cfg.distractor_fraction = rng.gen_range(0.0..=0.5);
        let syn = generate(&cfg).expect("valid config");
        let corpus = Arc::new(Corpus::from_cases(syn.cases, &IngestOptions::default()).expect("unique ids"));
        let index = RetrievalIndex::build(corpus.clone()).expect("index");
        let mut specs = sample_concepts();
        let mut near = specs[1].clone();
        near.concept = "逃".into();
        specs.push(near);
        for spec in &specs {
            if index.retrieve_d0(spec).set.case_ids != brute_force(&corpus, spec) {
                mismatches += 1;
            }
        }
    }
    mismatches
}
