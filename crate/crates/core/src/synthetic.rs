// SPDX-License-Identifier: Apache-2.0

//! Seeded synthetic judgments with planted reasons, and a scripted fixture
//! backend that answers every pipeline prompt about them.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{ArticleId, CaseJudgment, CitationSource, ConceptSpec, SectionMarkers, Sections};
use crate::interpret::render_interpretation;
use crate::label::Label;
use crate::llm::{FixtureRule, FixtureScript, Language};

/// Template markers identifying each prompt kind in the Chinese assets.
pub mod marker {
    pub const FILTER: &str = "是否存在具体的句子解释";
    pub const CLASSIFY: &str = "是否适用于案件中的情况";
    pub const EXTRACT: &str = "提取出法官对模糊概念的认定理由";
    pub const GENERATE: &str = "请你阅读给出的JSON数据";
    pub const JUDGE: &str = "一致性进行1-10的打分";
    pub const ENTAIL: &str = "根据裁判文书中的事实描述";
    pub const SUMMARIZE: &str = "用不超过200字概括";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseKind {
    /// Court view states the reason for the decision on the concept.
    Detailed,
    /// Court view names the concept without reasoning about it.
    MentionOnly,
    /// Concept appears only in the facts, or the case cites another article.
    Distractor,
}

/// Ground truth for one synthetic case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SidecarRecord {
    pub case_id: String,
    pub concept_id: String,
    pub label: Label,
    pub planted_reason: String,
    pub kind: CaseKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub n_cases: usize,
    pub concepts: Vec<ConceptSpec>,
    pub positive_fraction: f64,
    pub detail_fraction: f64,
    pub distractor_fraction: f64,
}

impl SyntheticConfig {
    pub fn new(seed: u64, n_cases: usize, concepts: Vec<ConceptSpec>, positive_fraction: f64) -> Self {
        SyntheticConfig { seed, n_cases, concepts, positive_fraction, detail_fraction: 1.0, distractor_fraction: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SyntheticError {
    #[error("at least one concept is required")]
    NoConcepts,
    #[error("{name} must lie in [0, 1], got {value}")]
    Fraction { name: &'static str, value: String },
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub cases: Vec<CaseJudgment>,
    pub sidecar: Vec<SidecarRecord>,
}

struct Flavor {
    pos_fact: String,
    neg_fact: String,
    pos_reason: String,
    neg_reason: String,
}

fn flavor(concept: &str, place: &str, victim: &str) -> Flavor {
    match concept {
        "户" => Flavor {
            pos_fact: format!("进入被害人{victim}位于{place}的住宅，窃取现金若干"),
            neg_fact: format!("进入被害人{victim}在{place}经营的店铺，窃取现金若干"),
            pos_reason: format!("被告人进入的{place}住宅系被害人家庭生活场所，与外界相对隔离，应当认定为“户”。"),
            neg_reason: format!("被告人进入的{place}店铺系对外营业场所，不具备家庭生活功能，不应认定为“户”。"),
        },
        "逃逸" => Flavor {
            pos_fact: format!("驾驶机动车在{place}路口与被害人{victim}相撞，随后驾车离开现场"),
            neg_fact: format!("驾驶机动车在{place}路口与被害人{victim}相撞，随后将被害人送医并报警"),
            pos_reason: format!("被告人在{place}路口肇事后为逃避法律追究驾车离开现场，属于交通运输肇事后“逃逸”。"),
            neg_reason: format!("被告人在{place}路口肇事后将被害人送往医院并主动报警，不属于交通运输肇事后“逃逸”。"),
        },
        c => Flavor {
            pos_fact: format!("在{place}实施涉案行为，被害人为{victim}，现场情形为甲类"),
            neg_fact: format!("在{place}实施涉案行为，被害人为{victim}，现场情形为乙类"),
            pos_reason: format!("{place}的甲类情形符合“{c}”的认定标准，应当认定为“{c}”。"),
            neg_reason: format!("{place}的乙类情形不符合“{c}”的认定标准，不应认定为“{c}”。"),
        },
    }
}

const NAMES: [&str; 8] = ["张某", "李某", "王某", "赵某", "刘某", "陈某", "杨某", "黄某"];
const VICTIMS: [&str; 6] = ["周某", "吴某", "郑某", "孙某", "钱某", "冯某"];

/// Unique place string for a case serial. Fixed width keeps serials from
/// being substrings of each other.
pub fn place(serial: usize) -> String {
    format!("幸福路{serial:05}号")
}

fn near_miss(concept: &str) -> String {
    let mut chars: Vec<char> = concept.chars().collect();
    if let Some(last) = chars.last_mut() {
        *last = '○';
    }
    chars.into_iter().collect()
}

fn check_fraction(name: &'static str, value: f64) -> Result<(), SyntheticError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(SyntheticError::Fraction { name, value: value.to_string() })
    }
}

/// Generates the corpus. Concepts are assigned round-robin after a seeded
/// shuffle; within each concept exactly round(fraction · n) cases are
/// distractors, mention-only and positive respectively.
pub fn generate(cfg: &SyntheticConfig) -> Result<SyntheticCorpus, SyntheticError> {
    if cfg.concepts.is_empty() {
        return Err(SyntheticError::NoConcepts);
    }
    check_fraction("positive_fraction", cfg.positive_fraction)?;
    check_fraction("detail_fraction", cfg.detail_fraction)?;
    check_fraction("distractor_fraction", cfg.distractor_fraction)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut assignment: Vec<usize> = (0..cfg.n_cases).map(|i| i % cfg.concepts.len()).collect();
    assignment.shuffle(&mut rng);

    let mut plan: Vec<(Label, CaseKind)> = vec![(Label::No, CaseKind::Detailed); cfg.n_cases];
    for k in 0..cfg.concepts.len() {
        let mut members: Vec<usize> = (0..cfg.n_cases).filter(|&i| assignment[i] == k).collect();
        let n = members.len();
        let n_pos = (cfg.positive_fraction * n as f64).round() as usize;
        members.shuffle(&mut rng);
        for (j, &i) in members.iter().enumerate() {
            plan[i].0 = if j < n_pos { Label::Yes } else { Label::No };
        }
        members.shuffle(&mut rng);
        let n_dis = (cfg.distractor_fraction * n as f64).round() as usize;
        let n_mention = ((1.0 - cfg.detail_fraction) * (n - n_dis) as f64).round() as usize;
        for (j, &i) in members.iter().enumerate() {
            plan[i].1 = if j < n_dis {
                CaseKind::Distractor
            } else if j < n_dis + n_mention {
                CaseKind::MentionOnly
            } else {
                CaseKind::Detailed
            };
        }
    }

    let mut out = SyntheticCorpus { cases: Vec::with_capacity(cfg.n_cases), sidecar: Vec::with_capacity(cfg.n_cases) };
    for (i, (&k, &(label, kind))) in assignment.iter().zip(&plan).enumerate() {
        let serial = i + 1;
        let spec = &cfg.concepts[k];
        let (case, sidecar) = build_case(cfg.seed, serial, spec, label, kind, &mut rng);
        out.cases.push(case);
        out.sidecar.push(sidecar);
    }
    Ok(out)
}

fn build_case(
    seed: u64,
    serial: usize,
    spec: &ConceptSpec,
    label: Label,
    kind: CaseKind,
    rng: &mut ChaCha8Rng,
) -> (CaseJudgment, SidecarRecord) {
    let case_id = format!("syn{seed}-{serial:05}");
    let name = NAMES[rng.gen_range(0..NAMES.len())];
    let victim = VICTIMS[rng.gen_range(0..VICTIMS.len())];
    let year = rng.gen_range(2010..=2020);
    let month = rng.gen_range(1..=12);
    let place = place(serial);
    let crime = spec.crime.clone().unwrap_or_else(|| "相关犯罪".into());
    let concept = &spec.concept;
    let f = flavor(concept, &place, victim);
    let (fact_body, reason) = match label {
        Label::Yes => (f.pos_fact, f.pos_reason),
        Label::No => (f.neg_fact, f.neg_reason),
    };

    let mut facts = format!("经审理查明，{year}年{month}月，被告人{name}{fact_body}。");
    let mut cited = spec.article_id.clone();
    let opening = format!("本院认为，被告人{name}在{place}实施的行为已构成{crime}。");
    let closing = "公诉机关指控的事实清楚，证据确实、充分。";
    let (court_view, planted_reason) = match kind {
        CaseKind::Detailed => (format!("{opening}{reason}{closing}"), reason),
        CaseKind::MentionOnly => {
            (format!("{opening}辩护人提出的关于“{concept}”的意见，本院在量刑时一并考虑。{closing}"), String::new())
        }
        CaseKind::Distractor => {
            if serial.is_multiple_of(2) {
                facts.push_str(&format!("案发地点被害人称之为“{concept}”。"));
                (format!("{opening}关于“{}”的辩解，与本案无关。{closing}", near_miss(concept)), String::new())
            } else {
                cited = ArticleId::new(spec.article_id.law(), spec.article_id.number() + 1000).expect("valid article id");
                (format!("{opening}{reason}{closing}"), String::new())
            }
        }
    };
    let case = CaseJudgment {
        case_id: case_id.clone(),
        year,
        header: format!("某市人民法院刑事判决书（{year}）刑初{serial}号"),
        facts,
        court_view,
        verdict: format!("被告人{name}犯{crime}，判处有期徒刑{}年。", rng.gen_range(1..=7)),
        conclusion: "如不服本判决，可在接到判决书之次日起十日内提出上诉。".into(),
        cited_articles: [cited].into_iter().collect(),
        citation_source: CitationSource::Field,
    };
    let sidecar = SidecarRecord { case_id, concept_id: spec.concept_id.clone(), label, planted_reason, kind };
    (case, sidecar)
}

/// The case as raw marked-up text for segmentation.
pub fn render_raw(case: &CaseJudgment) -> String {
    SectionMarkers::default().render(&Sections {
        header: case.header.clone(),
        facts: case.facts.clone(),
        court_view: case.court_view.clone(),
        verdict: case.verdict.clone(),
        conclusion: case.conclusion.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FixtureOptions {
    /// Fraction of detailed cases whose entailment replies carry the wrong
    /// label (exact quota, seeded).
    pub entailment_error_rate: f64,
    pub seed: u64,
    /// Extraction replies are not verbatim copies of the court view.
    pub corrupt_extraction: bool,
    pub judge_score: u8,
}

impl Default for FixtureOptions {
    fn default() -> Self {
        FixtureOptions { entailment_error_rate: 0.0, seed: 0, corrupt_extraction: false, judge_score: 8 }
    }
}

/// Ids of detailed cases whose entailment replies are flipped.
pub fn flipped_cases(corpus: &SyntheticCorpus, opts: &FixtureOptions) -> BTreeSet<String> {
    let mut detailed: Vec<&str> =
        corpus.sidecar.iter().filter(|s| s.kind == CaseKind::Detailed).map(|s| s.case_id.as_str()).collect();
    let n = (opts.entailment_error_rate.clamp(0.0, 1.0) * detailed.len() as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    detailed.shuffle(&mut rng);
    detailed[..n].iter().map(|s| s.to_string()).collect()
}

fn verdict(label: Label) -> &'static str {
    match label {
        Label::Yes => "[[是]]",
        Label::No => "[[否]]",
    }
}

/// A truthful scripted backend for `corpus` (Chinese prompts).
pub fn fixture_script(corpus: &SyntheticCorpus, concepts: &[ConceptSpec], opts: &FixtureOptions) -> FixtureScript {
    let mut script = FixtureScript::default();
    script.push(FixtureRule::new([marker::SUMMARIZE], "事实概要：被告人实施了涉案行为，具体情形见事实描述。"));
    script.push(FixtureRule::new([marker::JUDGE], format!("模型生成的理由与法庭观点中的理由基本一致。[[{}]]", opts.judge_score)));
    for spec in concepts {
        script.push(FixtureRule::new(
            [marker::GENERATE.to_owned(), format!("\"模糊概念\": {}", spec.concept)],
            sample_interpretation(&spec.concept),
        ));
    }

    let flipped = flipped_cases(corpus, opts);
    for s in &corpus.sidecar {
        let serial = place_of(&s.case_id);
        let detailed = s.kind == CaseKind::Detailed;
        let filter = if detailed {
            "法庭观点中存在解释该概念是否适用的具体句子。[[是]]"
        } else {
            "法庭观点仅提及该概念，没有解释其是否适用。[[否]]"
        };
        script.push(FixtureRule::new([marker::FILTER, &serial], filter));
        script.push(FixtureRule::new([marker::CLASSIFY, &serial], format!("法官对该情形作出了认定。{}", verdict(s.label))));
        let extraction = if opts.corrupt_extraction {
            format!("据查明，{}", s.planted_reason.replace('。', "，并无异议。"))
        } else {
            s.planted_reason.clone()
        };
        script.push(FixtureRule::new([marker::EXTRACT, &serial], extraction));
        let (label, reason) = if flipped.contains(&s.case_id) {
            (s.label.flip(), "根据事实描述，案件情形与该概念的典型特征不一致。".to_owned())
        } else {
            (s.label, format!("根据事实描述，{}", s.planted_reason))
        };
        script.push(FixtureRule::new([marker::ENTAIL, &serial], format!("{reason}{}", verdict(label))));
    }
    script
}

fn place_of(case_id: &str) -> String {
    let serial = case_id.rsplit('-').next().and_then(|s| s.parse().ok()).unwrap_or(0);
    place(serial)
}

/// A well-formed Chinese interpretation with five cases per side.
pub fn sample_interpretation(concept: &str) -> String {
    let positive: Vec<String> = (1..=5).map(|i| format!("第{i}类情形具备“{concept}”的全部特征，法院认定适用。")).collect();
    let negative: Vec<String> = (1..=5).map(|i| format!("第{i}类情形欠缺“{concept}”的关键特征，法院认定不适用。")).collect();
    render_interpretation(
        concept,
        Language::Zh,
        &format!("“{concept}”的认定需要结合案件事实，考察其核心特征是否具备。"),
        &positive,
        &negative,
        &format!("法官在认定“{concept}”时，应综合考虑案件的具体情形。"),
    )
}

/// The two bundled sample concepts.
pub fn sample_concepts() -> Vec<ConceptSpec> {
    vec![
        ConceptSpec {
            concept_id: "dwelling".into(),
            concept: "户".into(),
            article_id: ArticleId::new("PRC-CL", 264).expect("valid article id"),
            article_text: "第二百六十四条：盗窃公私财物，数额较大的，或者多次盗窃、入户盗窃、携带凶器盗窃、扒窃的，处三年以下有期徒刑、拘役或者管制，并处或者单处罚金；数额巨大或者有其他严重情节的，处三年以上十年以下有期徒刑，并处罚金；数额特别巨大或者有其他特别严重情节的，处十年以上有期徒刑或者无期徒刑，并处罚金或者没收财产。".into(),
            crime: Some("盗窃罪".into()),
        },
        ConceptSpec {
            concept_id: "flee".into(),
            concept: "逃逸".into(),
            article_id: ArticleId::new("PRC-CL", 133).expect("valid article id"),
            article_text: "第一百三十三条：违反交通运输管理法规，因而发生重大事故，致人重伤、死亡或者使公私财产遭受重大损失的，处三年以下有期徒刑或者拘役；交通运输肇事后逃逸或者有其他特别恶劣情节的，处三年以上七年以下有期徒刑；因逃逸致人死亡的，处七年以上有期徒刑。".into(),
            crime: Some("交通肇事罪".into()),
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::segment_judgment;

    fn corpus(seed: u64) -> SyntheticCorpus {
        generate(&SyntheticConfig::new(seed, 200, sample_concepts(), 0.67)).unwrap()
    }

    #[test]
    fn quotas_are_exact() {
        let c = corpus(1);
        assert_eq!(c.cases.len(), 200);
        for spec in sample_concepts() {
            let mine: Vec<_> = c.sidecar.iter().filter(|s| s.concept_id == spec.concept_id).collect();
            assert_eq!(mine.len(), 100);
            assert_eq!(mine.iter().filter(|s| s.label == Label::Yes).count(), 67);
        }
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        assert_eq!(corpus(1).cases, corpus(1).cases);
        assert_ne!(corpus(1).cases, corpus(2).cases);
    }

    #[test]
    fn planted_reasons_are_in_court_view() {
        let c = corpus(3);
        for (case, s) in c.cases.iter().zip(&c.sidecar) {
            assert!(case.court_view.contains(&s.planted_reason));
            assert!(!s.planted_reason.is_empty());
        }
    }

    #[test]
    fn kinds_behave() {
        let mut cfg = SyntheticConfig::new(4, 100, sample_concepts(), 0.5);
        cfg.detail_fraction = 0.5;
        cfg.distractor_fraction = 0.2;
        let c = generate(&cfg).unwrap();
        let specs = sample_concepts();
        let count = |k| c.sidecar.iter().filter(|s| s.kind == k).count();
        assert_eq!(count(CaseKind::Distractor), 20);
        assert_eq!(count(CaseKind::MentionOnly), 40);
        for (case, s) in c.cases.iter().zip(&c.sidecar) {
            let spec = specs.iter().find(|x| x.concept_id == s.concept_id).unwrap();
            let retrievable = case.cites(&spec.article_id) && case.court_view.contains(&spec.concept);
            assert_eq!(retrievable, s.kind != CaseKind::Distractor, "{}", case.case_id);
            if s.kind == CaseKind::MentionOnly {
                assert!(s.planted_reason.is_empty());
            }
        }
    }

    #[test]
    fn raw_rendering_segments_back() {
        let c = corpus(5);
        let seg = segment_judgment(&render_raw(&c.cases[0])).unwrap();
        assert!(seg.is_clean());
        assert_eq!(seg.sections.court_view, c.cases[0].court_view);
        assert_eq!(seg.sections.facts, c.cases[0].facts);
    }

    #[test]
    fn flip_quota() {
        let c = corpus(6);
        let opts = FixtureOptions { entailment_error_rate: 0.4, seed: 9, ..Default::default() };
        assert_eq!(flipped_cases(&c, &opts).len(), 80);
    }

    #[test]
    fn bad_fractions_rejected() {
        assert!(generate(&SyntheticConfig::new(1, 10, sample_concepts(), 1.5)).is_err());
        assert!(generate(&SyntheticConfig::new(1, 10, Vec::new(), 0.5)).is_err());
    }
}
