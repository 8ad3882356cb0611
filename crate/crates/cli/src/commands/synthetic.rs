// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use atri_core::synthetic::{fixture_script, generate, render_raw, sample_concepts, FixtureOptions, SyntheticConfig};
use clap::Args;
use serde_json::json;

use super::check_fraction;
use crate::error::{CliError, CliResult};
use crate::Context;

#[derive(Args, Debug)]
pub struct SyntheticArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub n_cases: usize,
    /// Concept file; the built-in sample concepts when absent
    #[arg(long)]
    pub concepts: Option<PathBuf>,
    /// Share of each concept's detailed cases where the concept applies
    #[arg(long, default_value_t = 0.67)]
    pub positive_fraction: f64,
    /// Share of each concept's cases whose court view explains the decision
    #[arg(long, default_value_t = 1.0)]
    pub detail_fraction: f64,
    /// Share of cases that nearly match but must not be retrieved
    #[arg(long, default_value_t = 0.0)]
    pub distractor_fraction: f64,
    /// Write unsegmented judgment text (`raw`) instead of section fields
    #[arg(long)]
    pub raw: bool,
    /// Corpus (JSON lines)
    #[arg(long)]
    pub out: PathBuf,
    /// Ground-truth labels and planted reasons (JSON lines)
    #[arg(long)]
    pub sidecar_out: Option<PathBuf>,
    /// The concept specs used (JSON)
    #[arg(long)]
    pub concepts_out: Option<PathBuf>,
    /// Scripted model replies consistent with the ground truth (JSON)
    #[arg(long)]
    pub fixture_out: Option<PathBuf>,
    /// Share of detailed cases the scripted predictor gets wrong
    #[arg(long, default_value_t = 0.0)]
    pub error_rate: f64,
    /// Script extractions that paraphrase instead of copying sentences
    #[arg(long)]
    pub corrupt_extraction: bool,
    /// Score the scripted judge returns
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u8).range(1..=10))]
    pub judge_score: u8,
}

pub fn run(ctx: &Context, a: &SyntheticArgs) -> CliResult<()> {
    check_fraction("--positive-fraction", a.positive_fraction)?;
    check_fraction("--detail-fraction", a.detail_fraction)?;
    check_fraction("--distractor-fraction", a.distractor_fraction)?;
    check_fraction("--error-rate", a.error_rate)?;
    let mut m = ctx.manifest("generate-synthetic");
    let concepts = match a.concepts.as_deref().map(Path::to_path_buf).or_else(|| ctx.config.concepts.clone()) {
        Some(_) => {
            let (path, specs) = ctx.load_concepts(a.concepts.as_deref())?;
            m.input("concepts", &path)?;
            specs
        }
        None => sample_concepts(),
    };
    if a.n_cases == 0 {
        return Err(CliError::usage("--n-cases must be at least 1"));
    }
    let mut cfg = SyntheticConfig::new(a.seed, a.n_cases, concepts.clone(), a.positive_fraction);
    cfg.detail_fraction = a.detail_fraction;
    cfg.distractor_fraction = a.distractor_fraction;
    m.seed("corpus", a.seed);
    m.param("n_cases", a.n_cases);
    m.param("positive_fraction", a.positive_fraction);
    m.param("detail_fraction", a.detail_fraction);
    m.param("distractor_fraction", a.distractor_fraction);
    m.param("raw", a.raw);
    let syn = generate(&cfg)?;

    let bytes = if a.raw {
        let records: Vec<_> = syn
            .cases
            .iter()
            .map(|c| json!({"case_id": c.case_id, "year": c.year, "raw": render_raw(c), "cited_articles": c.cited_articles}))
            .collect();
        atri_core::io::to_jsonl(&records).map_err(|e| CliError::runtime(e.to_string()))?
    } else {
        atri_core::io::to_jsonl(&syn.cases).map_err(|e| CliError::runtime(e.to_string()))?
    };
    atri_core::io::write_atomic(&a.out, &bytes)?;
    let mut outputs: Vec<(&str, &Path)> = vec![("corpus", &a.out)];
    if let Some(path) = &a.sidecar_out {
        atri_core::io::write_jsonl(path, &syn.sidecar)?;
        outputs.push(("sidecar", path));
    }
    if let Some(path) = &a.concepts_out {
        atri_core::io::write_json(path, &concepts)?;
        outputs.push(("concepts", path));
    }
    if let Some(path) = &a.fixture_out {
        let opts = FixtureOptions {
            entailment_error_rate: a.error_rate,
            seed: a.seed,
            corrupt_extraction: a.corrupt_extraction,
            judge_score: a.judge_score,
        };
        m.param("error_rate", a.error_rate);
        m.param("corrupt_extraction", a.corrupt_extraction);
        m.param("judge_score", a.judge_score);
        atri_core::io::write_json(path, &fixture_script(&syn, &concepts, &opts))?;
        outputs.push(("fixture", path));
    }
    m.summarize("n_cases", syn.cases.len());
    m.finish(None, &outputs, &a.out)?;
    println!("wrote {} synthetic cases to {}", syn.cases.len(), a.out.display());
    Ok(())
}
