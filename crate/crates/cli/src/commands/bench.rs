// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use atri_core::bench::{BenchConfig, Predictor};
use atri_core::{EntailmentExample, Interpretation, Method};
use clap::Args;

use crate::error::{CliError, CliResult};
use crate::render::render_text;
use crate::Context;

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Test examples from `filter --test-set-out` (JSON lines); repeatable
    #[arg(long = "test-set", required = true)]
    pub test_sets: Vec<PathBuf>,
    /// Concept specs (JSON list)
    #[arg(long)]
    pub concepts: Option<PathBuf>,
    /// Comma-separated: random, zero_shot, cot, atri, direct, judicial, expert
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<Method>,
    /// Interpretation files for the interpretation methods; repeatable
    #[arg(long = "interpretation")]
    pub interpretations: Vec<PathBuf>,
    /// Sampled responses per example (majority vote)
    #[arg(long)]
    pub n_reps: Option<u32>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Skip consistency judging
    #[arg(long)]
    pub no_judge: bool,
    /// Report (JSON)
    #[arg(long)]
    pub out: PathBuf,
    /// One prediction per method and example (JSON lines)
    #[arg(long)]
    pub ledger_out: Option<PathBuf>,
    /// Rendered tables, pooled and per concept
    #[arg(long)]
    pub text_out: Option<PathBuf>,
}

pub fn run(ctx: &Context, a: &BenchArgs) -> CliResult<()> {
    let (concepts_path, specs) = ctx.load_concepts(a.concepts.as_deref())?;
    let b = &ctx.config.bench;
    let cfg = BenchConfig {
        methods: if a.methods.is_empty() { b.methods.clone() } else { a.methods.clone() },
        model_id: ctx.config.models.predictor.clone(),
        judge_model_id: ctx.config.models.judge.clone(),
        n_reps: a.n_reps.unwrap_or(b.n_reps),
        seed: a.seed,
        temperature: b.temperature,
        max_tokens: b.max_tokens,
        parallelism: ctx.config.parallelism,
        judge: b.judge && !a.no_judge,
    };
    if cfg.n_reps == 0 {
        return Err(CliError::usage("--n-reps must be at least 1"));
    }
    let prompts = ctx.prompts()?;
    let mut m = ctx.manifest("bench");
    m.input("concepts", &concepts_path)?;
    m.prompts(&prompts);
    m.model("predictor", &cfg.model_id);
    m.model("judge", &cfg.judge_model_id);
    m.seed("bench", cfg.seed);
    m.param("methods", &cfg.methods);
    m.param("n_reps", cfg.n_reps);
    m.param("temperature", cfg.temperature);
    m.param("judge", cfg.judge);

    let mut examples: Vec<EntailmentExample> = Vec::new();
    for (i, path) in a.test_sets.iter().enumerate() {
        m.input(&format!("test_set.{i}"), path)?;
        examples.extend(atri_core::io::read_jsonl::<EntailmentExample>(path)?);
    }
    if examples.is_empty() {
        return Err(CliError::runtime("the test sets hold no examples"));
    }
    let mut interpretations: Vec<Interpretation> = Vec::new();
    for (i, path) in a.interpretations.iter().enumerate() {
        m.input(&format!("interpretation.{i}"), path)?;
        let interp = Interpretation::load(path).map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?;
        if !interp.valid {
            log::warn!("{}: interpretation for {} is flagged invalid", path.display(), interp.concept_id);
        }
        interpretations.push(interp);
    }

    let gateway = ctx.gateway()?;
    let run = Predictor::new(&gateway, &prompts, cfg).run_benchmark(&examples, &specs, &interpretations)?;
    let mut report = run.report;
    report.manifest_digest = Some(m.digest());
    atri_core::io::write_json(&a.out, &report)?;
    let mut outputs: Vec<(&str, &Path)> = vec![("report", &a.out)];
    if let Some(path) = &a.ledger_out {
        atri_core::io::write_jsonl(path, &run.ledger)?;
        outputs.push(("ledger", path));
    }
    let text = render_text(&[("report", &report)], true);
    if let Some(path) = &a.text_out {
        atri_core::io::write_atomic(path, text.as_bytes())?;
        outputs.push(("text", path));
    }
    let failed: Vec<_> = run.ledger.iter().filter(|p| p.error.is_some()).collect();
    m.summarize("n_examples", examples.len());
    m.summarize("n_predictions", run.ledger.len());
    m.summarize("n_failed", failed.len());
    m.finish(Some(&gateway), &outputs, &a.out)?;
    print!("{}", render_text(&[("report", &report)], false));
    if let Some(first) = failed.first() {
        return Err(CliError::provider(format!(
            "{} prediction(s) failed; first: {} {}: {}",
            failed.len(),
            first.method,
            first.case_id,
            first.error.as_deref().unwrap_or_default()
        )));
    }
    Ok(())
}
