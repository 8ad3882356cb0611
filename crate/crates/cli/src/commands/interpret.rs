// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;
use std::path::PathBuf;

use atri_core::filter::ReasonRecord;
use atri_core::interpret::{load_external_interpretation, CaseSource, Component, Exemplar, GenerationConfig, Interpreter, NReasons};
use atri_core::{Corpus, InterpretationSource};
use clap::Args;

use crate::error::{CliError, CliResult};
use crate::{find_concept, Context};

#[derive(Args, Debug)]
pub struct InterpretArgs {
    /// Concept specs (JSON list)
    #[arg(long)]
    pub concepts: Option<PathBuf>,
    #[arg(long)]
    pub concept: String,
    /// Reason records from `filter` (JSON lines)
    #[arg(long, required_unless_present_any = ["direct", "external"])]
    pub reasons: Option<PathBuf>,
    /// Ingested corpus; needed when --case-source is not extracted_reason
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// How many reasons to use: a count or `all`
    #[arg(long)]
    pub n_reasons: Option<NReasons>,
    /// Case text fed to the model: extracted_reason, court_view or fact_and_court_view
    #[arg(long)]
    pub case_source: Option<CaseSource>,
    /// Comma-separated parts to leave out: analysis, examples, positive, negative, discretion
    #[arg(long, value_delimiter = ',')]
    pub drop: Vec<Component>,
    /// Generate from the model's own knowledge, without case reasons
    #[arg(long, conflicts_with_all = ["reasons", "external"])]
    pub direct: bool,
    /// Import a judicial or expert interpretation from a text file
    #[arg(long, requires = "source", conflicts_with = "reasons")]
    pub external: Option<PathBuf>,
    /// Source of --external: judicial or expert
    #[arg(long, requires = "external")]
    pub source: Option<InterpretationSource>,
    /// Seed for reason subsampling
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Formatting exemplar replacing the built-in one (text)
    #[arg(long, requires = "exemplar_concept", conflicts_with = "external")]
    pub exemplar: Option<PathBuf>,
    /// Concept the exemplar interprets
    #[arg(long, requires = "exemplar")]
    pub exemplar_concept: Option<String>,
    /// Interpretation (JSON)
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(ctx: &Context, a: &InterpretArgs) -> CliResult<()> {
    let (concepts_path, specs) = ctx.load_concepts(a.concepts.as_deref())?;
    let spec = find_concept(&specs, &a.concept)?;
    let mut m = ctx.manifest("interpret");
    m.input("concepts", &concepts_path)?;
    m.param("concept", &a.concept);

    if let Some(path) = &a.external {
        let source = a.source.expect("clap requires --source");
        if source.is_generated() {
            return Err(CliError::usage(format!("--source must be judicial or expert, not {source}")));
        }
        m.input("external", path)?;
        m.param("source", source);
        let mut interp = load_external_interpretation(path, &spec.concept_id, source)?;
        interp.manifest_digest = Some(m.digest());
        interp.save(&a.out)?;
        m.finish(None, &[("interpretation", &a.out)], &a.out)?;
        println!("{}: imported {source} interpretation into {}", a.concept, a.out.display());
        return Ok(());
    }

    let g = &ctx.config.generation;
    let cfg = GenerationConfig {
        model_id: ctx.config.models.generator.clone(),
        n_reasons: a.n_reasons.unwrap_or(g.n_reasons),
        case_source: a.case_source.unwrap_or(g.case_source),
        drop: a.drop.iter().copied().collect::<BTreeSet<_>>(),
        temperature: g.temperature,
        seed: a.seed,
        max_tokens: g.max_tokens,
        max_retries: g.max_retries,
        min_cases: g.min_cases,
    };
    let prompts = ctx.prompts()?;
    m.prompts(&prompts);
    m.model("generator", &cfg.model_id);
    m.seed("reasons", cfg.seed);
    m.param("generation", &cfg);
    m.param("direct", a.direct);

    let corpus = load_corpus_if_needed(ctx, a, cfg.case_source)?;
    if let Some(c) = &corpus {
        m.corpus(c);
    }
    let gateway = ctx.gateway()?;
    let mut interpreter = Interpreter::new(&gateway, &prompts, cfg);
    if let (Some(path), Some(concept)) = (&a.exemplar, &a.exemplar_concept) {
        m.input("exemplar", path)?;
        m.param("exemplar_concept", concept);
        let text = std::fs::read_to_string(path).map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?;
        interpreter = interpreter.with_exemplar(Exemplar { concept: concept.clone(), text });
    }
    let mut interp = if a.direct {
        interpreter.generate_direct(&spec)?
    } else {
        let path = a.reasons.as_ref().expect("clap requires --reasons");
        m.input("reasons", path)?;
        let reasons: Vec<ReasonRecord> = atri_core::io::read_jsonl(path)?;
        let reasons: Vec<ReasonRecord> = reasons.into_iter().filter(|r| r.concept_id == spec.concept_id).collect();
        interpreter.generate(&spec, &reasons, corpus.as_ref())?
    };
    if !interp.valid {
        let problems: Vec<String> = interp.problems.iter().map(ToString::to_string).collect();
        log::warn!("{}: interpretation is structurally invalid: {}", a.concept, problems.join("; "));
    }
    interp.manifest_digest = Some(m.digest());
    interp.save(&a.out)?;
    m.summarize("valid", interp.valid);
    m.summarize("n_positive_cases", interp.positive_cases.len());
    m.summarize("n_negative_cases", interp.negative_cases.len());
    m.summarize("n_reasons_used", interp.case_ids().len());
    m.finish(Some(&gateway), &[("interpretation", &a.out)], &a.out)?;
    println!(
        "{}: {} interpretation from {} reasons written to {}{}",
        a.concept,
        interp.source,
        interp.case_ids().len(),
        a.out.display(),
        if interp.valid { "" } else { " (flagged invalid)" }
    );
    Ok(())
}

fn load_corpus_if_needed(ctx: &Context, a: &InterpretArgs, source: CaseSource) -> CliResult<Option<Corpus>> {
    let needed = source != CaseSource::ExtractedReason && !a.direct;
    if !needed && a.corpus.is_none() {
        return Ok(None);
    }
    if needed && a.corpus.is_none() && ctx.config.corpus.is_none() {
        return Err(CliError::usage("--case-source other than extracted_reason needs --corpus"));
    }
    Ok(Some(ctx.load_corpus(a.corpus.as_deref())?.1))
}
