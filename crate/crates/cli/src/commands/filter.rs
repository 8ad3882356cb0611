// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use atri_core::bench::build_test_set;
use atri_core::filter::{balance, Annotator, AnnotatorConfig, BalanceConfig, Ratio};
use atri_core::{Label, RetrievalIndex};
use clap::Args;

use super::{provider_failures, read_case_set, write_case_set};
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use crate::{find_concept, Context};

#[derive(Args, Debug)]
pub struct FilterArgs {
    /// Ingested corpus (JSON lines)
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Concept specs (JSON list)
    #[arg(long)]
    pub concepts: Option<PathBuf>,
    #[arg(long)]
    pub concept: String,
    /// D0 case set from `retrieve`
    #[arg(long = "in", value_name = "D0")]
    pub input: Option<PathBuf>,
    /// D1 case set, or the balanced set with --balance (JSON)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Reason records for the cases in --out (JSON lines)
    #[arg(long)]
    pub reasons: Option<PathBuf>,
    /// Down-sample positives to this positive:negative ratio, e.g. 1:1
    #[arg(long, value_name = "P:N")]
    pub balance: Option<Ratio>,
    /// Seed for balancing
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cap on the balanced set size
    #[arg(long, requires = "balance")]
    pub max_total: Option<usize>,
    /// Unbalanced D1 when --balance is given (JSON)
    #[arg(long, requires = "balance")]
    pub d1_out: Option<PathBuf>,
    /// Drop records whose reason is not copied from the court view
    #[arg(long)]
    pub strict: bool,
    /// Per-case problems (JSON lines)
    #[arg(long)]
    pub diagnostics_out: Option<PathBuf>,
    /// Build benchmark examples from D0 minus --exclude instead (always strict)
    #[arg(long, conflicts_with_all = ["input", "out", "reasons", "d1_out"])]
    pub test_set_out: Option<PathBuf>,
    /// Case sets whose ids must not enter the test set
    #[arg(long, requires = "test_set_out")]
    pub exclude: Vec<PathBuf>,
}

impl FilterArgs {
    fn balance_config(&self) -> Option<BalanceConfig> {
        self.balance.map(|target_ratio| BalanceConfig { target_ratio, seed: self.seed, max_total: self.max_total })
    }
}

pub fn run(ctx: &Context, a: &FilterArgs) -> CliResult<()> {
    let (concepts_path, specs) = ctx.load_concepts(a.concepts.as_deref())?;
    let spec = find_concept(&specs, &a.concept)?;
    let (_, corpus) = ctx.load_corpus(a.corpus.as_deref())?;
    let prompts = ctx.prompts()?;
    let annotator = AnnotatorConfig {
        model_id: ctx.config.models.annotator.clone(),
        temperature: ctx.config.filter.temperature,
        max_tokens: ctx.config.filter.max_tokens,
        parallelism: ctx.config.parallelism,
        strict: a.strict || ctx.config.filter.strict,
    };

    let mut m = ctx.manifest("filter");
    m.input("concepts", &concepts_path)?;
    m.corpus(&corpus);
    m.prompts(&prompts);
    m.model("annotator", &annotator.model_id);
    m.param("concept", &a.concept);
    m.param("annotator_temperature", annotator.temperature);
    m.param("annotator_max_tokens", annotator.max_tokens);
    if let Some(cfg) = a.balance_config() {
        m.seed("balance", cfg.seed);
        m.param("balance", cfg.target_ratio.to_string());
        m.param("max_total", cfg.max_total);
    }
    let gateway = ctx.gateway()?;

    if let Some(test_out) = &a.test_set_out {
        let mut exclusions = BTreeSet::new();
        for (i, path) in a.exclude.iter().enumerate() {
            m.input(&format!("exclude.{i}"), path)?;
            exclusions.extend(read_case_set(path)?.case_ids);
        }
        m.param("mode", "test_set");
        let index = RetrievalIndex::build(Arc::new(corpus))?;
        let balancing = a.balance_config();
        let ts = build_test_set(&index, &spec, &gateway, &prompts, annotator, &exclusions, balancing.as_ref())?;
        write_diagnostics(a, &ts.diagnostics, &mut m)?;
        provider_failures(&ts.diagnostics)?;
        for w in &ts.balance_warnings {
            log::warn!("{}: balancing: {w:?}", a.concept);
        }
        atri_core::io::write_jsonl(test_out, &ts.examples)?;
        let n_yes = ts.examples.iter().filter(|e| e.gold_label == Label::Yes).count();
        m.summarize("n_examples", ts.examples.len());
        m.summarize("n_yes", n_yes);
        m.summarize("n_no", ts.examples.len() - n_yes);
        m.summarize("removed", &ts.removed);
        m.summarize("n_diagnostics", ts.diagnostics.len());
        let mut outputs: Vec<(&str, &Path)> = vec![("test_set", test_out)];
        if let Some(p) = &a.diagnostics_out {
            outputs.push(("diagnostics", p));
        }
        m.finish(Some(&gateway), &outputs, test_out)?;
        println!(
            "{}: {} test examples ({} yes, {} no), {} excluded cases removed",
            a.concept,
            ts.examples.len(),
            n_yes,
            ts.examples.len() - n_yes,
            ts.removed.len()
        );
        return Ok(());
    }

    let need = |flag: &Option<PathBuf>, name: &str| {
        flag.clone().ok_or_else(|| CliError::usage(format!("{name} is required unless --test-set-out is given")))
    };
    let (input, out, reasons_path) = (need(&a.input, "--in")?, need(&a.out, "--out")?, need(&a.reasons, "--reasons")?);
    m.input("d0", &input)?;
    m.param("mode", "d1");
    m.param("strict", annotator.strict);
    let d0 = read_case_set(&input)?;
    if d0.concept_id != spec.concept_id {
        return Err(CliError::usage(format!("{} holds concept {}, not {}", input.display(), d0.concept_id, spec.concept_id)));
    }
    let outcome = Annotator::new(&gateway, &prompts, annotator).build_d1(&d0, &spec, &corpus)?;
    write_diagnostics(a, &outcome.diagnostics, &mut m)?;
    provider_failures(&outcome.diagnostics)?;
    m.summarize("counts", &outcome.counts);

    let digest = m.digest();
    let mut outputs: Vec<(&str, &Path)> = Vec::new();
    let (set, records) = match a.balance_config() {
        Some(cfg) => {
            let b = balance(&outcome.d1, &outcome.records, &cfg)?;
            for w in &b.warnings {
                log::warn!("{}: balancing: {w:?}", a.concept);
            }
            m.summarize("n_positive", b.n_positive);
            m.summarize("n_negative", b.n_negative);
            m.summarize("balance_warnings", &b.warnings);
            if let Some(path) = &a.d1_out {
                write_case_set(path, &outcome.d1, &digest)?;
                outputs.push(("d1", path));
            }
            let keep = b.set.id_set();
            let records: Vec<_> = outcome.records.iter().filter(|r| keep.contains(r.case_id.as_str())).cloned().collect();
            (b.set, records)
        }
        None => (outcome.d1.clone(), outcome.records.clone()),
    };
    write_case_set(&out, &set, &digest)?;
    atri_core::io::write_jsonl(&reasons_path, &records)?;
    outputs.push(("case_set", &out));
    outputs.push(("reasons", &reasons_path));
    if let Some(p) = &a.diagnostics_out {
        outputs.push(("diagnostics", p));
    }
    m.summarize("n_out", set.len());
    m.finish(Some(&gateway), &outputs, &out)?;
    let c = &outcome.counts;
    println!(
        "{}: {} of {} cases relevant, {} kept in {} ({} quarantined, {} unparsable)",
        a.concept,
        c.n_relevant,
        c.n_input,
        set.len(),
        out.display(),
        c.n_quarantined,
        c.n_parse_failed
    );
    Ok(())
}

fn write_diagnostics(a: &FilterArgs, diagnostics: &[atri_core::filter::Diagnostic], m: &mut RunManifest) -> CliResult<()> {
    if !diagnostics.is_empty() {
        log::warn!("{}: {} diagnostics", a.concept, diagnostics.len());
    }
    if let Some(path) = &a.diagnostics_out {
        atri_core::io::write_jsonl(path, diagnostics)?;
    }
    m.summarize("n_diagnostics", diagnostics.len());
    Ok(())
}
