// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use atri_core::corpus::{IngestOptions, SchemaMode};
use atri_core::Corpus;
use clap::Args;

use crate::error::{CliError, CliResult};
use crate::Context;

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// Judgments, one JSON object per line, with section fields or a `raw` text field
    #[arg(long)]
    pub input: PathBuf,
    /// Normalized corpus (JSON lines)
    #[arg(long)]
    pub out: PathBuf,
    /// Skip records with empty required sections and keep the last duplicate
    #[arg(long)]
    pub lenient: bool,
    /// Law code for article citations recovered from the text
    #[arg(long, default_value = "PRC-CL")]
    pub law_code: String,
    /// Ingest warnings (JSON lines)
    #[arg(long)]
    pub warnings_out: Option<PathBuf>,
}

pub fn run(ctx: &Context, a: &IngestArgs) -> CliResult<()> {
    let mode = if a.lenient { SchemaMode::Lenient } else { SchemaMode::Strict };
    let opts = IngestOptions { mode, default_law_code: a.law_code.clone() };
    let mut m = ctx.manifest("ingest");
    m.input("input", &a.input)?;
    m.param("schema_mode", mode);
    m.param("law_code", &a.law_code);

    let corpus = Corpus::ingest(&a.input, &opts).map_err(|e| CliError::from(e).context(a.input.display()))?;
    if corpus.is_empty() {
        return Err(CliError::runtime(format!("{}: no judgments", a.input.display())));
    }
    corpus.write(&a.out)?;
    m.corpus(&corpus);
    m.summarize("n_cases", corpus.len());
    m.summarize("n_warnings", corpus.warnings().len());

    let mut outputs: Vec<(&str, &Path)> = vec![("corpus", &a.out)];
    if let Some(path) = &a.warnings_out {
        atri_core::io::write_jsonl(path, corpus.warnings())?;
        outputs.push(("warnings", path));
    }
    m.finish(None, &outputs, &a.out)?;
    println!("ingested {} cases into {} ({} warnings)", corpus.len(), a.out.display(), corpus.warnings().len());
    Ok(())
}
