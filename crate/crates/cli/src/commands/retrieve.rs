// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::sync::Arc;

use atri_core::RetrievalIndex;
use clap::Args;

use super::{check_fraction, write_case_set};
use crate::error::CliResult;
use crate::{find_concept, Context};

#[derive(Args, Debug)]
pub struct RetrieveArgs {
    /// Ingested corpus (JSON lines)
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Concept specs (JSON list)
    #[arg(long)]
    pub concepts: Option<PathBuf>,
    #[arg(long)]
    pub concept: String,
    /// D0 case set (JSON)
    #[arg(long)]
    pub out: PathBuf,
    /// Hold out this share of D0 for testing; --out then receives the rest
    #[arg(long, requires = "holdout_out")]
    pub holdout: Option<f64>,
    /// Held-out part of D0 (JSON)
    #[arg(long, requires = "holdout")]
    pub holdout_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn run(ctx: &Context, a: &RetrieveArgs) -> CliResult<()> {
    if let Some(f) = a.holdout {
        check_fraction("--holdout", f)?;
    }
    let (concepts_path, specs) = ctx.load_concepts(a.concepts.as_deref())?;
    let spec = find_concept(&specs, &a.concept)?;
    let (_, corpus) = ctx.load_corpus(a.corpus.as_deref())?;

    let mut m = ctx.manifest("retrieve");
    m.input("concepts", &concepts_path)?;
    m.corpus(&corpus);
    m.param("concept", &a.concept);

    let index = RetrievalIndex::build(Arc::new(corpus))?;
    let retrieved = index.retrieve_d0(&spec);
    if retrieved.unknown_article {
        log::warn!("no case cites {}", spec.article_id);
    }
    m.summarize("n_d0", retrieved.set.len());
    m.summarize("unknown_article", retrieved.unknown_article);

    let mut outputs: Vec<(&str, &Path)> = vec![("d0", &a.out)];
    let (keep, held) = match (a.holdout, &a.holdout_out) {
        (Some(fraction), Some(path)) => {
            m.param("holdout", fraction);
            m.seed("holdout", a.seed);
            let (keep, held) = retrieved.set.split_holdout(fraction, a.seed);
            outputs.push(("holdout", path));
            (keep, Some((held, path)))
        }
        _ => (retrieved.set, None),
    };
    let digest = m.digest();
    write_case_set(&a.out, &keep, &digest)?;
    if let Some((held, path)) = &held {
        write_case_set(path, held, &digest)?;
        m.summarize("n_holdout", held.len());
    }
    m.summarize("n_out", keep.len());
    m.finish(None, &outputs, &a.out)?;
    match held {
        Some((held, _)) => println!("{}: {} cases, {} held out", a.concept, keep.len(), held.len()),
        None => println!("{}: {} cases", a.concept, keep.len()),
    }
    Ok(())
}
