// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use atri_core::BenchReport;
use clap::Args;

use crate::error::{CliError, CliResult};
use crate::render::{render_csv, render_text};
use crate::Context;

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Report from `bench` (JSON)
    #[arg(long)]
    pub input: PathBuf,
    /// Second report shown side by side
    #[arg(long)]
    pub compare: Option<PathBuf>,
    /// Plain-text table; printed to stdout when neither output is given
    #[arg(long)]
    pub out_txt: Option<PathBuf>,
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    /// Add one table per concept to the text output
    #[arg(long)]
    pub per_concept: bool,
}

pub fn load_report(path: &Path) -> CliResult<BenchReport> {
    let bytes = std::fs::read(path).map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::runtime(format!("{}: schema mismatch: {e}", path.display())))
}

fn label(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into())
}

pub fn run(ctx: &Context, a: &ReportArgs) -> CliResult<()> {
    let mut m = ctx.manifest("report");
    m.input("input", &a.input)?;
    let base = load_report(&a.input)?;
    let mut labelled = vec![(label(&a.input), base)];
    if let Some(path) = &a.compare {
        m.input("compare", path)?;
        let mut other = label(path);
        if other == labelled[0].0 {
            labelled[0].0 = "input".into();
            other = "compare".into();
        }
        labelled.push((other, load_report(path)?));
    }
    m.param("labels", labelled.iter().map(|(l, _)| l.as_str()).collect::<Vec<_>>());
    m.param("per_concept", a.per_concept);
    let reports: Vec<(&str, &BenchReport)> = labelled.iter().map(|(l, r)| (l.as_str(), r)).collect();
    let text = render_text(&reports, a.per_concept);
    let csv = render_csv(&reports);

    let mut outputs: Vec<(&str, &Path)> = Vec::new();
    if let Some(path) = &a.out_txt {
        atri_core::io::write_atomic(path, text.as_bytes())?;
        outputs.push(("text", path));
    }
    if let Some(path) = &a.out_csv {
        atri_core::io::write_atomic(path, csv.as_bytes())?;
        outputs.push(("csv", path));
    }
    match outputs.first() {
        Some(&(_, primary)) => {
            let primary = primary.to_path_buf();
            m.finish(None, &outputs, &primary)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}
