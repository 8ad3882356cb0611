// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use atri_core::filter::{Diagnostic, DiagnosticKind};
use atri_core::CaseSet;

use crate::error::{CliError, CliResult};

pub mod bench;
pub mod filter;
pub mod ingest;
pub mod interpret;
pub mod report;
pub mod retrieve;
pub mod synthetic;

pub fn read_case_set(path: &Path) -> CliResult<CaseSet> {
    atri_core::io::read_json(path).map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
}

pub fn write_case_set(path: &Path, set: &CaseSet, manifest_digest: &str) -> CliResult<()> {
    let mut set = set.clone();
    set.manifest_digest = Some(manifest_digest.to_owned());
    Ok(atri_core::io::write_json(path, &set)?)
}

/// Provider failures recorded as per-case diagnostics become a provider
/// error once the diagnostics are on disk.
pub fn provider_failures(diagnostics: &[Diagnostic]) -> CliResult<()> {
    let failed: Vec<&Diagnostic> = diagnostics.iter().filter(|d| d.kind == DiagnosticKind::ProviderError).collect();
    match failed.first() {
        None => Ok(()),
        Some(first) => Err(CliError::provider(format!(
            "{} model call(s) failed; first: case {}: {}",
            failed.len(),
            first.case_id,
            first.detail
        ))),
    }
}

pub fn check_fraction(name: &str, value: f64) -> CliResult<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(CliError::usage(format!("{name} must lie in [0, 1], got {value}")))
    }
}
