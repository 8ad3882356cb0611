// SPDX-License-Identifier: Apache-2.0

//! Plain-text and CSV tables for benchmark reports. Output depends only on
//! the report contents.

use std::fmt::Write;

use atri_core::bench::MethodScores;
use atri_core::BenchReport;

pub const CSV_COLUMNS: [&str; 9] = ["method", "acc", "ma_p", "ma_r", "ma_f", "cs", "n_yes", "n_no", "n_invalid"];

const METRIC_HEADS: [&str; 8] = ["Acc", "Ma-P", "Ma-R", "Ma-F", "CS", "Yes", "No", "Inv"];
const CELL: usize = 7;

/// Row label for a method key.
pub fn display_name(method: &str) -> String {
    match method {
        "random" => "Random".into(),
        "zero_shot" => "Zero-Shot".into(),
        "cot" => "Chain-of-Thought".into(),
        "judicial" => "Judicial Interpretation".into(),
        "expert" => "Expert Interpretation".into(),
        "direct" => "Direct Interpretation".into(),
        "atri" => "ATRI".into(),
        other => other.into(),
    }
}

/// Methods in first-seen order across reports.
fn method_union<'a>(reports: impl Iterator<Item = &'a BenchReport>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in reports {
        for m in r.method_order() {
            if !out.contains(&m) {
                out.push(m);
            }
        }
    }
    out
}

fn cells(s: Option<&MethodScores>) -> [String; 8] {
    match s {
        None => std::array::from_fn(|_| "-".to_owned()),
        Some(s) => [
            format!("{:.2}", s.acc * 100.0),
            format!("{:.2}", s.ma_p * 100.0),
            format!("{:.2}", s.ma_r * 100.0),
            format!("{:.2}", s.ma_f * 100.0),
            s.cs.map(|c| format!("{c:.3}")).unwrap_or_else(|| "/".into()),
            s.n_yes.to_string(),
            s.n_no.to_string(),
            s.n_invalid.to_string(),
        ],
    }
}

fn table(out: &mut String, labels: &[&str], rows: &[(String, Vec<Option<&MethodScores>>)]) {
    let name_width = rows.iter().map(|(n, _)| n.chars().count()).chain([6]).max().unwrap_or(6);
    let group_width = METRIC_HEADS.len() * CELL;
    if labels.len() > 1 {
        let _ = write!(out, "{:name_width$}", "");
        for label in labels {
            let _ = write!(out, " | {label:^group_width$}");
        }
        out.push('\n');
    }
    let _ = write!(out, "{:name_width$}", "Method");
    for _ in labels {
        out.push_str(" |");
        for h in METRIC_HEADS {
            let _ = write!(out, "{h:>CELL$}");
        }
    }
    out.push('\n');
    let rule_width = name_width + labels.len() * (group_width + 2);
    out.push_str(&"-".repeat(rule_width));
    out.push('\n');
    for (name, scores) in rows {
        let pad = name_width - name.chars().count();
        let _ = write!(out, "{name}{}", " ".repeat(pad));
        for s in scores {
            out.push_str(" |");
            for c in cells(*s) {
                let _ = write!(out, "{c:>CELL$}");
            }
        }
        out.push('\n');
    }
}

/// One table over pooled examples (one column group per report), then one
/// per concept when `per_concept` is set. Metrics are percentages; CS is on
/// the 1-10 scale with wrong labels counted as 0.
pub fn render_text(reports: &[(&str, &BenchReport)], per_concept: bool) -> String {
    let labels: Vec<&str> = reports.iter().map(|(l, _)| *l).collect();
    let methods = method_union(reports.iter().map(|(_, r)| *r));
    let mut out = String::new();
    let counts: Vec<String> = reports.iter().map(|(l, r)| format!("{l}: {} examples", r.n_examples)).collect();
    let _ = writeln!(out, "Legal Concept Entailment ({})\n", counts.join("; "));
    let rows: Vec<(String, Vec<Option<&MethodScores>>)> =
        methods.iter().map(|m| (display_name(m), reports.iter().map(|(_, r)| r.overall.get(m)).collect())).collect();
    table(&mut out, &labels, &rows);
    if per_concept {
        let mut concepts: Vec<&String> = reports.iter().flat_map(|(_, r)| r.per_concept.keys()).collect();
        concepts.sort();
        concepts.dedup();
        for concept in concepts {
            let _ = writeln!(out, "\nConcept {concept}\n");
            let rows: Vec<(String, Vec<Option<&MethodScores>>)> = methods
                .iter()
                .map(|m| {
                    (display_name(m), reports.iter().map(|(_, r)| r.per_concept.get(concept).and_then(|c| c.get(m))).collect())
                })
                .collect();
            table(&mut out, &labels, &rows);
        }
    }
    out
}

fn csv_fields(s: Option<&MethodScores>) -> [String; 8] {
    match s {
        None => std::array::from_fn(|_| String::new()),
        Some(s) => [
            s.acc.to_string(),
            s.ma_p.to_string(),
            s.ma_r.to_string(),
            s.ma_f.to_string(),
            s.cs.map(|c| c.to_string()).unwrap_or_default(),
            s.n_yes.to_string(),
            s.n_no.to_string(),
            s.n_invalid.to_string(),
        ],
    }
}

/// Pooled scores as CSV. With several reports each metric column is
/// prefixed by the report label, e.g. `base.acc`.
pub fn render_csv(reports: &[(&str, &BenchReport)]) -> String {
    let mut header: Vec<String> = vec![CSV_COLUMNS[0].to_owned()];
    for (label, _) in reports {
        for col in &CSV_COLUMNS[1..] {
            header.push(if reports.len() == 1 { (*col).to_owned() } else { format!("{label}.{col}") });
        }
    }
    let mut out = header.join(",");
    out.push('\n');
    for m in method_union(reports.iter().map(|(_, r)| *r)) {
        let mut row = vec![m.clone()];
        for (_, r) in reports {
            row.extend(csv_fields(r.overall.get(&m)));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use atri_core::bench::BenchConfig;
    use atri_core::{InterpretationSource, Method};
    use std::collections::BTreeMap;

    fn scores(acc: f64, cs: Option<f64>) -> MethodScores {
        MethodScores {
            acc,
            ma_p: 0.5,
            ma_r: 0.25,
            ma_f: 1.0 / 3.0,
            cs,
            cs_scored_only: cs,
            n: 4,
            n_yes: 2,
            n_no: 1,
            n_invalid: 1,
        }
    }

    fn report(methods: &[(Method, MethodScores)]) -> BenchReport {
        let overall: BTreeMap<String, MethodScores> = methods.iter().map(|(m, s)| (m.to_string(), s.clone())).collect();
        BenchReport {
            config: BenchConfig { methods: methods.iter().map(|(m, _)| *m).collect(), ..Default::default() },
            per_concept: [("dwelling".to_owned(), overall.clone())].into_iter().collect(),
            overall,
            n_examples: 4,
            manifest_digest: None,
        }
    }

    #[test]
    fn one_method_one_row() {
        let r = report(&[(Method::Random, scores(0.5, None))]);
        let csv = render_csv(&[("r", &r)]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1], format!("random,0.5,0.5,0.25,{},,2,1,1", 1.0 / 3.0));
    }

    #[test]
    fn text_uses_percentages_and_table_order() {
        let atri = Method::WithInterpretation(InterpretationSource::Atri);
        let r = report(&[(atri, scores(0.7503, Some(5.946))), (Method::Random, scores(0.5166, None))]);
        let text = render_text(&[("r", &r)], false);
        let atri_line = text.lines().find(|l| l.starts_with("ATRI")).unwrap();
        assert!(atri_line.contains("75.03") && atri_line.contains("5.946"), "{atri_line}");
        let random_line = text.lines().find(|l| l.starts_with("Random")).unwrap();
        assert!(random_line.contains(" /"));
        let a = text.find("ATRI").unwrap();
        assert!(a < text.find("Random").unwrap());
    }

    #[test]
    fn compare_puts_reports_side_by_side() {
        let a = report(&[(Method::ZeroShot, scores(0.7, Some(5.0)))]);
        let b = report(&[(Method::ZeroShot, scores(0.6, Some(4.0))), (Method::Cot, scores(0.65, Some(4.5)))]);
        let csv = render_csv(&[("a", &a), ("b", &b)]);
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("method,a.acc,a.ma_p"));
        assert!(lines[0].contains(",b.acc,"));
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("cot,,,,,,,,,0.65,"));
        let text = render_text(&[("a", &a), ("b", &b)], true);
        let zs = text.lines().find(|l| l.starts_with("Zero-Shot")).unwrap();
        assert!(zs.contains("70.00") && zs.contains("60.00"));
        assert!(text.contains("Concept dwelling"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let r = report(&[(Method::Cot, scores(0.61, Some(3.2)))]);
        assert_eq!(render_text(&[("r", &r)], true), render_text(&[("r", &r)], true));
        assert_eq!(render_csv(&[("r", &r)]), render_csv(&[("r", &r)]));
    }
}
