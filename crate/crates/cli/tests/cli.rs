// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

fn atri(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_atri"))
        .current_dir(dir)
        .env_remove("ATRI_LLM_API_KEY")
        .env_remove("ATRI_JUDGE_API_KEY")
        .args(args)
        .output()
        .expect("spawn atri")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = atri(dir, args);
    assert_eq!(out.status.code(), Some(0), "atri {}: {}", args.join(" "), stderr(&out));
    out
}

/// A small bench report built through the binary.
fn bench_report(dir: &Path) {
    let g = ["--fixture", "fixture.json", "--cache-dir", "cache"];
    let run = |args: &[&str]| ok(dir, &[&g[..], args].concat());
    ok(
        dir,
        &[
            "generate-synthetic",
            "--seed",
            "5",
            "--n-cases",
            "40",
            "--out",
            "corpus.jsonl",
            "--sidecar-out",
            "sidecar.jsonl",
            "--concepts-out",
            "concepts.json",
            "--fixture-out",
            "fixture.json",
            "--error-rate",
            "0.3",
        ],
    );
    let common = ["--corpus", "corpus.jsonl", "--concepts", "concepts.json", "--concept", "dwelling"];
    run(&[&["filter"][..], &common, &["--test-set-out", "test.jsonl"]].concat());
    run(&[
        "bench",
        "--concepts",
        "concepts.json",
        "--test-set",
        "test.jsonl",
        "--methods",
        "random,zero_shot,cot",
        "--seed",
        "3",
        "--out",
        "report.json",
    ]);
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    for flag in ["--help", "--version"] {
        let out = ok(dir.path(), &[flag]);
        assert!(!out.stdout.is_empty());
    }
    let out = ok(dir.path(), &["bench", "--help"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("--test-set"));
}

#[test]
fn usage_errors_exit_two_on_one_line() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["frobnicate"][..], &[], &["retrieve", "--concept"], &["retrieve", "--concept", "x", "--out", "o", "--bogus"]] {
        let out = atri(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = stderr(&out);
        assert!(err.starts_with("error[usage]: "), "{err}");
        assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    }
}

#[test]
fn unknown_concept_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["generate-synthetic", "--n-cases", "10", "--out", "c.jsonl", "--concepts-out", "k.json"]);
    let out =
        atri(dir.path(), &["retrieve", "--corpus", "c.jsonl", "--concepts", "k.json", "--concept", "nope", "--out", "d0.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("nope"));
}

#[test]
fn bad_config_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "parallelism = 0\n").unwrap();
    std::fs::write(dir.path().join("typo.toml"), "paralelism = 4\n").unwrap();
    for file in ["bad.toml", "typo.toml", "missing.toml"] {
        let out = atri(dir.path(), &["--config", file, "report", "--input", "r.json"]);
        assert_eq!(out.status.code(), Some(3), "{file}: {}", stderr(&out));
        assert!(stderr(&out).starts_with("error[config]: "));
    }
}

#[test]
fn live_without_key_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["generate-synthetic", "--n-cases", "10", "--out", "c.jsonl", "--concepts-out", "k.json"]);
    let out = atri(
        dir.path(),
        &["--live", "interpret", "--concepts", "k.json", "--concept", "dwelling", "--direct", "--out", "i.json"],
    );
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
    assert!(stderr(&out).contains("ATRI_LLM_API_KEY"));
}

#[test]
fn missing_input_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = atri(dir.path(), &["ingest", "--input", "absent.jsonl", "--out", "c.jsonl"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error[runtime]: "));
}

#[test]
fn offline_backend_refuses_model_calls() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["generate-synthetic", "--n-cases", "10", "--out", "c.jsonl", "--concepts-out", "k.json"]);
    let out = atri(dir.path(), &["interpret", "--concepts", "k.json", "--concept", "dwelling", "--direct", "--out", "i.json"]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}

#[test]
fn report_rendering_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    bench_report(d);
    for round in ["a", "b"] {
        ok(
            d,
            &[
                "report",
                "--input",
                "report.json",
                "--out-txt",
                &format!("{round}.txt"),
                "--out-csv",
                &format!("{round}.csv"),
                "--per-concept",
            ],
        );
    }
    for ext in ["txt", "csv"] {
        assert_eq!(std::fs::read(d.join(format!("a.{ext}"))).unwrap(), std::fs::read(d.join(format!("b.{ext}"))).unwrap());
    }
    let csv = std::fs::read_to_string(d.join("a.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("method,acc,ma_p,ma_r,ma_f,cs,n_yes,n_no,n_invalid"));
    assert_eq!(csv.lines().count(), 4);
    let txt = std::fs::read_to_string(d.join("a.txt")).unwrap();
    for name in ["Random", "Zero-Shot", "Chain-of-Thought", "Concept dwelling"] {
        assert!(txt.contains(name), "{name} missing from\n{txt}");
    }
    assert!(d.join("report.json.manifest.json").exists());

    let stdout = String::from_utf8(ok(d, &["report", "--input", "report.json"]).stdout).unwrap();
    assert!(!stdout.contains("Concept dwelling"));
    assert!(txt.starts_with(stdout.trim_end()), "pooled table differs:\n{stdout}");
}

#[test]
fn report_compare_puts_runs_side_by_side() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    bench_report(d);
    std::fs::copy(d.join("report.json"), d.join("other.json")).unwrap();
    ok(d, &["report", "--input", "report.json", "--compare", "other.json", "--out-csv", "cmp.csv", "--out-txt", "cmp.txt"]);
    let csv = std::fs::read_to_string(d.join("cmp.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("method,report.acc,"), "{header}");
    assert!(header.contains(",other.acc,"), "{header}");
    for line in csv.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let half = (cells.len() - 1) / 2;
        assert_eq!(cells[1..=half], cells[half + 1..], "identical reports must give identical halves");
    }
}

#[test]
fn report_rejects_foreign_json() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("x.json"), "{\"hello\": 1}").unwrap();
    let out = atri(dir.path(), &["report", "--input", "x.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn custom_exemplar_enters_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["generate-synthetic", "--n-cases", "20", "--out", "c.jsonl", "--concepts-out", "k.json", "--fixture-out", "f.json"]);
    std::fs::write(d.join("e0.md"), "【概念】逃逸\n").unwrap();
    let base = ["--fixture", "f.json", "interpret", "--concepts", "k.json", "--concept", "dwelling", "--direct"];
    ok(d, &[&base[..], &["--out", "a.json"]].concat());
    ok(d, &[&base[..], &["--exemplar", "e0.md", "--exemplar-concept", "逃逸", "--out", "b.json"]].concat());
    let manifest = |f: &str| -> serde_json::Value {
        serde_json::from_str(&std::fs::read_to_string(d.join(format!("{f}.manifest.json"))).unwrap()).unwrap()
    };
    let (a, b) = (manifest("a.json"), manifest("b.json"));
    assert!(a["inputs"].get("exemplar").is_none());
    assert!(b["inputs"].get("exemplar").is_some());
    assert_ne!(a["manifest_digest"], b["manifest_digest"]);

    let out = atri(d, &[&base[..], &["--exemplar", "e0.md", "--out", "c.json"]].concat());
    assert_eq!(out.status.code(), Some(2));
}
