//! Golden-file tests for every subcommand. Set `UPDATE_GOLDEN=1` to rewrite
//! the expected files after an intentional output change.

mod support;

use std::fs;
use std::process::Command;

use support::{
    compare, files_under, fixtures, golden_cases, golden_dir, produce, run, store, SCORE_FIXTURE,
};

/// Runs the named case from the shared case table against its golden directory.
fn golden(case: &str) {
    let scratch = tempfile::tempdir().unwrap();
    let (_, args, code) = golden_cases(scratch.path())
        .into_iter()
        .find(|(name, _, _)| *name == case)
        .unwrap();
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let actual = produce(case, &args, code).unwrap_or_else(|e| panic!("{e}"));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        store(case, &actual);
        return;
    }
    compare(case, &actual).unwrap_or_else(|e| panic!("{e}"));
}

#[test]
fn extract_mini_kb() {
    golden("extract_mini");
}

#[test]
fn extract_one_hop() {
    golden("extract_h1");
}

#[test]
fn extract_lenient_skips_bad_line() {
    golden("extract_lenient");
}

#[test]
fn extract_strict_rejects_bad_line() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run(
        &[
            "extract",
            "--kb",
            "mini_kb_bad_line.jsonl",
            "--roots",
            "roots_dish.json",
            "--out",
            "{out}",
        ],
        tmp.path(),
    );
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("line 11"));
}

#[test]
fn extract_missing_roots_is_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run(
        &[
            "extract",
            "--kb",
            "mini_kb.jsonl",
            "--roots",
            "missing.json",
            "--out",
            "{out}",
        ],
        tmp.path(),
    );
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("missing.json"));
}

#[test]
fn prompts_from_extracted_artifacts() {
    golden("prompts");
}

#[test]
fn plan_default_sizes() {
    golden("plan_default");
}

#[test]
fn plan_within_culture() {
    golden("plan_culture");
}

#[test]
fn map_with_canned_clients() {
    golden("map_canned");
    let mapped = fs::read(golden_dir("map_canned").join("mapped.csv")).unwrap();
    assert_eq!(mapped, fs::read(fixtures().join("mapped.csv")).unwrap());
}

#[test]
fn map_missing_canned_response() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run(
        &[
            "map",
            "--concept",
            "cuisine",
            "--mapper",
            "canned:canned_map",
            "--out",
            "{out}",
        ],
        tmp.path(),
    );
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn score_all_presets() {
    golden("score_fixture");
}

#[test]
fn score_distinct_batch_at_half_quality() {
    golden("score_distinct");
    let report: serde_json::Value = serde_json::from_slice(
        &fs::read(golden_dir("score_distinct").join("report.json")).unwrap(),
    )
    .unwrap();
    assert!((report["configs"][0]["mean_cd"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn score_uniform_quality() {
    golden("score_uniform");
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(golden_dir("score_uniform").join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["configs"][0]["mean_quality"], 1.0);
}

#[test]
fn score_empty_inputs_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let e = empty.to_str().unwrap();
    let r = run(
        &[
            "score",
            "--concept",
            "cuisine",
            "--mapped",
            e,
            "--quality",
            e,
            "--out",
            "{out}",
        ],
        tmp.path(),
    );
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn score_schema_error_names_row() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.csv");
    fs::write(
        &bad,
        "image_id,template_index,seed,continent,country,artifact_id\nt0-s0,0,0,Europe,FR,x\nt0-s1,0,1,Asia,FR,y\n",
    )
    .unwrap();
    let r = run(
        &[
            "score",
            "--concept",
            "cuisine",
            "--mapped",
            bad.to_str().unwrap(),
            "--uniform-quality",
            "--out",
            "{out}",
        ],
        tmp.path(),
    );
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("row 2"));
}

#[test]
fn score_is_idempotent() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    assert!(run(SCORE_FIXTURE, &out).status.success());
    let first: Vec<Vec<u8>> = files_under(&out)
        .iter()
        .map(|p| fs::read(p).unwrap())
        .collect();
    assert!(run(SCORE_FIXTURE, &out).status.success());
    let second: Vec<Vec<u8>> = files_under(&out)
        .iter()
        .map(|p| fs::read(p).unwrap())
        .collect();
    assert_eq!(first, second);
}

#[test]
fn stats_fixture() {
    golden("stats_fixture");
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(golden_dir("stats_fixture").join("stats.json")).unwrap())
            .unwrap();
    assert_eq!(report["questions"][0]["majority_agreement"]["value"], 95.0);
}

#[test]
fn stats_perfect_agreement() {
    golden("stats_perfect");
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(golden_dir("stats_perfect").join("stats.json")).unwrap())
            .unwrap();
    assert_eq!(report["questions"][0]["krippendorff_alpha"]["value"], 1.0);
}

#[test]
fn tablecheck_shipped_table_passes() {
    golden("tablecheck_shipped");
}

#[test]
fn tablecheck_flags_corrupted_cell() {
    golden("tablecheck_corrupt");
}

#[test]
fn usage_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(&["frobnicate"], tmp.path()).status.code(), Some(2));
    assert_eq!(
        run(&["score", "--concept", "cuisine"], tmp.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(
            &["plan", "--concept", "pottery", "--out", "{out}/p.json"],
            tmp.path()
        )
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn env_overrides_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_cubekit"))
        .args(["extract", "--roots", "roots_dish.json"])
        .current_dir(fixtures())
        .env("CUBEKIT_KB", "mini_kb.jsonl")
        .env("CUBEKIT_HOPS", "1")
        .env("CUBEKIT_OUT", &out)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(
        fs::read(out.join("artifacts.jsonl")).unwrap(),
        fs::read(golden_dir("extract_h1").join("artifacts.jsonl")).unwrap()
    );
}
