//! Binary runner and golden-file comparison shared by the CLI test targets.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

pub fn golden_dir(case: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(case)
}

pub fn shipped_table_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/published_tables.csv")
}

/// Runs the binary from the fixtures directory with `{out}` replaced by `out`.
pub fn run(args: &[&str], out: &Path) -> Output {
    let args: Vec<String> = args
        .iter()
        .map(|a| a.replace("{out}", out.to_str().unwrap()))
        .collect();
    Command::new(env!("CARGO_BIN_EXE_cubekit"))
        .args(&args)
        .current_dir(fixtures())
        .env_clear()
        .env("PATH", std::env::var("PATH").unwrap_or_default())
        .output()
        .expect("binary runs")
}

pub fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    if let Ok(entries) = fs::read_dir(dir) {
        for entry in entries {
            let path = entry.unwrap().path();
            if path.is_dir() {
                out.extend(files_under(&path));
            } else {
                out.push(path);
            }
        }
    }
    out.sort();
    out
}

/// Runs `args` and returns stdout plus every output file, keyed by relative path.
pub fn produce(case: &str, args: &[&str], code: i32) -> Result<Vec<(PathBuf, Vec<u8>)>, String> {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let result = run(args, &out);
    if result.status.code() != Some(code) {
        return Err(format!(
            "{case}: exit {:?}, expected {code}; stderr: {}",
            result.status.code(),
            String::from_utf8_lossy(&result.stderr)
        ));
    }
    let mut actual = vec![(PathBuf::from("stdout.txt"), result.stdout)];
    for path in files_under(&out) {
        actual.push((
            path.strip_prefix(&out).unwrap().to_path_buf(),
            fs::read(&path).unwrap(),
        ));
    }
    Ok(actual)
}

/// Compares produced outputs against `tests/golden/<case>`.
pub fn compare(case: &str, actual: &[(PathBuf, Vec<u8>)]) -> Result<(), String> {
    let dir = golden_dir(case);
    let expected: Vec<PathBuf> = files_under(&dir)
        .into_iter()
        .map(|p| p.strip_prefix(&dir).unwrap().to_path_buf())
        .collect();
    let mut produced: Vec<PathBuf> = actual.iter().map(|(p, _)| p.clone()).collect();
    produced.sort();
    if produced != expected {
        return Err(format!(
            "{case}: output files {produced:?}, expected {expected:?}"
        ));
    }
    for (rel, bytes) in actual {
        let want = fs::read(dir.join(rel)).unwrap();
        if *bytes != want {
            return Err(format!(
                "{case}: {} differs\n--- got ---\n{}",
                rel.display(),
                String::from_utf8_lossy(bytes)
            ));
        }
    }
    Ok(())
}

/// Rewrites `tests/golden/<case>` from produced outputs.
pub fn store(case: &str, actual: &[(PathBuf, Vec<u8>)]) {
    let dir = golden_dir(case);
    let _ = fs::remove_dir_all(&dir);
    for (rel, bytes) in actual {
        let target = dir.join(rel);
        fs::create_dir_all(target.parent().unwrap()).unwrap();
        fs::write(target, bytes).unwrap();
    }
}

/// Copy of the shipped table with one SDXL cell pushed out of tolerance.
pub fn corrupted_table(dir: &Path) -> PathBuf {
    let table = fs::read_to_string(shipped_table_path()).unwrap().replace(
        "SDXL,landmarks,country,0.22,0.65,0.14",
        "SDXL,landmarks,country,0.22,0.65,0.20",
    );
    let path = dir.join("corrupt.csv");
    fs::write(&path, table).unwrap();
    path
}

/// Every golden case: name, arguments, expected exit code.
pub fn golden_cases(scratch: &Path) -> Vec<(&'static str, Vec<String>, i32)> {
    let artifacts = golden_dir("extract_mini").join("artifacts.jsonl");
    let corrupt = corrupted_table(scratch);
    let cases: Vec<(&'static str, Vec<&str>, i32)> = vec![
        (
            "extract_mini",
            vec![
                "extract",
                "--kb",
                "mini_kb.jsonl",
                "--roots",
                "roots_dish.json",
                "--out",
                "{out}",
            ],
            0,
        ),
        (
            "extract_h1",
            vec![
                "extract",
                "--kb",
                "mini_kb.jsonl",
                "--roots",
                "roots_dish.json",
                "--hops",
                "1",
                "--out",
                "{out}",
            ],
            0,
        ),
        (
            "extract_lenient",
            vec![
                "extract",
                "--kb",
                "mini_kb_bad_line.jsonl",
                "--roots",
                "roots_dish.json",
                "--lenient",
                "--out",
                "{out}",
            ],
            0,
        ),
        (
            "prompts",
            vec![
                "prompts",
                "--artifacts",
                artifacts.to_str().unwrap(),
                "--out",
                "{out}/prompts.jsonl",
            ],
            0,
        ),
        (
            "plan_default",
            vec!["plan", "--concept", "landmarks", "--out", "{out}/plan.json"],
            0,
        ),
        (
            "plan_culture",
            vec![
                "plan",
                "--concept",
                "art",
                "--culture",
                "JP",
                "--templates",
                "2",
                "--seed-batches",
                "1",
                "--out",
                "{out}/plan.json",
            ],
            0,
        ),
        (
            "map_canned",
            vec![
                "map",
                "--concept",
                "cuisine",
                "--templates",
                "2",
                "--seed-batches",
                "2",
                "--mapper",
                "canned:canned_map",
                "--out",
                "{out}",
            ],
            0,
        ),
        ("score_fixture", SCORE_FIXTURE.to_vec(), 0),
        (
            "score_distinct",
            vec![
                "score",
                "--concept",
                "landmarks",
                "--templates",
                "1",
                "--seed-batches",
                "1",
                "--mapped",
                "mapped_distinct.csv",
                "--quality",
                "quality_half.csv",
                "--preset",
                "artifact",
                "--out",
                "{out}",
            ],
            0,
        ),
        (
            "score_uniform",
            vec![
                "score",
                "--concept",
                "landmarks",
                "--templates",
                "1",
                "--seed-batches",
                "1",
                "--mapped",
                "mapped_distinct.csv",
                "--uniform-quality",
                "--preset",
                "continent",
                "--preset",
                "artifact",
                "--out",
                "{out}",
            ],
            0,
        ),
        (
            "stats_fixture",
            vec![
                "stats",
                "--ratings",
                "ratings.csv",
                "--series",
                "series.csv",
                "--out",
                "{out}",
            ],
            0,
        ),
        (
            "stats_perfect",
            vec![
                "stats",
                "--ratings",
                "ratings_perfect.csv",
                "--out",
                "{out}",
            ],
            0,
        ),
        (
            "tablecheck_shipped",
            vec!["tablecheck", "--out", "{out}/tablecheck.json"],
            0,
        ),
        (
            "tablecheck_corrupt",
            vec!["tablecheck", "--table", corrupt.to_str().unwrap()],
            3,
        ),
    ];
    cases
        .into_iter()
        .map(|(name, args, code)| (name, args.into_iter().map(String::from).collect(), code))
        .collect()
}

pub const SCORE_FIXTURE: &[&str] = &[
    "score",
    "--concept",
    "cuisine",
    "--templates",
    "2",
    "--seed-batches",
    "2",
    "--mapped",
    "mapped.csv",
    "--quality",
    "quality.csv",
    "--preset",
    "all",
    "--out",
    "{out}",
];
