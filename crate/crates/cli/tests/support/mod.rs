//! Helpers for driving the `wordsmith` binary from tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

pub fn toy(file: &str) -> PathBuf {
    workspace_root().join("data/toy").join(file)
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the binary in `dir`.
pub fn wordsmith(dir: &Path, args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_wordsmith"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn wordsmith");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

/// Checks `instance` against `schemas/<name>.schema.json`, returning the violations.
pub fn schema_errors(name: &str, instance: &Value) -> Vec<String> {
    let path = workspace_root()
        .join("schemas")
        .join(format!("{name}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("valid schema");
    validator
        .iter_errors(instance)
        .map(|e| format!("{}: {e}", e.instance_path()))
        .collect()
}

pub fn assert_schema(name: &str, json: &str) {
    let value: Value =
        serde_json::from_str(json).unwrap_or_else(|e| panic!("{name}: not JSON ({e}): {json}"));
    let errors = schema_errors(name, &value);
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

/// The offline pipeline on the bundled toy data, run inside `dir`. Returns
/// each step's name, schema and stdout; panics on a non-zero exit.
pub fn pipeline(dir: &Path) -> Vec<(&'static str, &'static str, String)> {
    let corpus = toy("corpus.tsv");
    let lexicon = toy("lexicon.jsonl");
    let (corpus, lexicon) = (corpus.to_str().unwrap(), lexicon.to_str().unwrap());
    let steps: Vec<(&str, &str, Vec<&str>)> = vec![
        (
            "ingest",
            "ingest",
            vec!["ingest", "--in", corpus, "--out", "corpus.jsonl"],
        ),
        (
            "clean",
            "clean",
            vec![
                "clean",
                "--in",
                "corpus.jsonl",
                "--out",
                "clean.tsv",
                "--report",
                "clean-report.json",
            ],
        ),
        (
            "split",
            "split",
            vec![
                "split",
                "--in",
                "clean.tsv",
                "--mode",
                "random",
                "--fraction",
                "0.2",
                "--seed",
                "7",
                "--train-out",
                "train.tsv",
                "--test-out",
                "test.tsv",
            ],
        ),
        (
            "train-ngram",
            "train-ngram",
            vec![
                "train-ngram",
                "--in",
                "train.tsv",
                "--side",
                "src",
                "--out",
                "ngram.json",
            ],
        ),
        (
            "train-langid",
            "train-langid",
            vec![
                "train-langid",
                "--from-corpus",
                "train.tsv",
                "--src-lang",
                "tok",
                "--tgt-lang",
                "en",
                "--out",
                "langid.json",
            ],
        ),
        (
            "gen-typos",
            "gen-typos",
            vec![
                "gen-typos",
                "--in",
                "test.tsv",
                "--seed",
                "11",
                "--lexicon",
                lexicon,
                "--out",
                "typos.jsonl",
            ],
        ),
        (
            "eval spell",
            "corrector-report",
            vec![
                "eval",
                "spell",
                "--pairs",
                "typos.jsonl",
                "--lexicon",
                lexicon,
                "--ngram",
                "ngram.json",
            ],
        ),
        (
            "eval langid",
            "langid-report",
            vec![
                "eval",
                "langid",
                "--model",
                "langid.json",
                "--from-corpus",
                "test.tsv",
                "--src-lang",
                "tok",
                "--tgt-lang",
                "en",
            ],
        ),
        (
            "eval chrf",
            "score-report",
            vec!["eval", "chrf", "--cand", "test.tsv", "--ref", "test.tsv"],
        ),
    ];
    steps
        .into_iter()
        .map(|(name, schema, args)| {
            let run = wordsmith(dir, &args);
            assert_eq!(run.code, 0, "{name} failed: {}", run.stderr);
            (name, schema, run.stdout)
        })
        .collect()
}

/// Every file the pipeline writes, in a fixed order.
pub const PIPELINE_FILES: &[&str] = &[
    "corpus.jsonl",
    "clean.tsv",
    "clean-report.json",
    "train.tsv",
    "test.tsv",
    "ngram.json",
    "langid.json",
    "typos.jsonl",
];
