//! End-to-end tests of the `dualknot` binary: exit codes, JSON output
//! shapes, and determinism.

use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dualknot"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn catalog_prints_canonical_json_and_rejects_unknown_names() {
    let out = run(&["--log", "quiet", "catalog", "unknot"]);
    let doc = stdout_json(&out);
    assert_eq!(doc["generators"].as_array().unwrap().len(), 1);
    assert_eq!(doc["iota"].as_array().unwrap().len(), 1);

    let bad = run(&["--log", "quiet", "catalog", "nope"]);
    assert_eq!(bad.status.code(), Some(2));

    let list = run(&["--log", "quiet", "catalog", "--list"]);
    let names = String::from_utf8(list.stdout).unwrap();
    assert!(names.lines().any(|l| l == "figure_eight"));
}

#[test]
fn validate_accepts_catalog_entries_and_empty_complexes() {
    let out = run(&["--log", "quiet", "validate", "figure_eight"]);
    assert_eq!(out.status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    fs::write(&empty, r#"{"generators": [], "differential": []}"#).unwrap();
    let out = run(&["--log", "quiet", "validate", empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn validate_rejects_a_broken_involution() {
    // Replace the figure-eight involution with iota(b) = b, which is not a
    // chain map.
    let doc = stdout_json(&run(&["--log", "quiet", "catalog", "figure_eight"]));
    let mut doc = doc;
    doc["iota"] = serde_json::json!([{"from": "b", "to": "b", "u": 0, "v": 0}]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = run(&["--log", "quiet", "validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.contains("violation"), "{report}");
}

#[test]
fn surgery_writes_a_deterministic_involutive_cone() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cone.json");
    let args = [
        "--log",
        "quiet",
        "surgery",
        "--input",
        "figure_eight",
        "--n",
        "1",
        "--involutive",
        "--out",
        path.to_str().unwrap(),
    ];
    assert_eq!(run(&args).status.code(), Some(0));
    let first = fs::read_to_string(&path).unwrap();
    assert_eq!(run(&args).status.code(), Some(0));
    assert_eq!(first, fs::read_to_string(&path).unwrap(), "byte-identical reruns");

    let doc: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert_eq!(doc["n"], 1);
    assert_eq!(doc["complex"]["generators"].as_array().unwrap().len(), 15);
    assert!(doc["complex"]["iota"].is_array());
    assert!(!doc["provenance"].as_array().unwrap().is_empty());
}

#[test]
fn surgery_rejects_zero_coefficient_and_bad_truncations_as_usage() {
    let out = run(&["--log", "quiet", "surgery", "--input", "unknot", "--n", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&[
        "--log", "quiet", "surgery", "--input", "unknot", "--n", "1", "--truncation", "huge",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknot_surgery_is_a_three_generator_cone() {
    let out = run(&["--log", "quiet", "surgery", "--input", "unknot", "--n", "1"]);
    let doc = stdout_json(&out);
    assert_eq!(doc["complex"]["generators"].as_array().unwrap().len(), 3);
    assert!(doc["complex"]["iota"].is_null(), "iota omitted without --involutive");
}

#[test]
fn reduce_of_a_surgery_output_has_five_generators() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cone.json");
    run(&[
        "--log",
        "quiet",
        "surgery",
        "--input",
        "figure_eight",
        "--n",
        "1",
        "--involutive",
        "--out",
        path.to_str().unwrap(),
    ]);
    let out = run(&["--log", "quiet", "reduce", "--input", path.to_str().unwrap()]);
    let doc = stdout_json(&out);
    assert_eq!(doc["generators"].as_array().unwrap().len(), 5);
    assert!(doc["iota"].is_array(), "involution transported through the reduction");
}

#[test]
fn local_class_reports_the_figure_eight_as_locally_trivial() {
    let out = run(&["--log", "quiet", "local-class", "--input", "figure_eight", "--n", "1"]);
    let doc = stdout_json(&out);
    assert_eq!(doc["verdict"], "locally_trivial");
    assert!(doc["witnesses"].as_array().unwrap().len() >= 2);

    let bad = run(&["--log", "quiet", "local-class", "--input", "figure_eight", "--n", "3"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn oracle_check_passes_on_the_figure_eight_range() {
    let out = run(&[
        "--log",
        "quiet",
        "oracle-check",
        "--input",
        "figure_eight",
        "--s-range",
        "-2..1",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.lines().all(|l| l.starts_with("PASS")), "{report}");
    assert!(report.lines().count() >= 50);
}
