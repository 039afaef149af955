use std::io::Write;
use std::process::{Command, Stdio};

use qlens::cli::run;
use qlens::projection::ProjectionFile;
use qlens_core::modules::{canonical_projection, KInvariant};
use serde_json::Value;

fn json(args: &[&str]) -> (i32, Value) {
    let mut argv = vec!["qlens"];
    argv.extend_from_slice(args);
    let out = run(argv);
    let v = if out.stdout.is_empty() { Value::Null } else { serde_json::from_str(&out.stdout).unwrap() };
    (out.code, v)
}

fn as_ints(v: &Value) -> Vec<i64> {
    v.as_array().unwrap().iter().map(|x| x.as_i64().unwrap()).collect()
}

#[test]
fn normalize_example() {
    let (code, v) = json(&["normalize", "--l", "2", "d . c"]);
    assert_eq!(code, 0);
    assert_eq!(v["normalform"], "q^-2 . c . d");
}

#[test]
fn symbol_example() {
    let (code, v) = json(&["symbol", "--l", "1", "c . c*"]);
    assert_eq!(code, 0);
    let sym = v["symbol"].as_object().unwrap();
    assert_eq!(sym.len(), 1);
    assert_eq!(sym["0"][0].as_f64(), Some(1.0));
    assert_eq!(sym["0"][1].as_f64(), Some(0.0));
}

#[test]
fn symbol_of_c_is_z() {
    let (_, v) = json(&["symbol", "--l", "2", "c"]);
    assert_eq!(v["symbol"]["1"][0].as_f64(), Some(1.0));
    let (_, v) = json(&["symbol", "--l", "2", "d"]);
    assert!(v["symbol"].as_object().unwrap().is_empty());
}

#[test]
fn line_bundle_example() {
    let (code, v) = json(&["line-bundle", "--n", "-2", "--l", "3"]);
    assert_eq!(code, 0);
    assert_eq!(as_ints(&v["invariant"]), vec![1, -2, -2, -2]);
    assert_eq!(v["iso"]["passed"], true);
    assert_eq!(v["passed"], true);
}

#[test]
fn line_bundle_all_degrees() {
    let (code, v) = json(&["line-bundle", "--l", "2", "--N", "32", "--samples", "20"]);
    assert_eq!(code, 0);
    assert_eq!(v["checks"][0]["name"], "line-bundles");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(["qlens", "frobnicate"]).code, 2);
    assert_eq!(run(["qlens", "normalize"]).code, 2);
    assert_eq!(run(["qlens", "--q", "1.5", "verify-relations"]).code, 2);
    assert_eq!(run(["qlens", "--N", "4", "verify-relations"]).code, 2);
    assert_eq!(run(["qlens", "normalize", "c . . d"]).code, 2);
    assert_eq!(run(["qlens", "line-bundle", "--n", "70"]).code, 2);
    let help = run(["qlens", "--help"]);
    assert_eq!(help.code, 0);
    assert!(help.stdout.contains("line-bundle"));
}

#[test]
fn trunc_alias_and_config_echo() {
    let (code, v) = json(&["verify-relations", "--trunc", "32", "--l", "1", "--q", "0.3"]);
    assert_eq!(code, 0);
    assert_eq!(v["config"]["N"], 32);
    assert_eq!(v["config"]["l"], 1);
    assert_eq!(v["config"]["q"].as_f64(), Some(0.3));
    assert_eq!(v["config"]["W"], 16);
    assert_eq!(v["passed"], true);
}

#[test]
fn config_file_and_flag_precedence() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(f, r#"{{"l": 3, "N": 32, "samples": 7, "seed": 9}}"#).unwrap();
    let path = f.path().to_str().unwrap();
    let (code, v) = json(&["--config", path, "verify-relations"]);
    assert_eq!(code, 0);
    assert_eq!(v["config"]["l"], 3);
    assert_eq!(v["config"]["samples"], 7);
    let (_, v) = json(&["--config", path, "--l", "1", "verify-relations"]);
    assert_eq!(v["config"]["l"], 1);
    assert_eq!(v["config"]["N"], 32);

    let mut bad = tempfile::NamedTempFile::new().unwrap();
    write!(bad, r#"{{"lambda": 1}}"#).unwrap();
    assert_eq!(run(["qlens", "--config", bad.path().to_str().unwrap(), "verify-relations"]).code, 2);
    assert_eq!(run(["qlens", "--config", "/nonexistent/qlens.json", "verify-relations"]).code, 2);
}

#[test]
fn classify_round_trip_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    let p = path.to_str().unwrap();
    let (code, _) = json(&["line-bundle", "--n", "3", "--l", "2", "--N", "16", "--output", p]);
    assert_eq!(code, 0);
    let (code, v) = json(&["classify", p]);
    assert_eq!(code, 0);
    assert_eq!(as_ints(&v["invariant"]), vec![1, 3, 3]);
    assert_eq!(v["r"], 2);
}

#[test]
fn classify_rejects_non_projections() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("half.json");
    std::fs::write(&path, r#"{"l": 1, "N": 8, "r": 1, "entries": [[{"scalar": [0.5, 0]}]]}"#).unwrap();
    let (code, v) = json(&["classify", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert_eq!(v["passed"], false);
    assert_eq!(v["projection"]["idempotent"].as_f64(), Some(0.25));

    std::fs::write(&path, r#"{"l": 1, "N": 8, "r": 2, "entries": [[{"scalar": [1, 0]}]]}"#).unwrap();
    assert_eq!(run(["qlens", "classify", path.to_str().unwrap()]).code, 2);
    std::fs::write(
        &path,
        r#"{"l": 1, "N": 8, "r": 1, "entries": [[{"scalar": [1, 0], "compact": [{"leg": 2, "rows": []}]}]]}"#,
    )
    .unwrap();
    assert_eq!(run(["qlens", "classify", path.to_str().unwrap()]).code, 2);
}

#[test]
fn projection_format_round_trip() {
    let inv = KInvariant::new(2, vec![-1, 3]).unwrap();
    let p = canonical_projection(&inv, 12).unwrap();
    let file = ProjectionFile::from_projection(&p);
    let text = serde_json::to_string(&file).unwrap();
    let back = ProjectionFile::parse(&text).unwrap().to_projection().unwrap();
    assert_eq!(back, p);
}

#[test]
fn reports_are_reproducible() {
    let a = run(["qlens", "--seed", "5", "--samples", "10", "structure-check"]);
    let b = run(["qlens", "--seed", "5", "--samples", "10", "structure-check"]);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qlens"))
}

#[test]
fn binary_exit_codes_and_streams() {
    let out = binary().args(["normalize", "--l", "2", "d . c"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["normalform"], "q^-2 . c . d");
    assert!(String::from_utf8_lossy(&out.stderr).contains("q^-2 . c . d"));

    let out = binary().args(["--q", "0", "verify-relations"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn binary_classifies_standard_input() {
    let mut child = binary()
        .args(["classify", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(br#"{"l": 2, "N": 8, "r": 1, "entries": [[{"scalar": [0, 0], "compact": [{"leg": 1, "rows": [[0, 0, 1, 0]]}]}]]}"#)
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(as_ints(&v["invariant"]), vec![0, 1, 0]);
}

#[test]
fn report_all_is_thread_count_independent() {
    let run_with = |threads: &str| {
        binary().env("QLENS_THREADS", threads).args(["--samples", "10", "--N", "32", "report-all"]).output().unwrap()
    };
    let one = run_with("1");
    let four = run_with("4");
    assert_eq!(one.stdout, four.stdout);
    let v: Value = serde_json::from_slice(&one.stdout).unwrap();
    assert_eq!(v["checks"].as_array().unwrap().len(), 10);
    assert_eq!(one.status.code(), Some(if v["passed"] == true { 0 } else { 1 }));
}
