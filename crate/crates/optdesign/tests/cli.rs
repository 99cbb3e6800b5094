use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_optdesign"))
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)))
}

fn linear2(dir: &Path) -> String {
    write(dir, "model.json", &json!({"family": "linear-2f-no-intercept"})).display().to_string()
}

#[test]
fn solve_writes_report_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let model = linear2(dir.path());
    let out = dir.path().join("run");
    let o = run(&["solve", "--model", &model, "--criterion", "D", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("solve.json")).unwrap()).unwrap();
    assert_eq!(report["command"], "solve");
    assert_eq!(report["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(report["config_hash"].as_str().unwrap().len(), 64);
    let atoms = report["result"]["design"]["atoms"].as_array().unwrap();
    assert_eq!(atoms.len(), 3);
    for a in atoms {
        assert!((a["w"].as_f64().unwrap() - 1.0 / 3.0).abs() <= 1e-4);
    }
    let csv = std::fs::read_to_string(out.join("sensitivity.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x0,x1,sensitivity"));
    assert_eq!(csv.lines().count(), 1 + 101 * 101);
}

#[test]
fn reports_are_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "m.json", &json!({"family": "polynomial", "params": {"degree": 2}, "space": {"steps": [0.01]}}));
    let m = model.to_str().unwrap();
    let a = run(&["solve", "--model", m, "--criterion", "A", "--seed", "3"]);
    let b = run(&["solve", "--model", m, "--criterion", "A", "--seed", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["solve", "--model", m, "--criterion", "A", "--seed", "4"]);
    assert_ne!(stdout_json(&a)["config_hash"], stdout_json(&c)["config_hash"]);
}

#[test]
fn certify_of_suboptimal_design_succeeds_with_optimal_false() {
    let dir = tempfile::tempdir().unwrap();
    let model = linear2(dir.path());
    let design = write(dir.path(), "d.json", &json!({"atoms": [
        {"x": [1.0, 1.0], "w": 0.5}, {"x": [1.0, 0.0], "w": 0.25}, {"x": [0.0, 1.0], "w": 0.25}]}));
    let o = run(&["certify", "--model", &model, "--design", design.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r = stdout_json(&o);
    assert_eq!(r["result"]["certify"]["optimal"], false);
    assert!(r["result"]["certify"]["max_violation"].as_f64().unwrap() > 0.0);
}

#[test]
fn exact_design_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let model = linear2(dir.path());
    let design = write(dir.path(), "d.json", &json!({"n": 6, "atoms": [
        {"x": [1.0, 1.0], "reps": 2}, {"x": [1.0, 0.0], "reps": 2}, {"x": [0.0, 1.0], "reps": 2}]}));
    let o = run(&["certify", "--model", &model, "--design", design.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["result"]["certify"]["optimal"], true);
}

#[test]
fn missing_conditional_model_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let model = linear2(dir.path());
    let design = write(dir.path(), "d.json", &json!({"atoms": [{"x": [1.0, 0.0], "w": 0.5}, {"x": [0.0, 1.0], "w": 0.5}]}));
    let o = run(&["audit", "--model", &model, "--design", design.to_str().unwrap(), "--slice-map", "axis:0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no conditional model"));
}

#[test]
fn malformed_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", &json!({"family": "exp-growth-2f", "params": {"theta": [0.0, 0.5, 1.0]}}));
    assert_eq!(run(&["solve", "--model", bad.to_str().unwrap()]).status.code(), Some(2));
    let model = linear2(dir.path());
    assert_eq!(run(&["solve", "--model", &model, "--criterion", "p:2"]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--model", "/nonexistent/model.json"]).status.code(), Some(2));
}

#[test]
fn exhausted_budget_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "m.json", &json!({"family": "polynomial", "params": {"degree": 3}}));
    let o = run(&["solve", "--model", model.to_str().unwrap(), "--max-iters", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stdout_json(&o)["result"]["converged"], false);
}

#[test]
fn audit_and_decompose_emit_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "m.json", &json!({"family": "exp-growth-2f", "params": {"theta": [0.0, 1.0, 1.0]},
        "space": {"bounds": [[0.0, 3.0], [0.0, 3.0]], "steps": [0.05, 0.05]}}));
    let design = write(dir.path(), "d.json", &json!({"atoms": [
        {"x": [0.2, 0.0], "w": 0.25}, {"x": [1.7, 0.0], "w": 0.25}, {"x": [2.6, 1.0], "w": 0.25}, {"x": [0.0, 1.0], "w": 0.25}]}));
    let (m, d) = (model.to_str().unwrap(), design.to_str().unwrap());
    let o = run(&["audit", "--model", m, "--design", d, "--product"]);
    assert_eq!(o.status.code(), Some(0));
    let r = stdout_json(&o);
    assert_eq!(r["result"]["product"]["factors"][0]["verdict"]["verdict"], "inadmissible");
    let o = run(&["decompose", "--model", m, "--design", d, "--slice-map", "axis:1"]);
    assert_eq!(o.status.code(), Some(0));
    let r = stdout_json(&o);
    assert_eq!(r["result"]["slices"].as_array().unwrap().len(), 2);
    assert!(r["result"]["recompose_max_abs_error"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn garza_writes_norm_trace() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "m.json", &json!({"family": "mixture-poly-exp", "params": {"theta3": 1.0},
        "space": {"steps": [0.1, 0.5]}}));
    let out = dir.path().join("g");
    let o = run(&["garza", "--model", model.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(out.join("garza.json")).unwrap()).unwrap();
    assert_eq!(r["result"]["injective"], false);
    assert!(out.join("norms.csv").exists());
}

#[test]
fn example_filter_selects_rows() {
    let o = bin().args(["examples", "--filter", "linear2-*"]).env("OPTDESIGN_THREADS", "2").output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).filter(|l| l.contains("  pass  ") || l.contains("  FAIL  ")).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|l| l.starts_with("linear2-")));
}

#[test]
fn corrupted_golden_value_fails_its_row() {
    let mut suite: Vec<Value> = serde_json::from_str(optdesign::suite::BUNDLED).unwrap();
    suite.retain(|e| e["name"] == "linear2-D" || e["name"] == "linear2-E");
    suite[0]["expect"][1]["w"] = json!(0.5);
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "suite.json", &Value::Array(suite));
    let o = run(&["examples", "--suite", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("linear2-D ") && l.contains("FAIL")));
    assert!(text.lines().any(|l| l.starts_with("linear2-E ") && l.contains("pass")));
}

#[test]
fn full_bundled_suite_passes() {
    let entries = optdesign::suite::parse(optdesign::suite::BUNDLED).unwrap();
    let rows = optdesign::suite::run_suite(&entries, None);
    assert_eq!(rows.len(), entries.len());
    assert!(rows.iter().all(|r| r.passed), "{}", optdesign::suite::table(&rows));
}
