use std::path::Path;
use std::process::{Command, Output};

fn hyperlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperlab")).args(args).output().unwrap()
}

fn surface(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path.display().to_string()
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(hyperlab(&[]).status.code(), Some(2));
    assert_eq!(hyperlab(&["nonsense"]).status.code(), Some(2));
    assert_eq!(hyperlab(&["analyze", "--point", "1,2"]).status.code(), Some(2));
    assert_eq!(hyperlab(&["verify", "--suite", "9"]).status.code(), Some(2));
}

#[test]
fn analysis_failures_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cone = surface(dir.path(), "cone.json", r#"{"kind":"equidistant_cone","n":3,"slope":1.0}"#);
    let out = hyperlab(&["analyze", "--surface", &cone, "--point", "0,0,0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
    let plane = surface(dir.path(), "plane.json", r#"{"kind":"tilted_plane","n":3,"slope":1.0}"#);
    let out = hyperlab(&["solve", "--surface", &plane, "--grid", "-1,0,0:1,1,1:0.25"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn analyze_reports_the_cone_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let cone = surface(dir.path(), "cone.json", r#"{"kind":"equidistant_cone","n":3,"slope":1.0}"#);
    let out = hyperlab(&["analyze", "--surface", &cone, "--point", "1,0,0"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    let kappas: Vec<f64> = serde_json::from_value(v["point"]["kappas"].clone()).unwrap();
    let r = std::f64::consts::SQRT_2;
    for (k, e) in kappas.iter().zip([1.0 / r, r, r]) {
        assert!((k - e).abs() < 1e-12, "{kappas:?}");
    }
    assert_eq!(v["manifest"]["command"], "analyze");
}

#[test]
fn classify_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let horo = surface(dir.path(), "horo.json", r#"{"kind":"horosphere","n":3,"height":1.0}"#);
    let cone = surface(dir.path(), "cone.json", r#"{"kind":"equidistant_cone","n":3,"slope":2.0}"#);
    let h = hyperlab(&["classify", "--surface", &horo, "--seed", "3"]);
    assert!(h.status.success());
    assert_eq!(stdout_json(&h)["verdict"], "Horosphere");
    let a = hyperlab(&["classify", "--surface", &cone, "--seed", "3"]);
    let b = hyperlab(&["classify", "--surface", &cone, "--seed", "3"]);
    assert_eq!(a.stdout, b.stdout);
    let v = stdout_json(&a);
    assert_eq!(v["verdict"], "EquidistantTube");
    assert_eq!(v["boundary_points"], 2);
}

#[test]
fn solve_writes_and_reloads_its_output() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sol");
    let out_str = out_dir.display().to_string();
    let cone = surface(dir.path(), "cone.json", r#"{"kind":"equidistant_cone","n":3,"slope":1.0}"#);
    let out = hyperlab(&["solve", "--surface", &cone, "--grid", "0.5,0.5,0.5:1.5,1.5,1.5:0.125", "--out", &out_str]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["solution.json", "solution.csv", "trace.csv", "solve.json"] {
        assert!(out_dir.join(name).exists(), "{name}");
    }
    let header = out_dir.join("solution.json").display().to_string();
    let values = out_dir.join("solution.csv").display().to_string();
    let again = hyperlab(&["solve", "--grid", &header, "--values", &values, "--p", "3"]);
    assert!(again.status.success(), "{}", String::from_utf8_lossy(&again.stderr));
}

#[test]
fn verify_suite_passes() {
    let out = hyperlab(&["verify", "--suite", "all", "--seed", "7"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 8);
}
