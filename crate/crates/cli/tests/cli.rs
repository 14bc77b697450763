use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ionsqueeze(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ionsqueeze")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn error_object(out: &Output) -> Value {
    let v: Value = serde_json::from_slice(&out.stderr).expect("stderr carries a JSON error");
    v["error"].clone()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(ionsqueeze(&["--help"]).status.code(), Some(0));
    assert_eq!(ionsqueeze(&["--version"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_two_with_error_object() {
    let out = ionsqueeze(&["squeeze", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_object(&out)["kind"], "config");
}

#[test]
fn missing_config_is_a_config_error() {
    let out = ionsqueeze(&["general"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_object(&out)["issues"][0]["field"], "--config");
}

#[test]
fn every_config_issue_is_listed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[space]\nn_c_cut = -1\n[squeezing]\ng = 0.1\nextra = 1\n");
    let out = ionsqueeze(&["squeeze", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = error_object(&out);
    let fields: Vec<_> = err["issues"].as_array().unwrap().iter().map(|i| i["field"].as_str().unwrap()).collect();
    assert_eq!(fields, ["space.n_c_cut", "squeezing.extra"]);
}

#[test]
fn tail_guard_exits_three_and_names_its_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[space]\nn_c_cut = 10\nn_r_cut = 10\n[squeezing]\ng = [0.0, -1.0]\n");
    let out = ionsqueeze(&["squeeze", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    let err = error_object(&out);
    assert_eq!(err["guard"], "tail_mass");
    assert_eq!(err["module"], "operators");
    assert_eq!(err["tolerance"], 1e-6);
    assert!(out.stdout.is_empty());
}

#[test]
fn lamb_dicke_violation_is_numerical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[space]\nn_c_cut = 4\nn_r_cut = 4\n[physical]\nr = 0.05\neta = 0.4\n");
    let out = ionsqueeze(&["validate-rwa", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_object(&out)["guard"], "lamb_dicke");
}

#[test]
fn csv_needs_a_path_and_a_sweep_command() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[squeezing]\ng = 0.1\n");
    let out = ionsqueeze(&["squeeze", "--config", &cfg, "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2));
    let fields: Vec<_> = error_object(&out)["issues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|i| i["field"].as_str().unwrap().to_owned())
        .collect();
    assert_eq!(fields, ["output.format", "output.path"]);
}

#[test]
fn sweep_writes_csv_and_companion_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[space]\nn_c_cut = 6\nn_r_cut = 6\n[physical]\nr = 0.05\n[sweep]\neta = [0.15, 0.1]\n",
    );
    let csv = dir.path().join("sweep.csv");
    let out = ionsqueeze(&["validate-rwa", "--config", &cfg, "--format", "csv", "--out", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<_> = table.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("index,eta,eta_r,omega_over_nu"));
    let report: Value = serde_json::from_slice(&std::fs::read(dir.path().join("sweep.json")).unwrap()).unwrap();
    assert_eq!(report["command"], "validate-rwa");
    assert_eq!(report["results"]["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn report_goes_to_stdout_without_out() {
    let out = ionsqueeze(&["conventions", "--seedless"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["tool"], "ionsqueeze");
    assert_eq!(report["seedless"], true);
    assert_eq!(report["results"]["squeeze_sign"], 1);
    assert!(report.get("timings").is_none());
}

#[test]
fn timings_are_opt_in() {
    let out = ionsqueeze(&["conventions", "--timings"]);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["timings"]["total_seconds"].as_f64().unwrap() >= 0.0);
}
