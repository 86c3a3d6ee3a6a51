//! End-to-end runs of the binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str], config: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_thermobeam"));
    cmd.args(args).arg("--out").arg(dir.join("out"));
    if let Some(text) = config {
        let path = dir.join("run.cfg");
        std::fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("out/report.json")).unwrap()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn verify_passes_on_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["verify", "--system", "2"], Some("n = 16\n[verify]\nstates = 20\n"));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(dir.path());
    assert_eq!(r["schema"], "thermobeam-report/1");
    assert_eq!(r["command"], "verify");
    assert_eq!(r["passed"], true);
    assert_eq!(r["config"]["n"], 16);
    let names: Vec<&str> = r["assertions"].as_array().unwrap().iter().map(|a| a["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"dissipativity"), "{names:?}");
}

#[test]
fn unknown_key_is_a_config_error_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["verify"], Some("n = 16\n[simulate]\nstepz = 10\n"));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("simulate.stepz"), "{}", stderr(&out));
    assert!(!dir.path().join("out/report.json").exists());
}

#[test]
fn malformed_value_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["spectrum"], Some("n = sixteen\n"));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("n"), "{}", stderr(&out));
}

#[test]
fn odd_grid_size_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["spectrum"], Some("n = 15\n"));
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn empty_region_lattice_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["region-map"], Some("[region-map]\nlattice =\n"));
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("lattice"), "{}", stderr(&out));
}

#[test]
fn simulate_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["simulate"], Some("n = 8\n[simulate]\nt_end = 1\nsteps = 50\n"));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let trace = std::fs::read_to_string(dir.path().join("out/trace.csv")).unwrap();
    let lines: Vec<&str> = trace.split("\r\n").filter(|l| !l.is_empty()).collect();
    assert_eq!(lines.len(), 52);
    assert!(lines[0].starts_with("t,energy"));
}

#[test]
fn region_map_reports_every_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "n = 8\n[region-map]\npoints = 0.5 0.5 0.5; 1 1 1\nchecks = abscissa\n";
    let out = run(dir.path(), &["region-map", "--jobs", "2"], Some(cfg));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("out/region.csv")).unwrap();
    assert_eq!(csv.split("\r\n").filter(|l| !l.is_empty()).count(), 3);
}
