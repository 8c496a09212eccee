use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn csc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_csc")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn scenario(case: u8) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../scenarios/dionysus_case{case}.toml"))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn error_json(o: &Output) -> serde_json::Value {
    let err = String::from_utf8_lossy(&o.stderr);
    let line = err.lines().rev().find(|l| l.starts_with('{')).unwrap_or_else(|| panic!("no JSON error in {err}"));
    serde_json::from_str(line).unwrap()
}

#[test]
fn check_accepts_bundled_scenarios() {
    for case in 1..=3 {
        let o = csc(&["check", s(&scenario(case))]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stdout).contains(&format!("ok (case {case}")));
    }
}

#[test]
fn config_errors_exit_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let src = std::fs::read_to_string(scenario(1)).unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, src.replace("m0_kg = 4000.0", "m0_kg = -1.0")).unwrap();
    let o = csc(&["check", s(&bad)]);
    assert_eq!(o.status.code(), Some(3));
    let j = error_json(&o);
    assert_eq!(j["error"], "config");
    assert!(j["message"].as_str().unwrap().contains("m0_kg"));

    std::fs::write(&bad, src.replace("eta = 0.65", "eta = 0.65\nthruts = 2.0")).unwrap();
    let o = csc(&["run", s(&bad)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(error_json(&o)["message"].as_str().unwrap().contains("thruts"));
}

#[test]
fn missing_scenario_exits_with_code_four() {
    let o = csc(&["check", "/nonexistent/scenario.toml"]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(error_json(&o)["error"], "io");
}

#[test]
fn argument_errors_are_rejected() {
    assert!(!csc(&["run", s(&scenario(1)), "--case", "4"]).status.success());
    assert!(!csc(&["run", s(&scenario(1)), "--nrev", "5", "--nrev-range", "4..6"]).status.success());
    assert!(!csc(&["run", s(&scenario(1)), "--nrev-range", "6..4"]).status.success());
}

#[test]
fn oracle_reports_agreement() {
    let o = csc(&["oracle", "cx-vs-fd", s(&scenario(2)), "--samples", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = String::from_utf8_lossy(&o.stdout);
    let line = out.lines().find(|l| l.starts_with("max relative deviation")).unwrap();
    let v: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(v < 1e-6, "{out}");
}

#[test]
fn single_stage_run_writes_results() {
    let dir = tempfile::tempdir().unwrap();
    let o = csc(&["run", s(&scenario(1)), "--rho-end", "1", "--out", s(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["converged"], true);
    assert_eq!(summary["nrev"], 5);
    assert_eq!(summary["stages"].as_array().unwrap().len(), 1);
    let m = summary["final_mass_kg"].as_f64().unwrap();
    assert!(m > 2000.0 && m < 4000.0);
    for f in ["trajectory.csv", "summary.json", "thrust_envelope.csv", "power.csv", "steering.csv", "perturbations.csv"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
}

#[test]
fn unreachable_revolution_count_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let src = std::fs::read_to_string(scenario(1)).unwrap();
    let cfg = dir.path().join("hard.toml");
    let budget = "seed = 42\nmultistart_samples = 1\nmultistart_iterations = 3\nmax_iterations = 3\ncontinuation = false";
    std::fs::write(&cfg, src.replace("seed = 42", budget)).unwrap();
    let o = csc(&["run", s(&cfg), "--nrev", "40", "--rho-end", "1", "--out", s(&dir.path().join("out"))]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(error_json(&o)["error"], "no_convergence");
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["converged"], false);
}
