use std::process::{Command, Output};

use calibra_core::DefectReport;

fn calibra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_calibra"))
        .args(args)
        .env_remove("CALIBRA_TOL")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> DefectReport {
    serde_json::from_slice(&out.stdout).expect("stdout is a report")
}

#[test]
fn equator_passes_with_exit_zero() {
    let out = calibra(&["verify", "stenzel", "--immersion", "equator", "--p", "2", "--n", "3", "--samples", "100", "--tol", "1e-8"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert!(r.passed);
    assert!(r.defects.lagrangian.is_some() && r.defects.special.is_some());
    assert_eq!(r.schema_version, calibra_core::SCHEMA_VERSION);
}

#[test]
fn clifford_coassociative_fails_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = calibra(&[
        "verify", "g2", "--mode", "coassoc", "--surface", "clifford_torus", "--samples", "100", "--tol", "1e-8", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let r: DefectReport = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(!r.passed);
    assert!(!r.verdicts["coassociative"]);
    let worst = r.defects.coassociative.unwrap();
    assert!(worst[2] > 0.1 || worst[3] > 0.1, "{worst:?}");
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let args = ["verify", "spin7", "--surface", "veronese", "--samples", "20", "--seed", "11"];
    let a = calibra(&args);
    let b = calibra(&args);
    assert_eq!(a.stdout, b.stdout);
    let c = calibra(&["verify", "spin7", "--surface", "veronese", "--samples", "20", "--seed", "12"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(calibra(&["verify", "stenzel", "--bogus"]).status.code(), Some(2));
    assert_eq!(calibra(&["verify", "g2", "--mode", "sideways", "--surface", "veronese"]).status.code(), Some(2));
    assert_eq!(calibra(&["verify", "spin7", "--surface", "klein_bottle"]).status.code(), Some(2));
}

#[test]
fn tolerance_falls_back_to_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_calibra"))
        .args(["verify", "g2", "--mode", "assoc", "--surface", "equator", "--samples", "5"])
        .env("CALIBRA_TOL", "1e-3")
        .output()
        .unwrap();
    assert_eq!(report(&out).tolerance, 1e-3);
}

#[test]
fn selftest_reports_counts() {
    let out = calibra(&["algebra", "selftest"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r.checks["associator"], 1000);
    assert!(r.wall_time_seconds.is_none());
}

#[test]
fn catalog_lists_every_name() {
    let out = calibra(&["catalog", "list"]);
    let entries: Vec<serde_json::Value> = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<_> = entries.iter().map(|e| e["name"].as_str().unwrap().to_string()).collect();
    assert_eq!(names, calibra_core::immersions::CATALOG_NAMES);
}
