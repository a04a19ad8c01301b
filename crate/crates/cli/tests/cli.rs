use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const INTERVAL: &str = r#"{
    "domain": {"kind": "interval", "start": 0.0, "end": 3.141592653589793},
    "n": 65, "s": 0.5, "gamma": 0.1, "lambda_factor": 4.0
}"#;

fn run(args: &[&str], config: &str, out: &Path) -> Output {
    fs::create_dir_all(out).unwrap();
    let path = out.join("config.json");
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_fracplasma"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["solve"], INTERVAL, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["u.csv", "extension.csv", "solution.json", "report.json"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let report = json(&dir.path().join("report.json"));
    let residual = report["solver"]["residual"].as_f64().unwrap();
    let tolerance = report["config"]["solver"]["tolerance"].as_f64().unwrap();
    assert!(residual <= tolerance);
    let u = fs::read_to_string(dir.path().join("u.csv")).unwrap();
    let mut lines = u.lines();
    assert_eq!(lines.next(), Some("x,value"));
    assert_eq!(lines.count(), 65);
    let ext = fs::read_to_string(dir.path().join("extension.csv")).unwrap();
    assert!(ext.starts_with("x,y,value\n"));
}

#[test]
fn invalid_order_is_rejected_with_its_name() {
    let dir = tempfile::tempdir().unwrap();
    let bad = INTERVAL.replace("\"s\": 0.5", "\"s\": 1.5");
    let out = run(&["solve"], &bad, dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("`s`"), "{err}");
    assert!(err.contains("1.5"), "{err}");
}

#[test]
fn unknown_keys_are_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let bad = INTERVAL.replace("\"n\": 65", "\"n\": 65, \"gama\": 1");
    let out = run(&["solve"], &bad, dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gama"));
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = run(&["solve", "--seed", "7"], INTERVAL, dir.path());
        assert_eq!(out.status.code(), Some(0));
    }
    for f in ["u.csv", "extension.csv", "solution.json"] {
        let x = fs::read(a.path().join(f)).unwrap();
        let y = fs::read(b.path().join(f)).unwrap();
        assert!(x == y, "{f} differs");
    }
}

#[test]
fn empty_centre_list_gives_headers_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = INTERVAL.replace("\"n\": 65", "\"n\": 65, \"frequency\": {\"centers\": []}");
    let out = run(&["frequency"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(dir.path().join("frequency.csv")).unwrap();
    assert_eq!(table, "center,r,D,H,N,N_tilde\n");
    assert_eq!(json(&dir.path().join("frequency.json")), serde_json::json!([]));
}

#[test]
fn centres_outside_the_domain_are_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = INTERVAL.replace("\"n\": 65", "\"n\": 65, \"frequency\": {\"centers\": [[7.0, 0.0]]}");
    let out = run(&["frequency"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipped"));
    assert!(!dir.path().join("frequency_0.csv").exists());
}

#[test]
fn regular_crossing_has_frequency_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = INTERVAL
        .replace("\"n\": 65", "\"n\": 129")
        .replace("\"s\": 0.5", "\"s\": 0.75")
        .replace("4.0", "1.5");
    let out = run(&["frequency"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(&dir.path().join("frequency.json"));
    let profiles = summary.as_array().unwrap();
    assert_eq!(profiles.len(), 2);
    for p in profiles {
        assert!((p["n0"].as_f64().unwrap() - 1.0).abs() < 0.05, "{p}");
        assert_eq!(p["classification"], "regular");
        assert!(p["monotonicity_violations"].is_u64());
    }
    let table = fs::read_to_string(dir.path().join("frequency_0.csv")).unwrap();
    assert!(table.starts_with("r,D,H,N,N_tilde\n"));
}

#[test]
fn blowup_and_symmetrize_write_their_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{
        "domain": {"kind": "rectangle", "x": [0.0, 1.0], "y": [0.0, 1.0]},
        "n": 17, "s": 0.5, "gamma": 0.1, "lambda_factor": 2.0,
        "frequency": {"max_centers": 2}
    }"#;
    let out = run(&["blowup"], cfg, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(dir.path().join("blowup_0.csv")).unwrap();
    assert!(table.starts_with("xi,xi2,eta,value\n"));
    let summary = json(&dir.path().join("blowup.json"));
    assert!((summary[0]["boundary_norm"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let out = run(&["symmetrize"], cfg, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    for f in ["symmetrized_x.csv", "symmetrized_y.csv", "symmetrize.json"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
}

#[test]
fn low_order_verify_skips_the_strip_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = INTERVAL.replace("\"s\": 0.5", "\"s\": 0.4").replace("4.0", "1.5");
    let out = run(&["verify"], &cfg, dir.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("SKIP subharmonic_strip"), "{stdout}");
    assert!(stdout.contains("skipped (requires s>1/2)"));
    let report = json(&dir.path().join("report.json"));
    let strip = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "subharmonic_strip")
        .unwrap();
    assert_eq!(strip["status"], "skipped");
    let names: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    let mut unique = names.clone();
    unique.sort();
    unique.dedup();
    assert_eq!(unique.len(), names.len());
    // exit status follows the checks
    let passed = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["status"] != "fail");
    assert_eq!(out.status.code(), Some(if passed { 0 } else { 1 }));
}

#[test]
fn coarse_refinement_fails_the_d2n_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["verify", "--refine", "0.25"], INTERVAL, dir.path());
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let line = stdout.lines().find(|l| l.contains("d2n_equivalence")).unwrap();
    assert!(line.starts_with("FAIL"), "{line}");
    assert!(line.contains("dtn_rel_error"));
}

#[test]
fn solver_failure_still_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = INTERVAL.replace("4.0", "0.5");
    let out = run(&["solve"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(1));
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["solver"]["converged"], false);
    assert!(report["solver"]["error"].as_str().unwrap().contains("trivial"));
    assert!(!dir.path().join("u.csv").exists());
}
