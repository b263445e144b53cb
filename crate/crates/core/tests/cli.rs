//! End-to-end checks of the command-line runner.

use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn lclt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lclt")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn forms_to_stdout() {
    let out = lclt(&["forms", "--weight", "12", "--nmax", "10"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,lambda"));
    assert_eq!(lines.next(), Some("1,1.0000000000000000e0"));
    assert_eq!(lines.next(), Some("2,-5.3033008588991060e-1"));
}

#[test]
fn usage_errors_exit_64() {
    for args in [
        vec!["forms", "--weight", "13"],
        vec!["eval", "--t", "-5"],
        vec!["sample", "--count", "0"],
        vec!["no-such-command"],
        vec!["forms", "--bogus"],
        vec!["eval", "--method", "nonsense", "--t", "100"],
    ] {
        let out = lclt(&args);
        assert_eq!(code(&out), 64, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(&lclt(&["--help"])), 0);
    assert_eq!(code(&lclt(&["--version"])), 0);
}

#[test]
fn corrupt_table_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "1 1\n2 -24\n3 252\n4 0\n").unwrap();
    let out = lclt(&["forms", "--weight", "12", "--load", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn capacity_exits_3() {
    let out = lclt(&["eval", "--t", "1e6", "--method", "afe", "--set", "length_cap=1000"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bad_config_line_exits_64() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "seed 3\n").unwrap();
    let out = lclt(&["sample", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 64);
}

#[test]
fn eval_methods_agree() {
    let out = lclt(&["eval", "--t", "100", "--method", "both", "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["data"].is_array() || doc["data"].is_object());
    let series = lclt(&["eval", "--sigma", "2", "--t", "0"]);
    assert_eq!(code(&series), 0, "{}", String::from_utf8_lossy(&series.stderr));
}

#[test]
fn sample_is_deterministic_and_reproducible() {
    let args = ["sample", "--weights", "12", "--T", "1000", "--count", "24", "--seed", "5"];
    let a = lclt(&args);
    let b = lclt(&args);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout.clone()).unwrap();
    assert!(text.starts_with("t,log_abs_L_1,re_P_1,m_residual,lm_residual,near_zero\n"));
    assert_eq!(text.lines().count(), 25);

    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let mut with_out = args.to_vec();
    with_out.extend(["--out", first.to_str().unwrap()]);
    assert_eq!(code(&lclt(&with_out)), 0);
    let csv = std::fs::read(first.join("sample.csv")).unwrap();
    assert_eq!(csv, a.stdout);
    let meta = read_json(&first.join("sample.csv.meta.json"));
    assert_eq!(meta["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&csv)));
    let report = read_json(&first.join("report.json"));
    assert!(report["content_sha256"].is_string());

    // Feeding the recorded configuration back reproduces the table.
    let cfg = dir.path().join("replay.cfg");
    std::fs::write(&cfg, meta["config_file"].as_str().unwrap()).unwrap();
    let second = dir.path().join("second");
    let out = lclt(&["sample", "--config", cfg.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read(second.join("sample.csv")).unwrap(), csv);
}

#[test]
fn poly_and_moments_run() {
    let out = lclt(&["poly", "--weight", "12", "--T", "1000", "--kind", "P0"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).lines().count() > 1);
    let out = lclt(&["moments", "--X", "20", "--T", "1e4", "--k", "0,1", "--l", "0,1", "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let text = doc["data"].to_string();
    assert!(text.contains("agrees"));
}

#[test]
fn verify_single_criterion() {
    let out = lclt(&["verify", "--criterion", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("criterion  2"));
    assert!(text.contains("PASS"));
}
