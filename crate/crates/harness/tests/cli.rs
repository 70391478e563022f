//! End-to-end runs of the `layerheat` binary: artifacts, summary line,
//! reproducibility and the exit-code contract.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn layerheat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_layerheat")).args(args).env("RUST_LOG", "warn").output().expect("spawn layerheat")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.json");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn spectrum_writes_artifacts_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = layerheat(&["spectrum", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    for name in ["spectrum_eigenvalues.csv", "plot.gp", "summary.json", "config.resolved.json"] {
        assert!(tmp.path().join(name).is_file(), "missing {name}");
    }
    let line = String::from_utf8(out.stdout).unwrap();
    let summary: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    assert_eq!(summary["problem"], "spectrum");
    assert_eq!(summary["status"], "ok");
    assert_eq!(summary["config_hash"].as_str().unwrap().len(), 64);
    let csv = fs::read_to_string(tmp.path().join("spectrum_eigenvalues.csv")).unwrap();
    assert!(csv.starts_with("n,lambda,residual,norm"));
    assert_eq!(csv.lines().count(), 31);
}

#[test]
fn resolved_config_reruns_to_the_same_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("a");
    let out = layerheat(&["multilayer", "--out", first.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let resolved = first.join("config.resolved.json");
    let second = tmp.path().join("b");
    let again = layerheat(&["multilayer", "--config", resolved.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(0), "{}", stderr(&again));
    let hash = |o: &Output| serde_json::from_slice::<serde_json::Value>(&o.stdout).unwrap()["config_hash"].clone();
    assert_eq!(hash(&out), hash(&again));
}

#[test]
fn csv_outputs_do_not_depend_on_thread_mode() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("threads");
    let b = tmp.path().join("det");
    assert_eq!(layerheat(&["stefan", "--threads", "3", "--out", a.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(layerheat(&["stefan", "--deterministic", "--out", b.to_str().unwrap()]).status.code(), Some(0));
    for name in ["stefan_trace.csv", "stefan_profile.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name} differs");
    }
}

#[test]
fn config_errors_exit_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let cases = [
        r#"{"problem": "spectrum", "spectrum": {"count": 5, "colour": 1}}"#,
        r#"{"problem": "oit"}"#,
        r#"{"problem": "spectrum", "spectrum": {"interfaces": [0, 2.2, 1.2]}}"#,
        r#"{"problem": "spectrum", "stefan": {}}"#,
        r#"{"problem": "spectrum""#,
    ];
    for text in cases {
        let cfg = write_config(tmp.path(), text);
        let out = layerheat(&["spectrum", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "config {text}: {}", stderr(&out));
    }
    assert_eq!(layerheat(&["spectrum", "--threads", "0"]).status.code(), Some(2));
    assert_eq!(layerheat(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn io_errors_exit_with_4() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("absent.json");
    let out = layerheat(&["spectrum", "--config", missing.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
    let file = tmp.path().join("plain");
    fs::write(&file, "x").unwrap();
    let under_file = file.join("out");
    let out = layerheat(&["spectrum", "--out", under_file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}

#[test]
fn validate_exit_code_follows_the_checks() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"problem": "validate", "validate": {"only": ["5", "9"]}}"#);
    let out = layerheat(&["validate", "--config", &cfg, "--out", tmp.path().join("ok").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let table = fs::read_to_string(tmp.path().join("ok/validate.csv")).unwrap();
    assert!(table.starts_with("criterion,part,passed,detail,seconds"));

    // the freezing-slab check includes a part that does not reach its tolerance
    let cfg = write_config(tmp.path(), r#"{"problem": "validate", "validate": {"only": ["2"]}}"#);
    let out = layerheat(&["validate", "--config", &cfg, "--out", tmp.path().join("bad").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["status"], "failed");

    let cfg = write_config(tmp.path(), r#"{"problem": "validate", "validate": {"only": ["12"]}}"#);
    assert_eq!(layerheat(&["validate", "--config", &cfg]).status.code(), Some(2));
}
