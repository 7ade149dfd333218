use std::fs;
use std::process::{Command, Output};

fn qrep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrep")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const SINGLE: &str = r#"
rounds = 20000
[scenario]
kind = "single"
policies = ["optimal", "equal", "standard"]
[grid]
n = [4, 8]
distances_km = [[20.0, 30.0]]
coherence_time_s = [1e-3]
"#;

#[test]
fn simulate_writes_csv_with_metadata() {
    let o = qrep(&["simulate", "--rounds", "5000", "--seed", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    let meta: serde_json::Value = serde_json::from_str(lines.next().unwrap().strip_prefix("# ").unwrap()).unwrap();
    assert_eq!(meta["seed"], 3);
    assert_eq!(meta["command"], "simulate");
    assert!(meta["generator"].as_str().unwrap().contains("ChaCha8"));
    assert!(meta["config"].as_str().unwrap().contains("attenuation_db_per_km = 0.15"));
    assert!(lines.next().unwrap().starts_with("scenario,policy,row_kind"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn sweep_from_config_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("spec.toml");
    fs::write(&cfg, SINGLE).unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = qrep(&["sweep", "--config", cfg.to_str().unwrap(), "--seed", "9", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = fs::read_to_string(&a).unwrap();
    let other = fs::read_to_string(&b).unwrap();
    let body = |t: &str| t.lines().skip(1).map(str::to_owned).collect::<Vec<_>>();
    assert_eq!(body(&text), body(&other));
    // 2 points x 3 policies x (1 run + 1 mean) + header + metadata
    assert_eq!(text.lines().count(), 14);
}

#[test]
fn effective_config_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("spec.toml");
    fs::write(&cfg, SINGLE).unwrap();
    let first = qrep(&["sweep", "--config", cfg.to_str().unwrap(), "--format", "json"]);
    assert!(first.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    let echoed = dir.path().join("echo.toml");
    fs::write(&echoed, doc["metadata"]["config"].as_str().unwrap()).unwrap();
    let second = qrep(&["sweep", "--config", echoed.to_str().unwrap(), "--format", "json"]);
    assert!(second.status.success());
    let doc2: serde_json::Value = serde_json::from_slice(&second.stdout).unwrap();
    assert_eq!(doc["rows"], doc2["rows"]);
}

#[test]
fn every_subcommand_runs() {
    for args in [
        vec!["standard", "--rounds", "1000"],
        vec!["bounds"],
        vec!["chain", "--rounds", "5000", "--warmup", "500"],
        vec!["oracle", "--format", "csv"],
    ] {
        let o = qrep(&args);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).starts_with("# {"), "{args:?}");
    }
    let o = qrep(&["oracle"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let total: f64 = doc["rows"].as_array().unwrap().iter().map(|r| r["probability"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, SINGLE.replace("n = [4, 8]", "n = [4, 8]\ntypo = 1")).unwrap();
    let o = qrep(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("typo"));

    assert_eq!(qrep(&["sweep"]).status.code(), Some(2));
    assert_eq!(qrep(&["simulate", "--rounds", "10", "--warmup", "10"]).status.code(), Some(2));
    assert_eq!(qrep(&["simulate", "--format", "xml"]).status.code(), Some(2));
    assert_eq!(qrep(&["chain", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    let big = dir.path().join("big.toml");
    fs::write(&big, SINGLE.replace("n = [4, 8]", "n = [40]")).unwrap();
    assert_eq!(qrep(&["oracle", "--config", big.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn unwritable_output_is_reported() {
    let o = qrep(&["bounds", "--out", "/nonexistent-dir/x.csv"]);
    assert!(!o.status.success());
    assert_ne!(o.status.code(), Some(0));
}
