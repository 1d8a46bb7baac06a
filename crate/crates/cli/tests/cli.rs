use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const CONSENSUS: &str = r#"{"mode": "consensus", "graph": {"n": 3, "edges": [[1, 2], [2, 3], [3, 1]]},
    "schedule": {"kind": "bernoulli", "p_drop": 0.5, "window": 3, "seed": 4},
    "horizon": 200, "inputs": [[0.2], [0.4], [0.9]]}"#;

const AUDIT: &str = r#"{"mode": "matrix-audit", "graph": {"n": 2, "edges": [[1, 2], [2, 1]]},
    "schedule": {"kind": "periodic", "window": 2}, "horizon": 10}"#;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lossy-consensus"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn consensus_run_writes_outputs_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", CONSENSUS);
    let out = dir.path().join("out");
    let result = bin(&["consensus", "--config", &cfg, "--out", out.to_str().unwrap(), "--tee-csv"]);
    assert_eq!(result.status.code(), Some(0), "{}", String::from_utf8_lossy(&result.stderr));
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(String::from_utf8(result.stdout).unwrap(), trace);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], true);
    assert_eq!(summary["seed"], 4);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", CONSENSUS);
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("out{k}"));
        let result = bin(&["consensus", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "9"]);
        assert_eq!(result.status.code(), Some(0));
        outputs.push(
            ["trace.csv", "summary.json", "schedule.csv"].map(|f| fs::read(out.join(f)).unwrap()),
        );
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn certification_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.json", AUDIT);
    let out = dir.path().join("out");
    let result = bin(&["verify-schedule", "--config", &cfg, "--out", out.to_str().unwrap(), "--window", "1"]);
    assert_eq!(result.status.code(), Some(2));
    let ok = bin(&["verify-schedule", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn operational_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let missing = dir.path().join("missing.json");
    let result = bin(&["consensus", "--config", missing.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(1));

    let cfg = write_config(dir.path(), "a.json", AUDIT);
    let wrong_mode = bin(&["optimize", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(wrong_mode.status.code(), Some(1));

    let bad = write_config(dir.path(), "bad.json", r#"{"mode": "consensus", "graph": {"n": 2, "edges": [[1, 1]]}, "horizon": 1, "inputs": [[1.0], [2.0]]}"#);
    let self_loop = bin(&["consensus", "--config", &bad, "--out", out.to_str().unwrap()]);
    assert_eq!(self_loop.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&self_loop.stderr).contains("self-loop"));
}

#[test]
fn sweep_writes_one_directory_per_config() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_config(dir.path(), "first.json", CONSENSUS);
    let b = write_config(dir.path(), "second.json", &CONSENSUS.replace("\"seed\": 4", "\"seed\": 5"));
    let out = dir.path().join("sweep");
    let result = bin(&["consensus", "--sweep", "--config", &a, "--config", &b, "--out", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(0), "{}", String::from_utf8_lossy(&result.stderr));
    let first = fs::read(out.join("first/schedule.csv")).unwrap();
    let second = fs::read(out.join("second/schedule.csv")).unwrap();
    assert_ne!(first, second);

    let single = dir.path().join("single");
    bin(&["consensus", "--config", &a, "--out", single.to_str().unwrap()]);
    assert_eq!(fs::read(single.join("summary.json")).unwrap(), fs::read(out.join("first/summary.json")).unwrap());
}
