//! End-to-end pipeline tests through the command-line binary.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tacticmine"))
}

fn run_ok(args: &[&str], cwd: &Path) -> Output {
    let out = bin().args(args).current_dir(cwd).output().unwrap();
    assert!(
        out.status.success(),
        "command {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn simulate_train_report_decode_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();

    run_ok(
        &[
            "simulate", "--paper-model", "--n", "60", "--len", "40", "--seed", "7",
            "--out", "corpus.csv", "--sidecar", "sidecar.json",
        ],
        cwd,
    );
    assert!(cwd.join("corpus.csv").exists());
    assert!(cwd.join("sidecar.json").exists());

    let out = run_ok(
        &[
            "train", "--input", "corpus.csv", "-m", "5", "--out", "model.json",
            "--seed", "3", "--restarts", "4", "--max-iters", "150", "--tol", "1e-5",
        ],
        cwd,
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("log_likelihood"), "{stdout}");
    assert!(stdout.contains("iterations"), "{stdout}");

    run_ok(&["validate", "--model", "model.json"], cwd);

    let out = run_ok(
        &[
            "report", "--model", "model.json", "--heatmap", "heatmap.svg",
            "--json", "report.json",
        ],
        cwd,
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("Dominant path:"), "{stdout}");
    let svg = std::fs::read_to_string(cwd.join("heatmap.svg")).unwrap();
    assert!(svg.starts_with("<svg"));

    let out = run_ok(&["decode", "--model", "model.json", "--input", "corpus.csv"], cwd);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let first = stdout.lines().next().unwrap();
    let record: serde_json::Value = serde_json::from_str(first).unwrap();
    assert_eq!(record["session_id"], "s1");
    assert_eq!(
        record["actions"].as_array().unwrap().len(),
        record["tactics"].as_array().unwrap().len()
    );
    assert!(record["log_prob"].as_f64().unwrap() < 0.0);
}

#[test]
fn simulate_is_byte_reproducible_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    for name in ["a.csv", "b.csv"] {
        run_ok(
            &["simulate", "--paper-model", "--n", "20", "--len", "15", "--seed", "42", "--out", name],
            cwd,
        );
    }
    assert_eq!(
        std::fs::read(cwd.join("a.csv")).unwrap(),
        std::fs::read(cwd.join("b.csv")).unwrap()
    );
}

#[test]
fn select_prints_table_and_best_m() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    run_ok(
        &["simulate", "--paper-model", "--n", "20", "--len", "20", "--seed", "1", "--out", "c.csv"],
        cwd,
    );
    let out = run_ok(
        &[
            "select", "--input", "c.csv", "--m-min", "2", "--m-max", "3",
            "--restarts", "2", "--max-iters", "40", "--json", "curve.json",
        ],
        cwd,
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("M\tBIC"), "{stdout}");
    assert!(stdout.contains("best_M = "), "{stdout}");
    let curve: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(cwd.join("curve.json")).unwrap()).unwrap();
    assert_eq!(curve["points"].as_array().unwrap().len(), 2);
}

#[test]
fn missing_input_exits_2() {
    let out = bin()
        .args(["train", "--input", "nope.csv", "-m", "2", "--out", "m.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.to_lowercase().contains("no such file"), "{stderr}");
}

#[test]
fn invalid_m_range_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    run_ok(
        &["simulate", "--paper-model", "--n", "3", "--len", "5", "--out", "c.csv"],
        cwd,
    );
    let out = bin()
        .args(["select", "--input", "c.csv", "--m-min", "5", "--m-max", "2"])
        .current_dir(cwd)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn decode_with_unknown_action_fails_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();

    run_ok(
        &["simulate", "--paper-model", "--n", "3", "--len", "5", "--out", "c.csv"],
        cwd,
    );
    run_ok(
        &["train", "--input", "c.csv", "-m", "2", "--restarts", "2", "--out", "m.json"],
        cwd,
    );
    std::fs::write(
        cwd.join("bad.csv"),
        "session_id,timestamp,action\ns1,2020-01-01T00:00:00Z,Z\n",
    )
    .unwrap();
    let out = bin()
        .args(["decode", "--model", "m.json", "--input", "bad.csv"])
        .current_dir(cwd)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("\"Z\""));
}

#[test]
fn train_with_preset_alphabet_and_jsonl_input() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    let jsonl = (0..8)
        .map(|i| {
            format!(
                r#"{{"session_id":"s{}","timestamp":"2020-01-01T00:00:{:02}Z","action":"{}"}}"#,
                i % 2,
                i,
                ["Q", "V"][i % 2]
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    std::fs::write(cwd.join("log.jsonl"), jsonl).unwrap();
    run_ok(
        &[
            "train", "--input", "log.jsonl", "--format", "jsonl",
            "--alphabet", "Q,V,S,W,T", "-m", "1", "--out", "m.json",
        ],
        cwd,
    );
    let model: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(cwd.join("m.json")).unwrap()).unwrap();
    assert_eq!(model["alphabet"].as_array().unwrap().len(), 5);
    assert_eq!(model["m"], 1);
}

#[test]
fn trained_model_round_trips_through_decode_likelihood() {
    // The log-likelihood printed by train must match what the saved model
    // yields when reloaded.
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    run_ok(
        &["simulate", "--paper-model", "--n", "10", "--len", "10", "--seed", "2", "--out", "c.csv"],
        cwd,
    );
    let out1 = run_ok(
        &["train", "--input", "c.csv", "-m", "3", "--restarts", "2", "--seed", "5", "--out", "m1.json"],
        cwd,
    );
    let out2 = run_ok(
        &["train", "--input", "c.csv", "-m", "3", "--restarts", "2", "--seed", "5", "--out", "m2.json"],
        cwd,
    );
    assert_eq!(out1.stdout, out2.stdout);
    assert_eq!(
        std::fs::read(cwd.join("m1.json")).unwrap(),
        std::fs::read(cwd.join("m2.json")).unwrap()
    );
}
