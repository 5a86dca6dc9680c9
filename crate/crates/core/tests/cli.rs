//! CLI contract: flags, exit codes, CSV schema and the replayable JSON
//! summary, driven through the real binary.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rinorm"))
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

const MAIN_CFG: &str = r#"{
  "experiment": "main_equivalence",
  "dists": [
    {"kind": "uniform", "b": 1.0},
    {"kind": "uniform", "b": 1.0}
  ],
  "M": {"ri": "lp", "p": 1},
  "N": {"seq": "linf"},
  "mc": {"samples_per_batch": 2000, "batches": 4, "seed": 42}
}"#;

#[test]
fn list_prints_registry() {
    let out = bin().arg("--list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().collect();
    assert_eq!(
        names,
        vec![
            "main_equivalence",
            "rosenthal",
            "gauss_km",
            "orlicz_lambda",
            "selector",
            "hj_moments",
            "tail_bound",
            "remark_iid",
        ]
    );
}

#[test]
fn missing_config_exits_2() {
    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_config_exits_2() {
    let path = tmp("bad.json");
    fs::write(&path, "{ not json").unwrap();
    let out = bin().arg("--config").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("malformed config"), "stderr: {err}");
}

#[test]
fn unknown_experiment_exits_2_with_message() {
    let path = tmp("unknown.json");
    fs::write(&path, MAIN_CFG.replace("main_equivalence", "mystery")).unwrap();
    let out = bin().arg("--config").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("unknown experiment"), "stderr: {err}");
}

#[test]
fn main_equivalence_run_writes_expected_artifacts() {
    let cfg_path = tmp("main.json");
    fs::write(&cfg_path, MAIN_CFG).unwrap();
    let out_dir = tmp("main-out");
    let out = bin()
        .arg("--config")
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let csv = fs::read_to_string(out_dir.join("results.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "experiment,family,n,M,N,samples_per_batch,batches,seed,lhs,lhs_stderr,rhs,ratio,window_lo,window_hi,pass"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    // rhs column: \int_0^1 Y + Y(1) = 0.75 + 0.5
    let rhs: f64 = row[10].parse().unwrap();
    assert!((rhs - 1.25).abs() < 1e-7, "rhs = {rhs}");
    let ratio: f64 = row[11].parse().unwrap();
    assert!(ratio > 0.1 && ratio < 10.0);

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], serde_json::json!(42));
    assert_eq!(summary["experiment"], serde_json::json!("main_equivalence"));
    assert!(summary["rows"][0]["ratio"].is_number());
    assert!(summary["config"]["mc"]["seed"].is_number(), "summary must be replayable");
}

#[test]
fn seed_override_changes_output_and_is_deterministic() {
    let cfg_path = tmp("seeded.json");
    fs::write(&cfg_path, MAIN_CFG).unwrap();
    let run = |seed: &str, dir: &str| -> String {
        let out_dir = tmp(dir);
        let st = bin()
            .arg("--config")
            .arg(&cfg_path)
            .arg("--seed")
            .arg(seed)
            .arg("--out")
            .arg(&out_dir)
            .status()
            .unwrap();
        assert!(st.success());
        fs::read_to_string(out_dir.join("results.csv")).unwrap()
    };
    let a = run("7", "seed-a");
    let b = run("7", "seed-b");
    let c = run("8", "seed-c");
    assert_eq!(a, b, "same seed must be bit-identical");
    assert_ne!(a, c, "different seed must differ");
}

#[test]
fn samples_override_applies() {
    let cfg_path = tmp("samples.json");
    fs::write(&cfg_path, MAIN_CFG).unwrap();
    let out_dir = tmp("samples-out");
    let st = bin()
        .arg("--config")
        .arg(&cfg_path)
        .arg("--samples")
        .arg("500")
        .arg("--out")
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(st.success());
    let csv = fs::read_to_string(out_dir.join("results.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[5], "500");
}

#[test]
fn experiment_override_reaches_registry() {
    let cfg_path = tmp("override.json");
    fs::write(&cfg_path, MAIN_CFG).unwrap();
    let out = bin()
        .arg("--config")
        .arg(&cfg_path)
        .arg("--experiment")
        .arg("rosenthal")
        .arg("--out")
        .arg(tmp("override-out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(tmp("override-out").join("results.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("rosenthal,"));
}
