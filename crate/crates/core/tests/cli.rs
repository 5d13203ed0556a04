use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tractability"))
}

fn write_config(dir: &Path, config: &Value) -> std::path::PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    path
}

fn sweep(dims: &[usize], epsilons: &[f64]) -> Value {
    json!({
        "spectrum": {"kind": "catalog", "name": "geometric_half"},
        "dims": dims,
        "epsilons": epsilons,
        "methods": ["enumerative", "convolution"],
    })
}

#[test]
fn compare_writes_the_examples() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &sweep(&[1, 2], &[0.5]));
    let out = dir.path().join("rows.csv");
    let status = bin()
        .args(["compare", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let mut reader = csv::Reader::from_path(&out).unwrap();
    let headers = reader.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4);
    for row in &rows {
        let (n, card) = (&row[col("n_min")], &row[col("card_A")]);
        match &row[col("d")] {
            "1" => {
                assert_eq!(n, "2");
                assert!(row[col("theta")].parse::<f64>().unwrap().abs() < 1e-12);
            }
            "2" => assert_eq!((n, card), ("8", "10")),
            other => panic!("unexpected d {other}"),
        }
        let exact: f64 = row[col("log_n_exact")].parse().unwrap();
        let hat: f64 = row[col("log_n_hat")].parse().unwrap();
        let ratio: f64 = row[col("ratio")].parse().unwrap();
        assert!((ratio - (exact - hat).exp()).abs() <= 1e-12 * ratio);
        assert_eq!(&row[col("status")], "ok");
    }
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &sweep(&[3, 1, 8, 5], &[0.7, 0.2, 0.5]));
    let run = |name: &str, format: &str| {
        let out = dir.path().join(name);
        let status = bin()
            .args(["compare", "--format", format, "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        fs::read(out).unwrap()
    };
    for format in ["csv", "json"] {
        assert_eq!(run(&format!("a.{format}"), format), run(&format!("b.{format}"), format));
    }
    let rows: Value = serde_json::from_slice(&run("c.json", "json")).unwrap();
    let keys: Vec<(u64, f64)> = rows
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["d"].as_u64().unwrap(), r["epsilon"].as_f64().unwrap()))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(keys, sorted);
    assert!(rows[0]["n_min"].is_string());
}

#[test]
fn bad_epsilon_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &sweep(&[1], &[1.5]));
    let status = bin().args(["exact", "--config"]).arg(&config).status().unwrap();
    assert_eq!(status.code(), Some(2));
    let missing = bin().args(["exact", "--config", "/nonexistent/config.json"]).status().unwrap();
    assert_eq!(missing.code(), Some(2));
}

#[test]
fn budget_overrun_flushes_rows_and_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &sweep(&[1, 40], &[0.1]));
    let out = dir.path().join("rows.csv");
    let status = bin()
        .args(["exact", "--method", "enumerative", "--budget-mb", "1", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
    let text = fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].ends_with(",ok"));
    assert!(lines[2].ends_with(",budget-exceeded"));
}

#[test]
fn analyze_reports_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &json!({"kind": "catalog", "name": "geometric_half"}));
    let output = bin().args(["analyze", "--config"]).arg(&config).output().unwrap();
    assert!(output.status.success());
    let report: Value = serde_json::from_slice(&output.stdout).unwrap();
    assert!((report["Lambda"].as_f64().unwrap() - 1.0).abs() < 1e-15);
    assert!((report["M"].as_f64().unwrap() - std::f64::consts::LN_2).abs() < 1e-14);
    assert!((report["explosion"].as_f64().unwrap() - 4.0).abs() < 1e-13);
    assert!((report["lattice"]["h"].as_f64().unwrap() - std::f64::consts::LN_2 / 2.0).abs() < 1e-15);

    let config = write_config(dir.path(), &json!({"kind": "explicit", "lambdas": [0.4]}));
    let output = bin().args(["analyze", "--config"]).arg(&config).output().unwrap();
    let report: Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(report["degenerate"], true);
    assert!((report["explosion"].as_f64().unwrap() - 1.0).abs() < 1e-15);
}
