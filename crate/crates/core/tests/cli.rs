//! End-to-end runs of the `edgeboost` binary.

mod common;

use std::path::Path;
use std::process::{Command, Output};

use edgeboost::cli::{TradeoffInference, TradeoffSize};
use edgeboost::metrics::EvalReport;

fn edgeboost(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edgeboost"))
        .args(args)
        .env_remove("EDGEBOOST_SEED")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows<T: serde::de::DeserializeOwned>(path: &Path) -> Vec<T> {
    csv::Reader::from_path(path)
        .unwrap()
        .deserialize()
        .collect::<Result<_, _>>()
        .unwrap()
}

#[test]
fn run_all_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let input = common::write_surrogate(dir.path(), 1500, 3);
    let out = dir.path().join("out");
    let o = edgeboost(&[
        "run-all",
        "--input",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--repeats",
        "5",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    for t in ["CO", "NO2"] {
        for m in ["full", "tiny"] {
            assert!(out.join(format!("models/{t}_{m}.tgbm")).is_file());
            let log = std::fs::read_to_string(out.join(format!("logs/train_{t}_{m}.csv"))).unwrap();
            assert!(log.starts_with("round,train_rmse\n"));
            let rmse: Vec<f64> = log.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
            assert!(rmse.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    let eval_text = std::fs::read_to_string(out.join("reports/evaluate.csv")).unwrap();
    assert!(eval_text.starts_with("target,model,mae,rmse,mbe,r2,n\n"));
    let eval: Vec<EvalReport> = csv_rows(&out.join("reports/evaluate.csv"));
    assert_eq!(eval.len(), 4);
    assert!(eval.iter().all(EvalReport::identities_hold));

    let profile = std::fs::read_to_string(out.join("reports/profile.csv")).unwrap();
    assert!(profile.starts_with("target,model,inference_ms,per_sample_us,model_size_kb,peak_mem_mb,repeats\n"));

    let inference: Vec<TradeoffInference> = csv_rows(&out.join("reports/tradeoff_inference.csv"));
    let size: Vec<TradeoffSize> = csv_rows(&out.join("reports/tradeoff_size.csv"));
    for ((e, i), s) in eval.iter().zip(&inference).zip(&size) {
        assert_eq!((&e.target, &e.model), (&i.target, &i.model));
        assert_eq!(e.r2.to_bits(), i.r2.to_bits());
        assert_eq!(e.r2.to_bits(), s.r2.to_bits());
    }
    let summary = std::fs::read_to_string(out.join("reports/summary.md")).unwrap();
    assert!(summary.contains("| NO2 | tiny |"));
    assert!(summary.contains("0.7266"));

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("reports/evaluate.json")).unwrap()).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 4);
}

#[test]
fn ingest_is_byte_deterministic_and_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let input = common::write_surrogate(dir.path(), 300, 1);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = edgeboost(&["ingest", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        let text = String::from_utf8(o.stdout).unwrap();
        assert!(text.starts_with("300 rows, 12 columns"), "{text}");
        assert!(text.contains("CO(GT)"));
    }
    assert_eq!(
        std::fs::read(a.join("dataset.tgds")).unwrap(),
        std::fs::read(b.join("dataset.tgds")).unwrap()
    );
}

#[test]
fn missing_upstream_step_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();

    let o = edgeboost(&["report", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("edgeboost evaluate"), "{}", stderr(&o));

    let o = edgeboost(&["train", "--target", "CO", "--model", "tiny", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("edgeboost ingest"), "{}", stderr(&o));
}

#[test]
fn usage_and_io_errors_exit_2() {
    let o = edgeboost(&["ingest", "--input", "/nonexistent/file.csv"]);
    assert_eq!(o.status.code(), Some(2));
    let o = edgeboost(&["train", "--target", "SO2", "--model", "full"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_number_reports_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let mut lines: Vec<String> = common::surrogate_csv(5, 1).lines().map(str::to_string).collect();
    let mut fields: Vec<&str> = lines[3].split(';').collect();
    fields[3] = "abc";
    lines[3] = fields.join(";");
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();

    let o = edgeboost(&["ingest", "--input", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad.csv:4:"), "{}", stderr(&o));
}

#[test]
fn evaluation_must_reuse_the_training_split() {
    let dir = tempfile::tempdir().unwrap();
    let input = common::write_surrogate(dir.path(), 400, 2);
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    assert!(edgeboost(&["ingest", "--input", input.to_str().unwrap(), "--out", out_s]).status.success());
    let o = edgeboost(&["train", "--target", "NO2", "--model", "tiny", "--seed", "7", "--out", out_s]);
    assert!(o.status.success(), "{}", stderr(&o));

    let o = edgeboost(&["evaluate", "--target", "NO2", "--model", "tiny", "--out", out_s]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--seed 7"), "{}", stderr(&o));

    let o = Command::new(env!("CARGO_BIN_EXE_edgeboost"))
        .args(["evaluate", "--target", "NO2", "--model", "tiny", "--out", out_s])
        .env("EDGEBOOST_SEED", "7")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn feature_count_mismatch_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = common::write_surrogate(dir.path(), 400, 4);
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    assert!(edgeboost(&["ingest", "--input", input.to_str().unwrap(), "--out", out_s]).status.success());
    assert!(edgeboost(&["train", "--target", "CO", "--model", "tiny", "--out", out_s]).status.success());

    // re-ingest with one more sensor channel dropped
    let o = edgeboost(&[
        "ingest",
        "--input",
        input.to_str().unwrap(),
        "--drop",
        "NMHC(GT),AH",
        "--out",
        out_s,
    ]);
    assert!(o.status.success());
    let o = edgeboost(&["evaluate", "--target", "CO", "--model", "tiny", "--out", out_s]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("schema mismatch"), "{}", stderr(&o));
}
