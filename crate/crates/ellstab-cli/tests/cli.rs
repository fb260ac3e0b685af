//! End-to-end runs of the `ellstab` binary: JSON layout, exit codes and determinism.

use std::process::{Command, Output};

use serde_json::Value;

fn ellstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ellstab")).args(args).env_remove("ELLSTAB_WORKERS").output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn check(doc: &Value, name: &str) -> f64 {
    doc["residuals"]["checks"][name]["value"].as_f64().expect("numeric check value")
}

fn complex(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn fixed_points_of_the_small_space() {
    let out = ellstab(&["fixed-points", "--N", "3", "--w", "1,0,0", "--v", "1,1,1"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["result"]["count"], 3);
    let labels: Vec<String> =
        doc["result"]["points"].as_array().unwrap().iter().map(|p| p["label"].to_string()).collect();
    assert_eq!(labels, ["[[0,[3]]]", "[[0,[2,1]]]", "[[0,[1,1,1]]]"]);
}

#[test]
fn shuffle_of_two_single_boxes() {
    let out = ellstab(&["shuffle-check", "--N", "3", "--boxes", "1,1", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert!(check(&doc, "max_relative") < 1e-8);
    assert_eq!(doc["seed"], 7);
}

#[test]
fn vertex_constant_term_is_the_restriction() {
    let out = ellstab(&["vertex", "--N", "3", "--w", "1,0,0", "--v", "1,1,1", "--D", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    let series = doc["result"]["series"].as_array().unwrap();
    assert_eq!(series.len(), 9);
    for s in series {
        let first = &s["coefficients"][0];
        assert_eq!(first["d"], serde_json::json!([0, 0, 0]));
        let (a, b) = (complex(&first["value"]), complex(&s["stab_restriction"]));
        let scale = a.0.hypot(a.1).max(1e-300);
        assert!((a.0 - b.0).hypot(a.1 - b.1) <= 1e-10 * scale);
    }
}

#[test]
fn every_result_carries_the_common_fields() {
    let out = ellstab(&["rmatrix", "--v", "1,0,0", "--seed", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    for key in ["seed", "param_point", "residuals", "timings", "result"] {
        assert!(doc.get(key).is_some(), "missing {key}");
    }
    assert_eq!(doc["param_point"]["sample_seed"], 4);
    let states = doc["result"]["states"].as_array().unwrap();
    let m = doc["result"]["matrix"].as_array().unwrap();
    assert_eq!(m.len(), states.len());
    assert!(m.iter().all(|row| row.as_array().unwrap().len() == states.len()));
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = ["vertex", "--v", "1,1,0", "--w", "1,1,0", "--D", "1", "--seed", "3", "--no-timings"];
    let a = ellstab(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_ellstab")).args(args).env("ELLSTAB_WORKERS", "1").output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn failing_check_exits_with_one() {
    let out = ellstab(&[
        "vertex",
        "--lambda",
        "[[0,[2]]]",
        "--D",
        "2",
        "--framing-shift",
        "inverse-hbar",
        "--exponent",
        "symmetrized",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["passed"], false);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(ellstab(&["fixed-points", "--N", "2", "--v", "1,1", "--w", "1,0"]).status.code(), Some(2));
    assert_eq!(ellstab(&["fixed-points", "--v", "1,0"]).status.code(), Some(2));
    assert_eq!(ellstab(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(ellstab(&["acceptance", "--only", "12"]).status.code(), Some(2));
    let bad_env = Command::new(env!("CARGO_BIN_EXE_ellstab"))
        .args(["fixed-points", "--v", "1,0,0", "--w", "1,0,0"])
        .env("ELLSTAB_WORKERS", "many")
        .output()
        .unwrap();
    assert_eq!(bad_env.status.code(), Some(2));
}

#[test]
fn singular_point_exits_with_three() {
    let dir = std::env::temp_dir().join(format!("ellstab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("coincident.json");
    std::fs::write(&cfg, r#"{"params": {"u": [[1.0, 0.0], [1.0, 0.0]]}}"#).unwrap();
    let out = ellstab(&["rmatrix", "--v", "1,0,0", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn config_file_and_out_path() {
    let dir = std::env::temp_dir().join(format!("ellstab-cli-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.json");
    std::fs::write(&cfg, r#"{"N": 4, "v": [1,0,0,0], "w": [1,0,0,0], "seed": 2}"#).unwrap();
    let target = dir.join("result.json");
    let out = ellstab(&["bethe", "--config", cfg.to_str().unwrap(), "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(doc["param_point"]["N"], 4);
    assert!(check(&doc, "newton") < 1e-10);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn acceptance_subset_reports_a_table() {
    let out = ellstab(&["acceptance", "--only", "1,2,5"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["result"]["criteria"].as_array().unwrap().len(), 3);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(stderr.lines().filter(|l| l.contains("PASS")).count(), 3);
}
