use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scene(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenes")
        .join(name)
}

fn reparam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reparam"))
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write_scene(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("scene.ini");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn free_particle_jsonl() {
    let o = reparam(&["simulate", scene("free_particle.scene").to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let records: Vec<Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(records.len(), 101);
    for r in &records {
        assert!(r["h"].as_f64().unwrap().abs() <= 1e-10);
        assert_eq!(r["x"].as_array().unwrap().len(), 4);
    }
    // straight line x(τ) = x0 + v τ, with v normalized by the proper-time gauge
    let v1 = records[0]["v"][1].as_f64().unwrap();
    assert!((v1 - 0.3 / 0.9525f64.sqrt()).abs() < 1e-14);
    let last = &records[100];
    let tau = last["tau"].as_f64().unwrap();
    assert!((tau - 1.0).abs() < 1e-12);
    let x1 = last["x"][1].as_f64().unwrap();
    assert!((x1 - (1.0 + v1 * tau)).abs() < 1e-12);
    // the report goes to stderr when the trajectory owns stdout
    let report: Value = serde_json::from_str(
        String::from_utf8_lossy(&o.stderr)
            .lines()
            .find(|l| l.starts_with('{'))
            .unwrap(),
    )
    .unwrap();
    assert_eq!(report["pass"], Value::Bool(true));
}

#[test]
fn csv_to_file_with_report_on_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let o = reparam(&[
        "simulate",
        scene("free_particle.scene").to_str().unwrap(),
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "tau,x0,x1,x2,x3,v0,v1,v2,v3,L,h,gauge_value,drift"
    );
    assert_eq!(lines.count(), 101);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["command"], "simulate");
    assert_eq!(report["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_scene(
        dir.path(),
        "[target]\npreset = minkowski\n[integrate]\nstepp = 0.1\n",
    );
    let o = reparam(&["simulate", p.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("stepp"));
}

#[test]
fn unknown_preset_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_scene(dir.path(), "[target]\npreset = kerr\n");
    assert_eq!(code(&reparam(&["diagnose", p.to_str().unwrap()])), 1);
}

#[test]
fn missing_scene_is_an_io_error() {
    let o = reparam(&["simulate", "/nonexistent/scene.ini"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let o = reparam(&[
        "simulate",
        scene("free_particle.scene").to_str().unwrap(),
        "--out",
        "/nonexistent/dir/t.jsonl",
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn zero_speed_ansatz_is_numeric() {
    let o = reparam(&[
        "simulate",
        scene("sn_zero_velocity.scene").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn mislabeled_order_fails_diagnose() {
    let o = reparam(&[
        "diagnose",
        scene("diagnose_mislabeled.scene").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["pass"], Value::Bool(false));
}

#[test]
fn diagnose_passes_and_depends_on_seed_only_through_states() {
    let s = scene("diagnose_em_gravity.scene");
    let a = reparam(&["diagnose", s.to_str().unwrap(), "--seed", "3"]);
    let b = reparam(&["diagnose", s.to_str().unwrap(), "--seed", "4"]);
    assert_eq!(code(&a), 0);
    assert_eq!(code(&b), 0);
    let (ra, rb): (Value, Value) = (
        serde_json::from_slice(&a.stdout).unwrap(),
        serde_json::from_slice(&b.stdout).unwrap(),
    );
    assert_eq!(ra["config_sha256"], rb["config_sha256"]);
    assert_eq!(ra["seed"], 3);
    assert!(ra["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["pass"] == Value::Bool(true)));
}

#[test]
fn normalization_flag_changes_hash_and_action() {
    let s = scene("brane_flat.scene");
    let a = reparam(&["brane", s.to_str().unwrap()]);
    let b = reparam(&["brane", s.to_str().unwrap(), "--dng-normalization", "paper"]);
    assert_eq!(code(&a), 0);
    assert_eq!(code(&b), 0);
    let (ra, rb): (Value, Value) = (
        serde_json::from_slice(&a.stdout).unwrap(),
        serde_json::from_slice(&b.stdout).unwrap(),
    );
    assert_ne!(ra["config_sha256"], rb["config_sha256"]);
    let action = |r: &Value| r["values"]["action"].as_f64().unwrap();
    assert!((action(&ra) - 1.0).abs() < 1e-10);
    assert!((action(&rb) - 2f64.sqrt()).abs() < 1e-10);
}

#[test]
fn sweep_table_keeps_input_order() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = reparam(&[
        "sweep",
        scene("sweep_sn_speed.scene").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "index,v0,radial_accel,loglog_slope");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert!(rows.len() >= 2);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[0], i as f64);
    }
    assert!(rows.windows(2).all(|w| w[0][1] < w[1][1]));
}
