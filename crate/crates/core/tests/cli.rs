//! End-to-end tests of the `ivse` binary: exit-code contract, artifact
//! layout, determinism, and error reporting. Every run here uses deliberately
//! tiny grids — the numerics behind the defaults are covered by the library
//! tests and the acceptance battery.

use ivse::field::load_snapshot;
use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ivse"))
}

/// Fresh scratch directory unique to one test.
fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ivse-cli-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn tiny_sets(cmd: &mut Command) -> &mut Command {
    cmd.args([
        "--set",
        "n_r=32",
        "--set",
        "n_z=32",
        "--set",
        "rule_order=8",
        "--set",
        "kappa_levels=[8,16]",
    ])
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn config_errors_exit_two_and_name_the_key() {
    let dir = scratch("amp-sign");
    let out = bin()
        .args(["simulate", "--set", "amplitude=1"])
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("amplitude"));
    // Manifest and structured error are written even though nothing ran.
    let manifest = read_json(&dir.join("manifest.json"));
    assert_eq!(manifest["exit_status"], "config-error");
    assert_eq!(manifest["mode"], "simulate");
    let error = read_json(&dir.join("error.json"));
    assert_eq!(error["kind"], "config");
    assert!(error["message"].as_str().unwrap().contains("amplitude"));
}

#[test]
fn unknown_keys_and_malformed_overrides_exit_two() {
    let dir = scratch("unknown-key");
    let out = bin()
        .args(["kappa", "--set", "rule_ordr=8"])
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("rule_ordr"));

    let out = bin()
        .args(["kappa", "--set", "rule_order"])
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("key=value"));
}

#[test]
fn missing_config_file_exits_two() {
    let dir = scratch("missing-file");
    let out = bin()
        .args(["kappa", "--config", "/nonexistent/run.json"])
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("/nonexistent/run.json"));
}

#[test]
fn invalid_thread_count_exits_two() {
    let dir = scratch("threads");
    let out = bin()
        .args(["kappa"])
        .arg("--out")
        .arg(&dir)
        .env("IVSE_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("IVSE_THREADS"));
}

#[test]
fn kappa_mode_writes_report_and_manifest() {
    let dir = scratch("kappa-ok");
    let out = tiny_sets(bin().arg("kappa"))
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let estimate = read_json(&dir.join("kappa.json"));
    assert!(estimate["value"].as_f64().unwrap() > 0.0);
    let manifest = read_json(&dir.join("manifest.json"));
    assert_eq!(manifest["exit_status"], "ok");
    assert!(manifest["threads"].as_u64().unwrap() >= 1);
    assert!(manifest["config_sha256"].as_str().unwrap().len() == 64);
    assert!(manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .any(|v| v == "kappa.json"));
}

#[test]
fn subcommand_is_authoritative_over_the_file_mode() {
    let dir = scratch("mode-override");
    let cfg_path = dir.join("run.json");
    fs::write(&cfg_path, r#"{"mode":"euler","n_r":32,"n_z":32,"rule_order":8,"kappa_levels":[8,16]}"#)
        .unwrap();
    let out = bin()
        .arg("kappa")
        .arg("--config")
        .arg(&cfg_path)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    assert!(dir.join("kappa.json").exists());
    assert_eq!(read_json(&dir.join("manifest.json"))["mode"], "kappa");
}

#[test]
fn simulate_writes_the_fixed_schema_and_is_bit_deterministic() {
    let run = |dir: &Path, threads: &str| {
        let out = tiny_sets(bin().arg("simulate"))
            .args(["--set", "max_steps=25", "--set", "snapshot_interval=10"])
            .arg("--out")
            .arg(dir)
            .env("IVSE_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    };
    let a = scratch("sim-a");
    let b = scratch("sim-b");
    run(&a, "1");
    run(&b, "2");

    let trace = fs::read_to_string(a.join("trace.csv")).unwrap();
    assert!(trace.starts_with("t,q,sup_norm,dt,lower_curve,violation_flag\n"));
    // Identical configuration reproduces the trace byte for byte — here even
    // across thread counts, since all parallel reductions are
    // order-deterministic.
    assert_eq!(
        fs::read(a.join("trace.csv")).unwrap(),
        fs::read(b.join("trace.csv")).unwrap()
    );
    assert_eq!(
        read_json(&a.join("manifest.json"))["config_sha256"],
        read_json(&b.join("manifest.json"))["config_sha256"]
    );

    let report = read_json(&a.join("report.json"));
    assert_eq!(report["sign_violations"], 0);
    assert_eq!(report["support_change_cells"], 0);
    assert_eq!(report["lower_curve_violations"], 0);
    assert!(report["predicted_t_upper"].as_f64().unwrap() > 0.0);
}

#[test]
fn simulate_snapshots_reload_with_consistent_metadata() {
    let dir = scratch("sim-snap");
    let out = tiny_sets(bin().arg("simulate"))
        .args(["--set", "max_steps=12", "--set", "snapshot_interval=6"])
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let (field, meta) = load_snapshot(&dir.join("snapshots/step_00000006.bin")).unwrap();
    let meta = meta.expect("sidecar metadata");
    assert_eq!(meta.step, 6);
    assert_eq!(meta.mode, "simulate");
    assert_eq!(field.grid.n_r, 32);
    assert!((field.sup_norm() - meta.sup_norm).abs() <= 1e-15 * meta.sup_norm);
}

#[test]
fn oracle_reports_an_honest_failure_at_a_hopeless_lattice() {
    // 32³ cannot resolve the datum: the pullback check must fail, the exit
    // code must say so, and the report must still be written in full.
    let dir = scratch("oracle-coarse");
    let out = bin()
        .args([
            "oracle",
            "--set",
            "box_n=32",
            "--set",
            "n_r=64",
            "--set",
            "n_z=64",
            "--set",
            "rule_order=16",
        ])
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let report = read_json(&dir.join("oracle.json"));
    assert_eq!(report["pass"], false);
    let checks = report["checks"].as_array().unwrap();
    let pullback = checks
        .iter()
        .find(|c| c["name"] == "meridian_stretching_pullback")
        .unwrap();
    assert_eq!(pullback["pass"], false);
    // The exact identities hold regardless of the lattice.
    for name in [
        "helmholtz_idempotence",
        "vorticity_gradient_isometry",
        "biot_savart_curl_roundtrip",
    ] {
        let check = checks.iter().find(|c| c["name"] == name).unwrap();
        assert_eq!(check["pass"], true, "{name} should not depend on box_n");
    }
    let manifest = read_json(&dir.join("manifest.json"));
    assert_eq!(manifest["exit_status"], "check-failure");
    let error = read_json(&dir.join("error.json"));
    assert_eq!(error["kind"], "property-check");
}

#[test]
fn verify_mode_passes_on_the_default_family() {
    let dir = scratch("verify-ok");
    let out = tiny_sets(bin().arg("verify"))
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let report = read_json(&dir.join("verify.json"));
    assert!(report["rel_fd_vs_rhs"].as_f64().unwrap() <= 0.01);
    assert!(report["riccati_margin"].as_f64().unwrap() >= 1.0);
}
