//! End-to-end checks of the `swipt` binary: exit codes, error wording,
//! output schemas, and manifest-driven reruns.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn swipt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swipt"))
        .args(args)
        .output()
        .expect("binary spawns")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(swipt(&["--help"]).status.code(), Some(0));
    assert_eq!(swipt(&["--version"]).status.code(), Some(0));
    assert_eq!(swipt(&["solve", "--help"]).status.code(), Some(0));
}

#[test]
fn unknown_key_exits_one_and_names_it() {
    let out = swipt(&["solve", "--set", "warp_factor=9"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_of(&out);
    assert!(err.contains("config error"), "stderr: {err}");
    assert!(err.contains("warp_factor"), "stderr: {err}");
}

#[test]
fn invalid_value_exits_one_and_names_the_key() {
    let out = swipt(&["solve", "--set", "starts=0"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_of(&out);
    assert!(err.contains("config error"), "stderr: {err}");
    assert!(err.contains("starts"), "stderr: {err}");

    let out = swipt(&["solve", "--set", "efficiency=1.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("efficiency"));
}

#[test]
fn unattainable_target_exits_two_naming_the_variant() {
    let tmp = TempDir::new().unwrap();
    let out = swipt(&[
        "solve",
        "--set",
        "target_energy_uw=1e12",
        "--set",
        "starts=2",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(err.contains("solver error"), "stderr: {err}");
    assert!(err.contains("TargetUnattainable"), "stderr: {err}");
}

#[test]
fn region_sweep_without_a_target_exits_zero() {
    let tmp = TempDir::new().unwrap();
    let out = swipt(&[
        "region-mse",
        "--set",
        "grid_size=4",
        "--set",
        "starts=2",
        "--set",
        "max_iters=80",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    let csv = fs::read_to_string(tmp.path().join("region_mse.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "target_energy_uW,achieved_energy_uW,metric"
    );
    // 4 grid points plus the exact max-energy corner.
    assert_eq!(lines.count(), 5);
}

#[test]
fn ber_csv_has_the_documented_schema() {
    let tmp = TempDir::new().unwrap();
    let out = swipt(&[
        "ber",
        "--set",
        "ber_channels=2",
        "--set",
        "ber_symbols=20",
        "--set",
        "ber_snrs_db=20",
        "--set",
        "ber_starts=1",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    let csv = fs::read_to_string(tmp.path().join("ber.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "snr_dB,scheme,bit_errors,bits_total,ber");
    let body: Vec<&str> = lines.collect();
    assert_eq!(body.len(), 3);
    for (row, scheme) in body
        .iter()
        .zip(["wmmse-identity", "rate-oracle", "energy-beamformer"])
    {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 5);
        assert_eq!(cols[0], "20");
        assert_eq!(cols[1], scheme);
        let errors: u64 = cols[2].parse().unwrap();
        let total: u64 = cols[3].parse().unwrap();
        let ber: f64 = cols[4].parse().unwrap();
        assert_eq!(total, 2 * 2 * 4 * 20);
        assert!((ber - errors as f64 / total as f64).abs() < 1e-15);
    }
}

fn run_solve_into(dir: &Path, extra: &[&str]) {
    let mut args = vec!["solve"];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["--out", dir.to_str().unwrap()]);
    let out = swipt(&args);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
}

#[test]
fn manifest_rerun_is_byte_identical() {
    let first = TempDir::new().unwrap();
    run_solve_into(
        first.path(),
        &["--set", "starts=3", "--set", "max_iters=80"],
    );

    let second = TempDir::new().unwrap();
    let manifest = first.path().join("manifest.txt");
    let out = swipt(&[
        "solve",
        "--config",
        manifest.to_str().unwrap(),
        "--out",
        second.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    for name in ["manifest.txt", "solve.csv"] {
        let a = fs::read(first.path().join(name)).unwrap();
        let b = fs::read(second.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between run and rerun");
    }
}

#[test]
fn binary_output_matches_the_library() {
    let via_bin = TempDir::new().unwrap();
    run_solve_into(
        via_bin.path(),
        &["--set", "starts=2", "--set", "channel_seed=7"],
    );

    let via_lib = TempDir::new().unwrap();
    let mut cfg = swipt_cli::config::RunConfig::default();
    cfg.experiment = swipt_cli::config::Experiment::Solve;
    cfg.apply("starts", "2").unwrap();
    cfg.apply("channel_seed", "7").unwrap();
    cfg.validate().unwrap();
    swipt_cli::runner::execute(&cfg, via_lib.path()).unwrap();

    for name in ["manifest.txt", "solve.csv"] {
        let a = fs::read(via_bin.path().join(name)).unwrap();
        let b = fs::read(via_lib.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between binary and library");
    }
}
