//! End-to-end checks of the command-line interface: exit codes, error
//! reporting, and byte-identical output for identical configuration.

use std::path::Path;
use std::process::Command;

use tempfile::tempdir;

fn veemap() -> Command {
    Command::new(env!("CARGO_BIN_EXE_veemap"))
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()))
}

#[test]
fn design_writes_loadable_plan() {
    let dir = tempdir().unwrap();
    let plan_path = dir.path().join("plan.toml");
    let out = veemap()
        .args(["design", "--k", "25", "--theta", "1", "--omega1", "1000"])
        .args(["--kappa", "7e-4", "--out"])
        .arg(&plan_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("delta"));
    assert!(text.contains("9.8905"));

    let traj = dir.path().join("traj.csv");
    let out = veemap()
        .args(["simulate", "--alpha", "0.6+0.8i", "--beta", "0", "--plan"])
        .arg(&plan_path)
        .arg("--out")
        .arg(&traj)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(read(&traj)).unwrap();
    assert!(text.starts_with("time,pop_00,pop_10,pop_20,pop_01,pop_11,pop_21,norm\n"));
}

#[test]
fn simulate_zero_window_emits_initial_row() {
    let dir = tempdir().unwrap();
    let plan_path = dir.path().join("plan.toml");
    std::fs::write(&plan_path, "k = 1\ntheta = 1\nomega1 = 100.0\n").unwrap();
    let out_path = dir.path().join("t0.csv");
    let out = veemap()
        .args(["simulate", "--tmax", "0", "--alpha", "1", "--beta", "1", "--plan"])
        .arg(&plan_path)
        .arg("--out")
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(read(&out_path)).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2); // header + one row
    assert!(lines[1].starts_with("0.000000000000e0,5.000000000000e-1,5.000000000000e-1"));
}

#[test]
fn config_errors_name_the_offending_key() {
    let dir = tempdir().unwrap();
    let plan_path = dir.path().join("bad.toml");
    std::fs::write(&plan_path, "k = 1\ntheta = 2\nomega1 = 100.0\n").unwrap();
    let out = veemap()
        .args(["simulate", "--plan"])
        .arg(&plan_path)
        .args(["--out", "/dev/null"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("theta must be odd"), "stderr: {err}");

    std::fs::write(&plan_path, "k = 1\ntheta = 1\nomega1 = 100.0\n[params]\nkappa = -0.1\n").unwrap();
    let out = veemap()
        .args(["simulate", "--plan"])
        .arg(&plan_path)
        .args(["--out", "/dev/null"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("kappa must be >= 0"), "stderr: {err}");
}

#[test]
fn diophantine_scan_reports_zero_solutions() {
    let out = veemap()
        .args(["scan-diophantine", "--kmax", "2000", "--thetamax", "199", "--lmax", "4000"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("0 solutions"), "stdout: {text}");
}

#[test]
fn identical_configuration_gives_byte_identical_output() {
    let dir = tempdir().unwrap();
    let plan_path = dir.path().join("plan.toml");
    std::fs::write(
        &plan_path,
        "k = 1\ntheta = 1\nomega1 = 100.0\n[params]\nkappa = 2.6e-3\n",
    )
    .unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out_path in [&a, &b] {
        let out = veemap()
            .args(["simulate", "--alpha", "0.6", "--beta", "0.8i", "--points", "101", "--plan"])
            .arg(&plan_path)
            .arg("--out")
            .arg(out_path)
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    assert_eq!(read(&a), read(&b));

    // scan output is deterministic as well, including under the worker pool
    let (a, b) = (dir.path().join("scan_a.csv"), dir.path().join("scan_b.csv"));
    for out_path in [&a, &b] {
        let out = veemap()
            .args(["scan-approx", "--tmax", "60", "--fmin", "0.999", "--out"])
            .arg(out_path)
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    assert_eq!(read(&a), read(&b));
}

#[test]
fn optimize_reports_tuned_plan() {
    let dir = tempdir().unwrap();
    let plan_path = dir.path().join("plan.toml");
    std::fs::write(
        &plan_path,
        "k = 25\ntheta = 1\nomega1 = 1000.0\n[params]\nkappa = 7e-4\n",
    )
    .unwrap();
    let tuned_path = dir.path().join("tuned.toml");
    let out = veemap()
        .args(["optimize", "--budget", "200", "--seed", "5", "--plan"])
        .arg(&plan_path)
        .arg("--out")
        .arg(&tuned_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("tuned f_min"));
    assert!(tuned_path.exists());
}

#[test]
fn reproduce_exits_zero_on_pass() {
    let dir = tempdir().unwrap();
    let out = veemap()
        .args(["reproduce", "--case", "tab-sec8", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[PASS] tab-sec8"));
    assert!(!text.contains("[FAIL]"));
    assert!(dir.path().join("tab_sec8.csv").exists());
}

#[test]
fn unknown_case_is_rejected() {
    let out = veemap()
        .args(["reproduce", "--case", "fig99"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("unknown case"));
}
