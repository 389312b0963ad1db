//! End-to-end CLI checks: exit codes, file contracts, and criterion 14
//! (byte-identical outputs for identical configuration).

use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_simpleq"))
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap_or_else(|e| panic!("missing {name}: {e}"))
}

#[test]
fn criterion_14_determinism() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [dir_a.path(), dir_b.path()] {
        let status = bin()
            .args([
                "curve",
                "--potential",
                "exp:1.0",
                "--e-min",
                "1e-2",
                "--e-max",
                "1e1",
                "--points",
                "7",
                "--svg",
                "--out",
            ])
            .arg(dir)
            .status()
            .unwrap();
        assert!(status.success());
        let status = bin()
            .args(["solve", "--potential", "exp:1.0", "--e", "0.5", "--out"])
            .arg(dir)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let mut ok = true;
    for name in [
        "curve.csv",
        "curve_meta.json",
        "curve.svg",
        "solution.json",
        "u.csv",
        "s_of_k.csv",
    ] {
        let same = read(dir_a.path(), name) == read(dir_b.path(), name);
        ok &= same;
        assert!(same, "{name} differs between identical runs");
    }
    println!("criterion 14: {} - repeated runs produce byte-identical CSV/JSON/SVG",
             if ok { "PASS" } else { "FAIL" });
}

#[test]
fn solve_writes_contracted_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["solve", "--potential", "exp:1.0", "--e", "1.0", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    for name in ["solution.json", "u.csv", "s_of_k.csv"] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }
    let text = fs::read_to_string(dir.path().join("u.csv")).unwrap();
    assert!(text.starts_with("r,value\n"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("solution.json")).unwrap())
            .unwrap();
    for key in [
        "e",
        "rho",
        "a_final",
        "b_final",
        "iterations",
        "residual_fixed_point",
        "constraint_residual",
        "grid",
    ] {
        assert!(json.get(key).is_some(), "solution.json missing {key}");
    }
    assert!(json["grid"].get("n").is_some());
    assert!(json["grid"].get("dr").is_some());
    assert!(json["grid"].get("rmax").is_some());
}

#[test]
fn curve_emits_requested_row_count_with_increasing_energy() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "curve",
            "--potential",
            "exp:1.0",
            "--e-min",
            "1e-1",
            "--e-max",
            "1e1",
            "--points",
            "9",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("e,rho,rho_lo,rho_hi,e_over_4pi_rho"));
    let rows: Vec<f64> = lines
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(rows.len(), 9);
    assert!(rows.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn invalid_inputs_exit_with_code_2() {
    // unknown potential family
    let out = bin()
        .args(["solve", "--potential", "bogus:1", "--e", "1.0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("potential"), "error should name the field: {msg}");

    // malformed reference file
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("curve.csv"), "e,rho,rho_lo,rho_hi,e_over_4pi_rho\n1,2,2,2,3\n2,4,4,4,5\n").unwrap();
    fs::write(dir.path().join("ref.csv"), "rho,e\nnot,numbers\n").unwrap();
    let out = bin()
        .args(["compare", "--curve"])
        .arg(dir.path().join("curve.csv"))
        .arg("--reference")
        .arg(dir.path().join("ref.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compare_round_trips_a_written_curve() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "curve",
            "--potential",
            "exp:1.0",
            "--e-min",
            "1e-1",
            "--e-max",
            "1e1",
            "--points",
            "7",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    // build a reference from the curve itself: deviation must be ~0
    let text = fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    let mut reference = String::from("rho,e\n");
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        reference.push_str(&format!("{},{}\n", cols[1], cols[0]));
    }
    fs::write(dir.path().join("ref.csv"), reference).unwrap();
    let out = bin()
        .args(["compare", "--curve"])
        .arg(dir.path().join("curve.csv"))
        .arg("--reference")
        .arg(dir.path().join("ref.csv"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    let dev: f64 = stdout
        .split("deviation over")
        .nth(1)
        .unwrap()
        .split(':')
        .nth(1)
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(dev < 1e-12, "self-comparison deviation {dev}");
}

#[test]
fn scattering_command_reports_consistent_length() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["scattering", "--potential", "exp:1.0", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("scattering.json")).unwrap())
            .unwrap();
    let a = json["a"].as_f64().unwrap();
    assert!((a - 1.25).abs() / 1.25 < 0.02);
    assert!(json["relative_gap"].as_f64().unwrap() < 0.01);
}

#[test]
fn threads_env_serial_path_matches_parallel() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let args = |dir: &Path| {
        vec![
            "curve".to_string(),
            "--potential".into(),
            "exp:1.0".into(),
            "--e-min".into(),
            "1e-1".into(),
            "--e-max".into(),
            "1e1".into(),
            "--points".into(),
            "5".into(),
            "--out".into(),
            dir.display().to_string(),
        ]
    };
    let status = bin()
        .args(args(dir_a.path()))
        .env("SIMPLEQ_THREADS", "0")
        .status()
        .unwrap();
    assert!(status.success());
    let status = bin()
        .args(args(dir_b.path()))
        .env("SIMPLEQ_THREADS", "2")
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(
        read(dir_a.path(), "curve.csv"),
        read(dir_b.path(), "curve.csv"),
        "serial and parallel tracing must agree bit-for-bit"
    );
}
