use std::path::Path;
use std::process::{Command, Output};

fn ropuf(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ropuf")).current_dir(dir).args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = ropuf(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn gen_row_count_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gen", "--rows", "16", "--cols", "16", "--devices", "100", "--measurements", "5", "--seed", "7"];
    ok(dir.path(), &[&args[..], &["--out", "a.csv"]].concat());
    ok(dir.path(), &[&args[..], &["--out", "b.csv"]].concat());
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
    let lines = a.iter().filter(|&&c| c == b'\n').count();
    assert_eq!(lines, 1 + 100 * 5 * 256);
}

#[test]
fn invalid_correlation_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = ropuf(dir.path(), &["gen", "--rho", "1.5", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rho"));
}

#[test]
fn stochastic_commands_need_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(ropuf(dir.path(), &["gen"]).status.code(), Some(2));
}

fn pipeline(dir: &Path) {
    ok(dir, &["gen", "--devices", "60", "--measurements", "2", "--seed", "11", "--out", "d.csv"]);
    ok(dir, &["stats", "--input", "d.csv", "--transform", "dwht", "--out", "s.json"]);
    ok(dir, &["allocate", "--stats", "s.json", "--c-max", "19", "--force-k", "1", "--out", "a.json"]);
}

#[test]
fn forced_single_bit_allocation_gives_255_bits() {
    let dir = tempfile::tempdir().unwrap();
    pipeline(dir.path());
    let alloc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
    assert_eq!(alloc["N"], 255);
    let bits = ok(dir.path(), &["extract", "--input", "d.csv", "--stats", "s.json", "--alloc", "a.json"]);
    let mut rows = bits.lines();
    assert_eq!(rows.next(), Some("device,measurement,bits"));
    let rows: Vec<&str> = rows.collect();
    assert_eq!(rows.len(), 120);
    assert!(rows.iter().all(|r| r.rsplit(',').next().unwrap().len() == 255));
}

#[test]
fn enroll_reconstruct_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    pipeline(dir.path());
    let common =
        ["--input", "d.csv", "--stats", "s.json", "--alloc", "a.json", "--code", "bch255_131", "--device", "4"];
    let key = "0123456789abcdeffedcba9876543210";
    let printed = ok(dir.path(), &[&["enroll"][..], &common, &["--key", key, "--out", "h.bin"]].concat());
    assert_eq!(printed.trim(), key);
    let recovered =
        ok(dir.path(), &[&["reconstruct"][..], &common, &["--helper", "h.bin", "--measurement", "1"]].concat());
    assert_eq!(recovered.trim(), key);
    // A different device is far beyond the decoding radius.
    let wrong = ropuf(
        dir.path(),
        &[
            "reconstruct",
            "--input",
            "d.csv",
            "--stats",
            "s.json",
            "--alloc",
            "a.json",
            "--device",
            "5",
            "--helper",
            "h.bin",
        ],
    );
    if wrong.status.success() {
        assert_ne!(String::from_utf8_lossy(&wrong.stdout).trim(), key);
    } else {
        assert_eq!(wrong.status.code(), Some(3));
    }
}

#[test]
fn helper_bound_to_allocation() {
    let dir = tempfile::tempdir().unwrap();
    pipeline(dir.path());
    ok(dir.path(), &["allocate", "--stats", "s.json", "--c-max", "20", "--force-k", "1", "--out", "b.json"]);
    let base = ["--input", "d.csv", "--stats", "s.json"];
    ok(dir.path(), &[&["enroll"][..], &base, &["--alloc", "a.json", "--seed", "3", "--out", "h.bin"]].concat());
    let out = ropuf(dir.path(), &[&["reconstruct"][..], &base, &["--alloc", "b.json", "--helper", "h.bin"]].concat());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn rates_report_starts_at_fuzzy_commitment_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let csv = ok(dir.path(), &["analyze", "rates", "--p", "0.0097"]);
    let row = csv.lines().find(|l| l.starts_with("chosen_secret,0.0,")).unwrap();
    let f: Vec<f64> = row.split(',').skip(2).map(|v| v.parse().unwrap()).collect();
    assert!((f[0] - 0.922).abs() <= 1e-3 && (f[1] - 0.079).abs() <= 1e-3, "{row}");
    assert!(csv.contains("code:bch255_131,,0.5137"));
}

#[test]
fn block_error_reports() {
    let dir = tempfile::tempdir().unwrap();
    let csv = ok(dir.path(), &["analyze", "pb", "--code", "rep3+ebch256_132", "--p", "0.06"]);
    let p: f64 = csv.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!((p / 3.48e-10 - 1.0).abs() < 0.05);
    pipeline(dir.path());
    let csv = ok(dir.path(), &["analyze", "pb", "--code", "bch255_131", "--profile", "s.json", "--alloc", "a.json"]);
    let vals: Vec<f64> = csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(vals.len(), 2);
    assert!((vals[0] - vals[1]).abs() <= 1e-9 * vals[1]);
}

#[test]
fn hardware_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let csv = ok(dir.path(), &["hw", "timing", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&csv).unwrap();
    assert!((v[0]["t_min_s"].as_f64().unwrap() - 131.07e-6).abs() < 1e-9);
    assert_eq!(v[0]["window_ok"], true);
    let schedule = ok(dir.path(), &["hw", "dwht"]);
    assert_eq!(schedule.lines().count(), 1 + 4 * 64);
    pipeline(dir.path());
    let out = ropuf(dir.path(), &["hw", "rom", "--stats", "s.json", "--alloc", "a.json", "--out", "rom.bin"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("638 bytes"));
}

#[test]
fn outputs_are_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let a = ok(dir.path(), &["analyze", "rm-mc", "--p", "0.1", "--trials", "200000", "--seed", "5"]);
    let b = ok(dir.path(), &["analyze", "rm-mc", "--p", "0.1", "--trials", "200000", "--seed", "5"]);
    assert_eq!(a, b);
    let s1 = ok(dir.path(), &["analyze", "eta"]);
    assert!(s1.lines().any(|l| l.starts_with("klt,0.99999")));
}
