use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hdickman(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdickman")).args(args).output().expect("binary runs")
}

fn write(path: &Path, text: &str) -> String {
    std::fs::write(path, text).unwrap();
    path.display().to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn list_names_every_experiment() {
    let out = hdickman(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "mertens",
        "rho",
        "pa-n",
        "representation",
        "poissonization",
        "limit-theorem",
        "proposition",
        "bias",
        "erdos-kac",
    ] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing from:\n{text}");
    }
}

#[test]
fn exit_code_follows_pass_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("pa.json");
    let out = out_path.display().to_string();

    let ok = write(&dir.path().join("ok.json"), r#"{"experiment": "pa-n", "n": 21, "tolerances": {"exact_pa_min": 0.5}}"#);
    assert_eq!(hdickman(&["run", "--config", &ok, "--out", &out]).status.code(), Some(0));
    let report = read_json(&out_path);
    assert!((report["metrics"]["exact_pa"].as_f64().unwrap() - 0.623_443_9).abs() < 1e-6);
    assert_eq!(report["pass"]["exact_pa_min"], Value::Bool(true));
    assert_eq!(report["all_pass"], Value::Bool(true));
    assert_eq!(report["config"]["n"], 21);

    let strict = write(&dir.path().join("strict.json"), r#"{"experiment": "pa-n", "n": 21, "tolerances": {"exact_pa_min": 0.7}}"#);
    assert_eq!(hdickman(&["run", "--config", &strict, "--out", &out]).status.code(), Some(1));
    assert_eq!(read_json(&out_path)["pass"]["exact_pa_min"], Value::Bool(false));
}

#[test]
fn usage_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(&dir.path().join("bad.json"), r#"{"experiment": "bias", "samples": 0}"#);
    let out = hdickman(&["run", "--config", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`samples`"));

    let unknown = write(&dir.path().join("u.json"), r#"{"experiment": "bias", "tolerances": {"nonsense": 1}}"#);
    let out = hdickman(&["run", "--config", &unknown, "--samples", "10"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tolerances.nonsense"));
}

#[test]
fn flags_override_file_and_csv_side_files_appear() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(&dir.path().join("ek.json"), r#"{"experiment": "erdos-kac", "n": 100000, "samples": 5000, "seed": 1}"#);
    let out_path = dir.path().join("ek.json.out");
    let out = out_path.display().to_string();
    hdickman(&["run", "--config", &cfg, "--seed", "2", "--samples", "3000", "--out", &out]);
    let report = read_json(&out_path);
    assert_eq!(report["config"]["seed"], 2);
    assert_eq!(report["config"]["samples"], 3000);
    assert_eq!(report["config"]["n"], 100000);
    let csv = std::fs::read_to_string(dir.path().join("ek.json.out.ecdf.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x,ecdf"));
    let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(last[1], 1.0);
}

#[test]
fn experiment_flag_runs_without_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("rep.json");
    let out = hdickman(&["run", "--experiment", "representation", "--n", "12", "--out", &out_path.display().to_string()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(read_json(&out_path)["experiment"], "representation");
}

#[test]
fn prime_cache_flag_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("primes.bin");
    let out = hdickman(&[
        "run",
        "--experiment",
        "pa-n",
        "--n",
        "1000",
        "--prime-cache",
        &cache.display().to_string(),
        "--out",
        &dir.path().join("r.json").display().to_string(),
    ]);
    assert!(out.status.code().is_some());
    let bytes = std::fs::read(&cache).unwrap();
    assert_eq!(&bytes[..5], b"PTBL1");
    assert_eq!(u64::from_le_bytes(bytes[5..13].try_into().unwrap()), 1000);
    assert_eq!(u64::from_le_bytes(bytes[13..21].try_into().unwrap()), 168);
}
