use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use openbath::config::parse;
use openbath::scenarios::coeffs::CoeffsConfig;
use proptest::prelude::*;
use serde_json::Value;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn openbath(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_openbath")).args(args).output().expect("binary runs")
}

fn run_in(scenario: &str, cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![scenario, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    openbath(&args)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn unknown_key_is_a_config_error_with_its_path() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "bad.json",
        r#"{"mode": {"m": 1, "omega": 1, "lambda": 0.1, "mu": 0, "d_qq": 0.1, "d_pp": 0.1, "d_pq": 0, "dqq": 1},
            "initial": {"kind": "fock", "n": 0}, "times": {"t_end": 1, "n": 2}}"#,
    );
    let o = run_in("simulate", &cfg, &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("mode.dqq"), "{}", stderr(&o));
}

#[test]
fn invalid_physics_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "bad.json",
        r#"{"mode": {"m": 1, "omega": 1, "lambda": 0.1, "mu": 0, "d_qq": 0.01, "d_pp": 0.01, "d_pq": 0},
            "initial": {"kind": "fock", "n": 0}, "times": {"t_end": 1, "n": 2}}"#,
    );
    let o = run_in("simulate", &cfg, &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn malformed_json_and_zero_threads_are_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "bad.json", "{\"m\": 1.0,");
    assert_eq!(run_in("coeffs", &cfg, &tmp.path().join("out"), &[]).status.code(), Some(2));
    let o = run_in("coeffs", &config("coeffs.json"), &tmp.path().join("out"), &["--threads", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_config_and_unwritable_output_are_io_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_in("coeffs", &tmp.path().join("absent.json"), &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(4));
    let blocker = write(tmp.path(), "file", "");
    let o = run_in("coeffs", &config("coeffs.json"), &blocker.join("out"), &[]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn broken_invariant_exits_three_after_writing_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "tight.json", r#"{"threshold": 1e-18, "lambda_over_omega": [0.1], "mu_over_lambda": [0]}"#);
    let out = tmp.path().join("out");
    let o = run_in("coeffs", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let s = summary(&out);
    assert!(!s["violations"].as_array().unwrap().is_empty());
    assert!(out.join("coeffs.csv").exists());
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let classical = write(
        tmp.path(),
        "classical.json",
        &fs::read_to_string(config("classical.json")).unwrap().replace("\"n_traj\": 2000", "\"n_traj\": 64"),
    );
    for (scenario, cfg) in [("coeffs", config("coeffs.json")), ("simulate", config("simulate.json")), ("classical", classical)] {
        let a = tmp.path().join(format!("{scenario}-a"));
        let b = tmp.path().join(format!("{scenario}-b"));
        assert!(run_in(scenario, &cfg, &a, &["--threads", "1"]).status.success());
        assert!(run_in(scenario, &cfg, &b, &["--threads", "3"]).status.success());
        assert_eq!(files(&a), files(&b), "{scenario}");
    }
}

#[test]
fn summary_echo_reruns_to_the_same_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    assert!(run_in("coeffs", &config("coeffs.json"), &first, &[]).status.success());
    let s = summary(&first);
    assert_eq!(s["scenario"], "coeffs");
    assert_eq!(s["versions"]["openbath"], env!("CARGO_PKG_VERSION"));
    let echo = write(tmp.path(), "echo.json", &serde_json::to_string(&s["config"]).unwrap());
    let second = tmp.path().join("second");
    assert!(run_in("coeffs", &echo, &second, &[]).status.success());
    assert_eq!(files(&first), files(&second));
}

#[test]
fn seed_override_is_recorded_and_changes_the_draws() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "classical.json",
        &fs::read_to_string(config("classical.json")).unwrap().replace("\"n_traj\": 2000", "\"n_traj\": 32"),
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run_in("classical", &cfg, &a, &[]).status.success());
    assert!(run_in("classical", &cfg, &b, &["--seed", "99"]).status.success());
    assert_eq!(summary(&a)["seed"], 7);
    assert_eq!(summary(&b)["seed"], 99);
    assert_eq!(summary(&b)["config"]["run"]["seed"], 99);
    assert_ne!(fs::read(a.join("markov_moments.csv")).unwrap(), fs::read(b.join("markov_moments.csv")).unwrap());
}

#[test]
fn csv_outputs_have_rectangular_numeric_bodies() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    assert!(run_in("simulate", &config("simulate.json"), &out, &[]).status.success());
    let mut r = csv::Reader::from_path(out.join("moments.csv")).unwrap();
    let width = r.headers().unwrap().len();
    let mut rows = 0;
    for rec in r.records() {
        let rec = rec.unwrap();
        assert_eq!(rec.len(), width);
        assert!(rec.iter().all(|f| f.parse::<f64>().is_ok()));
        rows += 1;
    }
    assert_eq!(rows, 51);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn any_unknown_key_is_named(key in "[a-z][a-z_]{0,12}") {
        prop_assume!(!["m", "omega", "temperature", "lambda_over_omega", "mu_over_lambda", "delta_over_omega",
            "diffusion", "quadrature_rel_tol", "threshold", "constants", "hbar", "k_b"].contains(&key.as_str()));
        let text = format!(r#"{{"m": 1.0, "constants": {{"hbar": 1.0, "{key}": 2}}}}"#);
        let err = parse::<CoeffsConfig>(&text).unwrap_err();
        prop_assert_eq!(err.exit_code(), 2);
        let msg = err.to_string();
        prop_assert!(msg.contains(&format!("constants.{key}")), "{}", msg);
    }
}
