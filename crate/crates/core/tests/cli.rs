use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

mod common;

fn flagcurv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flagcurv")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn report(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn sphere_is_cfc_with_unit_curvature() {
    let o = flagcurv(&["cfc-check", "--metric", "sphere_stereographic", "--n", "3", "--samples", "30"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(&o);
    assert_eq!(r["schema"], 1);
    assert_eq!(r["status"], "CFC");
    assert!((r["result"]["kappa_mean"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn warped_metric_exits_one() {
    let o = flagcurv(&["cfc-check", "--metric", "riemannian:1,0,0;0,1,0;0,0,1+x1^2", "--samples", "20"]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert_eq!(report(&o)["status"], "NOT_CFC");
}

#[test]
fn malformed_expression_exits_two_with_position() {
    let o = flagcurv(&["analyze", "--expr", "sqrt(y1^2 + * y2^2)", "--n", "2"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("position 12"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn tight_tolerance_is_inconclusive() {
    let o = flagcurv(&["cfc-check", "--metric", "funk", "--n", "3", "--samples", "20", "--tol", "1e-15"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert_eq!(report(&o)["status"], "INCONCLUSIVE");
}

#[test]
fn degenerate_metric_exits_two() {
    let o = flagcurv(&["analyze", "--metric", "riemannian:1,0;0,-1", "--samples", "5"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_two_and_help_exits_zero() {
    assert_eq!(code(&flagcurv(&["cfc-check"])), 2);
    assert_eq!(code(&flagcurv(&["frobnicate", "--metric", "funk", "--n", "3"])), 2);
    assert_eq!(code(&flagcurv(&["cfc-check", "--metric", "funk", "--n", "3", "--samples", "0"])), 2);
    assert_eq!(code(&flagcurv(&["cfc-check", "--bogus"])), 2);
    let help = flagcurv(&["--help"]);
    assert_eq!(code(&help), 0);
    assert!(String::from_utf8_lossy(&help.stdout).contains("--metric"));
}

#[test]
fn beltrami_half_funk_passes_and_non_hamel_fails() {
    let o = flagcurv(&[
        "beltrami",
        "--metric",
        "euclidean",
        "--n",
        "3",
        "--factor",
        "half-funk-norm",
        "--target",
        "funk",
        "--samples",
        "20",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(&o);
    assert!((r["result"]["transformed_cfc"]["kappa_mean"].as_f64().unwrap() + 0.25).abs() < 1e-5);

    let o = flagcurv(&[
        "beltrami",
        "--metric",
        "euclidean",
        "--n",
        "3",
        "--factor",
        "x1*sqrt(y1^2+y2^2+y3^2)",
        "--samples",
        "10",
    ]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
}

#[test]
fn config_files_in_toml_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let toml =
        write(dir.path(), "run.toml", "task = \"cfc-check\"\nsamples = 10\n[metric]\nfamily = \"klein\"\nn = 3\n");
    let o = flagcurv(&["--config", &toml]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(&o);
    assert_eq!(r["config"]["samples"], 10);
    assert!((r["result"]["kappa_mean"].as_f64().unwrap() + 1.0).abs() < 1e-6);

    let json = write(dir.path(), "run.json", r#"{"task": "cfc-check", "metric": {"family": "euclidean", "n": 3}}"#);
    let o = flagcurv(&["--config", &json, "--samples", "5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(report(&o)["config"]["samples"], 5);

    let bad = write(dir.path(), "bad.toml", "task = \"beltrami\"\n[metric]\nfamily = \"funk\"\nn = 3\n");
    let o = flagcurv(&["--config", &bad]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("projective_factor"), "{}", stderr(&o));
}

#[test]
fn custom_euclidean_norm_matches_builtin() {
    let run = |metric: &[&str]| {
        let mut args = vec!["analyze", "--n", "3", "--samples", "5", "--seed", "3"];
        args.extend_from_slice(metric);
        let o = flagcurv(&args);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        report(&o)["result"]["points"].clone()
    };
    let a = run(&["--metric", "euclidean"]);
    let b = run(&["--expr", "sqrt(y1^2+y2^2+y3^2)"]);
    assert_eq!(a.as_array().unwrap().len(), 5);
    common::json_close(&a, &b, 1e-12, "$").unwrap();
}

#[test]
fn report_is_identical_across_worker_counts() {
    let run = |workers: &str| {
        let o = flagcurv(&[
            "cfc-check",
            "--metric",
            "funk",
            "--n",
            "3",
            "--samples",
            "40",
            "--seed",
            "7",
            "--workers",
            workers,
        ]);
        assert_eq!(code(&o), 0);
        let mut r = report(&o);
        assert!(r["elapsed_ms"].is_number());
        r.as_object_mut().unwrap().remove("elapsed_ms");
        serde_json::to_string_pretty(&r).unwrap()
    };
    assert_eq!(run("1"), run("8"));
}

#[test]
fn out_and_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let csv = dir.path().join("kappa.csv");
    let o = flagcurv(&[
        "flag-curvature",
        "--metric",
        "klein",
        "--n",
        "3",
        "--samples",
        "4",
        "--flags",
        "3",
        "--out",
        out.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["config"]["task"], "flag-curvature");
    let table = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 1 + 4 * 3, "{table}");
    assert!(lines[1..].iter().all(|l| l.contains("-1") || l.contains("-0.99999")), "{table}");
}
