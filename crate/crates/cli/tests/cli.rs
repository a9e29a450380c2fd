use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn fixture(name: &str) -> String {
    configs().join(format!("{name}.json")).to_str().unwrap().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_landsberg")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn all_numbers(v: &Value) -> Vec<f64> {
    match v {
        Value::Number(n) => vec![n.as_f64().unwrap()],
        Value::Array(a) => a.iter().flat_map(all_numbers).collect(),
        _ => Vec::new(),
    }
}

#[test]
fn flat_product_has_no_curvature() {
    let out = run(&["eval", "--config", &fixture("euclidean_flat"), "--point", "x=0,0,0,0;y=1,0,1,0"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["command"], "eval");
    assert_eq!(r["tool"]["name"], "landsberg");
    for key in ["cartan", "mean_cartan", "berwald", "landsberg", "mean_landsberg", "spray"] {
        assert!(all_numbers(&r["eval"][key]).iter().all(|&v| v == 0.0), "{key}");
    }
}

#[test]
fn product_metric_dump_is_block_diagonal() {
    let out = run(&["eval", "--config", &fixture("euclidean_randers")]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let g = &r["eval"]["g"];
    for a in 0..4 {
        for b in 0..4 {
            if (a < 2) != (b < 2) {
                assert_eq!(g[a][b].as_f64().unwrap(), 0.0);
            }
        }
    }
    assert!(all_numbers(&r["eval"]["cartan"]).iter().any(|v| v.abs() > 1e-3));
}

#[test]
fn numbers_carry_seventeen_significant_digits() {
    let out = run(&["eval", "--config", &fixture("euclidean_randers")]);
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().find(|l| l.contains("\"f_squared\"")).unwrap();
    let mantissa = line.split(':').nth(1).unwrap().trim().trim_end_matches(',');
    let digits = mantissa.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).count();
    assert_eq!(digits, 17, "{mantissa}");
}

#[test]
fn csv_eval_names_indices() {
    let out = run(&["eval", "--config", &fixture("euclidean_flat"), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[..3], ["x_1", "x_2", "x_3"]);
    assert!(header.contains(&"L_112"));
    assert!(header.contains(&"B_1234"));
    assert_eq!(lines.next().unwrap().split(',').count(), header.len());
}

#[test]
fn confirmed_run_exits_zero_and_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let out = run(&[
        "verify",
        "--config",
        &fixture("euclidean_flat"),
        "--out",
        out_path.to_str().unwrap(),
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(r["config"]["seed"], 3);
    assert_eq!(r["verify"]["refuted"], false);
    assert!(r["config"]["output"].get("path").is_none());
}

#[test]
fn berwald_convention_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg: Value = serde_json::from_str(&std::fs::read_to_string(fixture("euclidean_randers")).unwrap()).unwrap();
    cfg["samples"] = Value::from(10);
    let path = write(dir.path(), "c.json", &cfg.to_string());
    let out = run(&["verify", "--config", &path]);
    let r = json(&out);
    let q = &r["verify"]["quantities"];
    assert_eq!(q[0]["status"], "confirmed");
    assert_eq!(q[1]["status"], "confirmed");
    assert_eq!(q[2]["status"], "confirmed under convention B");
    assert_eq!(out.status.code(), Some(if r["verify"]["refuted"] == true { 4 } else { 0 }));
}

#[test]
fn corrupted_formula_exits_four() {
    let out = run(&["verify", "--config", &fixture("corrupted_cartan")]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json(&out)["verify"]["quantities"][0]["status"], "refuted as printed");
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad_json = write(dir.path(), "a.json", "{ not json");
    let bad_var = write(
        dir.path(),
        "b.json",
        r#"{"dimensions": {"m": 2, "n": 2}, "metric1": {"family": "euclidean"},
            "metric2": {"family": "euclidean"}, "twist": "exp(x7)"}"#,
    );
    let asymmetric = write(
        dir.path(),
        "c.json",
        r#"{"dimensions": {"m": 2, "n": 2}, "metric1": {"family": "riemannian", "a": [[1, 0.5], [0, 1]]},
            "metric2": {"family": "euclidean"}, "twist": "1"}"#,
    );
    for path in [&bad_json, &bad_var, &asymmetric, &"/nonexistent/config.json".to_string()] {
        let out = run(&["verify", "--config", path]);
        assert_eq!(out.status.code(), Some(2), "{path}");
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(run(&["verify"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate", "--config", &fixture("euclidean_flat")]).status.code(), Some(2));
    let out = run(&["eval", "--config", &fixture("euclidean_flat"), "--point", "x=0,0;y=1,1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn domain_errors_exit_three() {
    let out = run(&["eval", "--config", &fixture("euclidean_flat"), "--point", "x=0,0,0,0;y=1,0,0,0"]);
    assert_eq!(out.status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let negative = write(
        dir.path(),
        "n.json",
        r#"{"dimensions": {"m": 2, "n": 2}, "metric1": {"family": "euclidean"},
            "metric2": {"family": "euclidean"}, "twist": "x1 - 3", "samples": 5}"#,
    );
    for cmd in ["eval", "verify", "classify", "fdcheck"] {
        assert_eq!(run(&[cmd, "--config", &negative]).status.code(), Some(3), "{cmd}");
    }
}

#[test]
fn fdcheck_reports_steps_and_exact_polynomials() {
    let out = run(&["fdcheck", "--config", &fixture("euclidean_flat"), "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["fdcheck"]["step"].as_f64(), Some(1e-2));
    assert_eq!(r["fdcheck"]["richardson_levels"], 1);
    for row in r["fdcheck"]["rows"].as_array().unwrap() {
        assert!(row["max_abs_diff"].as_f64().unwrap() <= 1e-12, "{row}");
    }
}

#[test]
fn classify_reports_isotropy_fits() {
    let out = run(&["classify", "--config", &fixture("constant_randers_euclidean")]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let c = &r["classify"];
    assert_eq!(c["landsberg"]["oracle"]["verdict"], "pass");
    assert_eq!(c["consistent"], true);
    let fits = c["isotropy"]["fits"].as_array().unwrap();
    assert_eq!(fits.len(), 6);
    for f in fits {
        assert!(f["c"].as_f64().unwrap().abs() <= 1e-8);
        assert_eq!(f["outcome"], "isotropic with c = 0 and vanishing curvature");
    }
}
