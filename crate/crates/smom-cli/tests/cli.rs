use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;

fn smom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smom"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn smom_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smom"))
        .args(args)
        .env("SMOM_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, content).unwrap();
    p
}

fn repo_file(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(rel)
        .display()
        .to_string()
}

#[test]
fn gaussian_two_point_fit_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "x.csv", "0\n2\n");
    let out = smom(&[
        "fit",
        data.to_str().unwrap(),
        "--dist",
        "gaussian",
        "--recipe",
        "MO",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let theta = &v["results"][0]["theta_hat"];
    assert!((theta[0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((theta[1].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["n"], 2);
}

#[test]
fn rounded_nakagami_data_keeps_stein_estimators_finite() {
    let data = repo_file("data/rainfall-synthetic.csv");
    let out = smom(&[
        "fit", &data, "--dist", "nakagami", "--recipe", "ST,MO2", "--recipe", "MO3", "--recipe",
        "ML", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let results = v["results"].as_array().unwrap();
    let status = |tag: &str| {
        results
            .iter()
            .find(|r| r["recipe"] == format!("nakagami:{tag}"))
            .map(|r| r["status"].as_str().unwrap().to_string())
            .unwrap()
    };
    assert_eq!(status("ST"), "OK");
    assert_eq!(status("MO2"), "OK");
    assert_ne!(status("MO3"), "OK");
    assert_ne!(status("ML"), "OK");
    let m = results[0]["theta_hat"][0].as_f64().unwrap();
    assert!(m.is_finite() && m > 0.3 && m < 1.2, "m = {m}");
}

#[test]
fn covariance_and_standard_errors_are_reported() {
    let data = repo_file("data/rainfall-synthetic.csv");
    let out = smom(&[
        "fit", &data, "--dist", "nakagami", "--recipe", "ST", "--cov", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let r = &v["results"][0];
    let n = v["n"].as_f64().unwrap();
    let cov = &r["covariance"];
    let se = &r["std_errors"];
    for i in 0..2 {
        let var = cov[i][i].as_f64().unwrap();
        assert!((se[i].as_f64().unwrap() - (var / n).sqrt()).abs() < 1e-12);
    }
    assert_eq!(r["covariance_mode"], "closed_form");
}

#[test]
fn monthly_aggregation_reduces_the_sample() {
    let data = repo_file("data/rainfall-synthetic.csv");
    let out = smom(&[
        "fit",
        &data,
        "--dist",
        "nakagami",
        "--recipe",
        "ST",
        "--aggregate",
        "monthly",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["n"], 24);
    let weekly = smom(&[
        "fit",
        &data,
        "--dist",
        "nakagami",
        "--recipe",
        "ST",
        "--aggregate",
        "weekly",
        "--format",
        "json",
    ]);
    let v: Value = serde_json::from_str(&stdout(&weekly)).unwrap();
    assert_eq!(v["n"], 105);
}

#[test]
fn csv_output_has_six_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "x.txt", "value\n0.1\n0.35\n1.7\n2.2\n0.9\n");
    let out = smom(&[
        "fit",
        data.to_str().unwrap(),
        "--dist",
        "gamma",
        "--recipe",
        "MO",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("recipe,status,param,estimate,std_error,residual")
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..3], &["gamma:MO", "OK", "alpha"]);
    let digits = row[3].chars().filter(|c| c.is_ascii_digit()).count();
    assert!(digits <= 7, "{}", row[3]);
}

#[test]
fn unknown_recipe_and_distribution_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "x.csv", "1\n2\n");
    let path = data.to_str().unwrap();
    let out = smom(&["fit", path, "--dist", "gamma", "--recipe", "NOPE"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("gamma:LOG"), "{}", stderr(&out));
    let out = smom(&["fit", path, "--dist", "weibull"]);
    assert_eq!(out.status.code(), Some(2));
    let out = smom(&["fit", path, "--dist", "gamma", "--recipe", "beta:MO"]);
    assert_eq!(out.status.code(), Some(2));
    let out = smom(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_input_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(
        dir.path(),
        "x.csv",
        "date;value\n2020-01-01;1\n2020-01-02;x\n",
    );
    let out = smom(&["fit", data.to_str().unwrap(), "--dist", "gamma"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
    let missing = smom(&["fit", "/nonexistent/file.csv", "--dist", "gamma"]);
    assert_eq!(missing.status.code(), Some(2));
    let single = write(dir.path(), "y.csv", "1\n2\n");
    let out = smom(&[
        "fit",
        single.to_str().unwrap(),
        "--dist",
        "gamma",
        "--aggregate",
        "weekly",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_of_support_data_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "x.csv", "1\n-2\n3\n");
    let out = smom(&[
        "fit",
        data.to_str().unwrap(),
        "--dist",
        "gamma",
        "--recipe",
        "MO",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn all_recipes_failing_exits_with_estimation_code() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "x.csv", "1\n1\n1\n");
    let out = smom(&[
        "fit",
        data.to_str().unwrap(),
        "--dist",
        "gamma",
        "--recipe",
        "MO",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stdout(&out));
}

#[test]
fn smoke_preset_is_fast_and_echoes_the_seed() {
    let start = Instant::now();
    let out = smom(&["simulate", "smoke", "--reps", "5", "--seed", "11"]);
    assert!(start.elapsed().as_secs_f64() < 5.0);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stderr(&out).contains("master seed 11"));
    let text = stdout(&out);
    assert!(text.starts_with("theta_index,theta0,recipe,param,bias,mse"));
    assert_eq!(text.lines().count(), 1 + 2 * 4 * 2);
}

#[test]
fn simulation_output_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for threads in ["1", "3"] {
        let prefix = dir.path().join(format!("run{threads}"));
        let out = smom_env(
            &[
                "simulate",
                "smoke",
                "--reps",
                "15",
                "--out",
                prefix.to_str().unwrap(),
            ],
            threads,
        );
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        let csv = std::fs::read(prefix.with_extension("csv")).unwrap();
        let json = std::fs::read(prefix.with_extension("json")).unwrap();
        files.push((csv, json));
    }
    assert_eq!(files[0], files[1]);
    let json: Value = serde_json::from_slice(&files[0].1).unwrap();
    assert_eq!(json["meta"]["reps"], 15);
}

#[test]
fn simulate_accepts_a_scenario_file_and_a_golden_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(
        dir.path(),
        "s.json",
        r#"{"distribution":"gamma","thetas":[[1,1]],"recipes":["ST","MO"],"n":50,"reps":300,"seed":3}"#,
    );
    let golden = repo_file("data/golden/gamma-n50.csv");
    let out = smom(&["simulate", scenario.to_str().unwrap(), "--compare", &golden]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "golden grid is larger than the scenario"
    );
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"distribution":"gamma","thetas":[[1,1]],"recipes":["ST"],"n":50,"reps":0,"seed":3}"#,
    );
    let out = smom(&["simulate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = smom(&["simulate", "no-such-preset"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ellipse_from_identity_covariance_is_a_circle() {
    let out = smom(&[
        "ellipse", "--dist", "gamma", "--theta", "0,0", "--n", "100", "--cov", "1,0,0,1",
        "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let points = v["points"].as_array().unwrap();
    assert_eq!(points.len(), 64);
    for p in points {
        let r = p[0].as_f64().unwrap().hypot(p[1].as_f64().unwrap());
        assert!((r - 0.244_774_683_6).abs() < 1e-6, "radius {r}");
    }
    let csv = smom(&[
        "ellipse", "--dist", "gamma", "--theta", "0,0", "--n", "100", "--cov", "1,0,0,1",
    ]);
    let text = stdout(&csv);
    assert_eq!(text.lines().next(), Some("x,y"));
    assert_eq!(text.lines().count(), 65);
}

#[test]
fn ellipse_from_recipe_covariance() {
    let out = smom(&[
        "ellipse", "--dist", "nakagami", "--recipe", "ST", "--theta", "0.7,1", "--n", "500",
        "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["covariance_mode"], "closed_form");
    assert!(v["area"].as_f64().unwrap() > 0.0);
}

#[test]
fn singular_covariance_exits_with_estimation_code() {
    let out = smom(&[
        "ellipse", "--dist", "gamma", "--theta", "0,0", "--n", "10", "--cov", "1,1,1,1",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let out = smom(&[
        "ellipse", "--dist", "gamma", "--theta", "0,0", "--n", "10", "--cov", "1,2,3",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn varcurve_marks_missing_moment_variances() {
    let out = smom(&["varcurve", "--kappa", "10", "--grid", "3,5,8"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][2], "");
    assert!(!rows[1][2].is_empty());
    for r in &rows {
        let st: f64 = r[1].parse().unwrap();
        let mle: f64 = r[3].parse().unwrap();
        assert!(st >= mle * (1.0 - 1e-5));
    }
    let bad = smom(&["varcurve", "--grid", "5:1:1"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn list_covers_the_catalogue() {
    let out = smom(&["list", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["distributions"].as_array().unwrap().len(), 12);
    let presets: Vec<&str> = v["presets"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p.as_str().unwrap())
        .collect();
    assert!(presets.contains(&"gamma-n50") && presets.contains(&"smoke"));
}

#[test]
fn output_file_receives_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("fit.json");
    let data = write(dir.path(), "x.csv", "0\n2\n");
    let out = smom(&[
        "fit",
        data.to_str().unwrap(),
        "--dist",
        "gaussian",
        "--format",
        "json",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(target).unwrap()).unwrap();
    assert_eq!(v["distribution"], "gaussian");
}
