use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use serde_json::Value;

fn aphg(out_dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aphg"))
        .env("APHG_OUT_DIR", out_dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out_dir: &Path, args: &[&str]) -> Output {
    let o = aphg(out_dir, args);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let headers = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (headers, rows)
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn fit_all_models_on_kevlar() {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    ok(dir.path(), &["fit", "--data", "kevlar", "--models", "all"]);
    assert!(start.elapsed() < Duration::from_secs(60));

    let report = read_json(&dir.path().join("fit_kevlar.json"));
    let models = report["models"].as_array().unwrap();
    assert_eq!(models.len(), 5);
    let deviance = |m: &Value| num(&m["gof"]["neg2loglik"]);
    let full = models.iter().find(|m| m["fit"]["model"] == "aphbxii").unwrap();
    // Every other model is nested in the full one.
    assert!(models.iter().all(|m| deviance(full) <= deviance(m) + 1e-6));
    for m in models {
        let g = &m["gof"];
        let k = num(&g["k"]);
        assert!((num(&g["aic"]) - deviance(m) - 2.0 * k).abs() < 1e-9);
        assert!((0.0..=1.0).contains(&num(&g["ks"])) && (0.0..=1.0).contains(&num(&g["ks_pvalue"])));
    }
    assert_eq!(report["league"].as_array().unwrap().len(), 5);
    let lr = report["lr_tests"].as_array().unwrap();
    let dfs: Vec<u64> = lr.iter().map(|r| r["df"].as_u64().unwrap()).collect();
    assert_eq!(dfs, vec![1, 2, 2, 3]);
}

#[test]
fn fit_bxii_on_cancer_as_csv() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["--format", "csv", "fit", "--data", "cancer", "--models", "bxii"]);
    let (headers, rows) = read_csv(&dir.path().join("fit_cancer.csv"));
    assert_eq!(rows.len(), 1);
    let col = |name: &str| -> f64 {
        let i = headers.iter().position(|h| h == name).unwrap();
        rows[0][i].parse().unwrap()
    };
    assert!((col("ks") - 0.251).abs() < 0.005);
    assert!((1e-7..3e-7).contains(&col("ks_pvalue")));
    assert!((col("neg2loglik") - 907.034).abs() < 0.5);
    // A single model has no likelihood ratio tests: header only.
    let (lr_headers, lr_rows) = read_csv(&dir.path().join("lr_cancer.csv"));
    assert!(lr_rows.is_empty() && lr_headers.is_empty());
    let (league, _) = read_csv(&dir.path().join("league_cancer.csv"));
    assert_eq!(league[..3], ["position", "model", "rank_sum"]);
}

#[test]
fn fit_device_json_has_five_models() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["--format", "json", "fit", "--data", "device", "--models", "all"]);
    let report = read_json(&dir.path().join("fit_device.json"));
    assert_eq!(report["models"].as_array().unwrap().len(), 5);
    assert_eq!(report["n"], 50);
}

#[test]
fn props_reproduces_a_quantile_row() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["props", "--alpha", "0.5", "--upsilon", "1.2", "--c", "0.3", "--eta", "0.3", "--phi", "1.2"],
    );
    let r = read_json(&dir.path().join("props.json"));
    let q = &r["quantiles"];
    let want = [("q1", 0.3290), ("q2", 0.9550), ("q3", 3.6196), ("moors_k", 4.0068), ("galton_s", 0.6195)];
    for (key, w) in want {
        assert!((num(&q[key]) - w).abs() <= 5e-4, "{key}");
    }
    // φη = 0.36: no moments, and the notes say so.
    assert!(r["moments"].is_null());
    assert!(!r["notes"].as_array().unwrap().is_empty());
}

#[test]
fn props_renyi_of_unit_model() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "--format", "csv", "props", "--alpha", "1", "--upsilon", "1", "--c", "1", "--eta", "1", "--phi", "1",
            "--rho", "2",
        ],
    );
    let (headers, rows) = read_csv(&dir.path().join("props.csv"));
    assert_eq!(headers, ["quantity", "argument", "value"]);
    let renyi = rows.iter().find(|r| r[0] == "renyi_entropy").unwrap();
    let v: f64 = renyi[2].parse().unwrap();
    assert!((v - 3f64.ln()).abs() < 1e-8);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = aphg(
        dir.path(),
        &["props", "--alpha", "0", "--upsilon", "1", "--c", "1", "--eta", "1", "--phi", "1"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(aphg(dir.path(), &["simulate", "--set", "9"]).status.code(), Some(2));
    assert_eq!(aphg(dir.path(), &["fit", "--data", "kevlar", "--models", "weibull"]).status.code(), Some(2));
    assert_eq!(aphg(dir.path(), &[]).status.code(), Some(2));
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn data_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(aphg(dir.path(), &["ttt", "--data", "missing"]).status.code(), Some(3));
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "1.0\n-2.0\n").unwrap();
    let o = aphg(dir.path(), &["ttt", "--data", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("row 2"));
}

#[test]
fn simulate_is_deterministic_and_table_shaped() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["--format", "csv", "simulate", "--set", "1", "--replications", "4", "--seed", "42", "--population", "2000"];
    ok(a.path(), &args);
    ok(b.path(), &args);
    let fa = std::fs::read(a.path().join("simulate_set1.csv")).unwrap();
    let fb = std::fs::read(b.path().join("simulate_set1.csv")).unwrap();
    assert_eq!(fa, fb);
    let (headers, rows) = read_csv(&a.path().join("simulate_set1.csv"));
    assert_eq!(rows.len(), 7 * 5);
    for stat in ["ab", "se", "mse"] {
        assert!(headers.iter().any(|h| h == stat));
    }
}

#[test]
fn ttt_ends_at_one() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["--format", "csv", "ttt", "--data", "kevlar"]);
    let (headers, rows) = read_csv(&dir.path().join("ttt_kevlar.csv"));
    assert_eq!(headers, ["u", "t"]);
    assert_eq!(rows.len(), 101);
    assert_eq!(rows.last().unwrap(), &["1.0", "1.0"]);
}

#[test]
fn overlay_matches_the_ks_distance() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["plotdata", "overlay", "--data", "cancer", "--model", "aphbxii"]);
    ok(dir.path(), &["fit", "--data", "cancer", "--models", "aphbxii"]);
    let overlay = read_json(&dir.path().join("overlay_cancer_aphbxii.json"));
    let d = overlay["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| {
            let f = num(&p["fitted_cdf"]);
            (num(&p["ecdf_upper"]) - f).max(f - num(&p["ecdf_lower"]))
        })
        .fold(0.0, f64::max);
    let report = read_json(&dir.path().join("fit_cancer.json"));
    let ks = num(&report["models"][0]["gof"]["ks"]);
    assert!((d - ks).abs() <= 1e-9, "{d} vs {ks}");
    let counts: u64 = overlay["histogram"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["count"].as_u64().unwrap())
        .sum();
    assert_eq!(counts, 128);
}

#[test]
fn hazard_curve_for_small_phi_decreases() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "--format", "csv", "plotdata", "curves", "--alpha", "2", "--c", "0.5", "--upsilon", "1.5", "--phi", "0.7",
            "--eta", "2", "--x-max", "8",
        ],
    );
    let (headers, rows) = read_csv(&dir.path().join("curves.csv"));
    let i = headers.iter().position(|h| h == "hrf").unwrap();
    let h: Vec<f64> = rows.iter().map(|r| r[i].parse().unwrap()).collect();
    assert!(h.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn tables_are_written_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["tables"]);
    ok(dir.path(), &["--format", "csv", "tables"]);
    let q = read_json(&dir.path().join("table_quantiles.json"));
    assert_eq!(q.as_array().unwrap().len(), 10);
    let (headers, rows) = read_csv(&dir.path().join("table_moments.csv"));
    assert_eq!(rows.len(), 4);
    assert_eq!(headers[..4], ["alpha", "upsilon", "c", "mu1"]);
    let (headers, rows) = read_csv(&dir.path().join("table_descriptive.csv"));
    assert_eq!(rows.len(), 3);
    assert_eq!(headers[0], "dataset");
    let json = read_json(&dir.path().join("table_descriptive.json"));
    assert!((num(&json[2]["kurtosis"]) - 1.414).abs() < 0.01);
}

#[test]
fn out_dir_flag_overrides_environment() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    ok(
        env_dir.path(),
        &["--out-dir", flag_dir.path().to_str().unwrap(), "ttt", "--data", "device"],
    );
    assert!(flag_dir.path().join("ttt_device.json").exists());
    assert!(!env_dir.path().join("ttt_device.json").exists());
}
