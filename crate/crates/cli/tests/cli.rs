//! End-to-end tests of the binary: flags, exit codes, output formats and
//! byte determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use quantci::tukey::tl_sample;

const BIN: &str = env!("CARGO_BIN_EXE_quantci");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_sample(path: &Path, lambda: f64, n: usize, seed: u64) {
    let s = tl_sample(n, lambda, seed);
    let text: String = s.values().iter().map(|x| format!("{x}\n")).collect();
    fs::write(path, text).unwrap();
}

#[test]
fn band_dkw_values_and_layout() {
    let out = run(&["band", "--n", "100", "--alpha", "0.05", "--kind", "dkw"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "i,lower,upper");
    assert_eq!(lines.len(), 101);
    let eps = (40.0f64.ln() / 200.0).sqrt();
    // row for i = 50 is unclipped on both sides
    let fields: Vec<&str> = lines[50].split(',').collect();
    assert_eq!(fields[0], "50");
    let lo: f64 = fields[1].parse().unwrap();
    let hi: f64 = fields[2].parse().unwrap();
    assert!((lo - (0.5 - eps)).abs() < 1e-12);
    assert!((hi - (0.5 + eps)).abs() < 1e-12);
}

#[test]
fn band_dw_deterministic_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = run(&[
            "band", "--n", "40", "--alpha", "0.1", "--kind", "dw", "--seed", "42", "--mc-reps",
            "1000", "--out", path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn band_usage_errors() {
    let out = run(&["band", "--n", "100", "--alpha", "1.5", "--kind", "dkw"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["band", "--n", "50", "--alpha", "0.05", "--kind", "dw", "--nu", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["band", "--n", "50", "--alpha", "0.05", "--kind", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tl_ci_finite_interval_on_synthetic_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("x.txt");
    write_sample(&data, 0.5, 120, 7);
    let out = run(&[
        "tl-ci", "--data", data.to_str().unwrap(), "--band", "dw", "--mc-reps", "1000", "--seed",
        "3", "--transform", "abs",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["empty"], false);
    let lo = v["lower"].as_f64().unwrap();
    let hi = v["upper"].as_f64().unwrap();
    assert!(lo.is_finite() && hi.is_finite() && lo <= 0.5 && 0.5 <= hi, "[{lo}, {hi}]");
}

#[test]
fn tl_ci_empty_intersection_is_exit_zero() {
    // an exact zero among |X| with a strictly positive band lower edge makes
    // the per-index constraint unsatisfiable
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("x.txt");
    let mut text = String::from("0.0\n");
    let s = tl_sample(60, 0.0, 9);
    for x in s.values() {
        text.push_str(&format!("{x}\n"));
    }
    fs::write(&data, text).unwrap();
    let out = run(&[
        "tl-ci", "--data", data.to_str().unwrap(), "--band", "dw", "--mc-reps", "1000",
        "--transform", "abs",
    ]);
    assert!(out.status.success(), "empty set is a legal result");
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["empty"], true);
    assert!(v.get("lower").is_none());
}

#[test]
fn data_errors_are_exit_one() {
    let out = run(&["tl-ci", "--data", "/nonexistent/file.txt"]);
    assert_eq!(out.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.txt");
    fs::write(&data, "1.0\nabc\n2.0\n").unwrap();
    let out = run(&["tl-ci", "--data", data.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let nan = dir.path().join("nan.txt");
    fs::write(&nan, "1.0\nNaN\n").unwrap();
    let out = run(&["tl-ci", "--data", nan.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn csv_column_by_name_and_index() {
    let dir = tempfile::tempdir().unwrap();
    let csv_named = dir.path().join("d.csv");
    fs::write(&csv_named, "id,value\n1,0.5\n2,-0.25\n3,1.5\n4,-0.75\n").unwrap();
    let out = run(&[
        "estimate", "--data", csv_named.to_str().unwrap(), "--csv-column", "value", "--method",
        "lmom",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["n"], 4);

    let csv_bare = dir.path().join("e.csv");
    fs::write(&csv_bare, "0.5,9\n-0.25,9\n1.5,9\n-0.75,9\n").unwrap();
    let out2 = run(&[
        "estimate", "--data", csv_bare.to_str().unwrap(), "--csv-column", "0", "--method", "lmom",
    ]);
    assert!(out2.status.success());
    let v2: serde_json::Value = serde_json::from_str(&stdout(&out2)).unwrap();
    assert_eq!(v["lambda"], v2["lambda"]);

    let out = run(&[
        "estimate", "--data", csv_named.to_str().unwrap(), "--csv-column", "missing", "--method",
        "lmom",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn estimate_failure_is_exit_three_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("const.txt");
    fs::write(&data, "2.0\n".repeat(50)).unwrap();
    let out = run(&["estimate", "--data", data.to_str().unwrap(), "--method", "lmom"]);
    assert_eq!(out.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["schema"], 1);
    assert!(v["error"].as_str().unwrap().contains("L-scale"));
}

#[test]
fn estimate_with_bootstrap_interval() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("x.txt");
    write_sample(&data, 1.0, 150, 11);
    let out = run(&[
        "estimate", "--data", data.to_str().unwrap(), "--method", "qmatch", "--bootstrap",
        "param", "--b", "200", "--seed", "5",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["bootstrap"]["kind"], "parametric");
    assert_eq!(v["bootstrap"]["interval"]["empty"], false);
    // determinism across invocations
    let out2 = run(&[
        "estimate", "--data", data.to_str().unwrap(), "--method", "qmatch", "--bootstrap",
        "param", "--b", "200", "--seed", "5",
    ]);
    assert_eq!(out.stdout, out2.stdout);
}

#[test]
fn gld_ci_targets_and_region_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("x.txt");
    write_sample(&data, 0.14, 200, 13);
    let region = dir.path().join("region.csv");
    let out = run(&[
        "gld-ci", "--data", data.to_str().unwrap(), "--band", "dkw", "--targets",
        "mu,sigma,shape", "--pairs", "edge:9", "--chi-cells", "50", "--xi-cells", "50",
        "--region-out", region.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["mu"]["lower"].is_f64());
    assert!(v["sigma"]["upper"].is_f64());
    assert!(v["shape"]["area"].as_f64().unwrap() > 0.0);
    let text = fs::read_to_string(&region).unwrap();
    assert!(text.starts_with("chi,xi,inside\n"));
    assert_eq!(text.lines().count(), 1 + 50 * 50);

    let out = run(&["gld-ci", "--data", data.to_str().unwrap(), "--targets", "median"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&[
        "gld-ci", "--data", data.to_str().unwrap(), "--targets", "shape", "--pairs", "bogus",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{
            "study": "band_comparison",
            "family": "tukey_lambda",
            "truth": [0.0, 1.0],
            "n_grid": [15],
            "methods": ["abs"],
            "bands": ["dw", "dkw"],
            "alpha": 0.1,
            "replications": 30,
            "master_seed": 99,
            "mc_reps": 1000
        }"#,
    )
    .unwrap();
    let out1 = dir.path().join("r1.csv");
    let out8 = dir.path().join("r8.csv");
    let r1 = run(&[
        "simulate", "--config", cfg.to_str().unwrap(), "--out", out1.to_str().unwrap(),
        "--threads", "1",
    ]);
    assert!(r1.status.success(), "{}", String::from_utf8_lossy(&r1.stderr));
    let r8 = run(&[
        "simulate", "--config", cfg.to_str().unwrap(), "--out", out8.to_str().unwrap(),
        "--threads", "8",
    ]);
    assert!(r8.status.success());
    assert_eq!(fs::read(&out1).unwrap(), fs::read(&out8).unwrap());
    let text = fs::read_to_string(&out1).unwrap();
    assert!(text.starts_with(
        "family,truth,n,method,coverage,mean_width_or_area,infinite_fraction,replications,wall_time_seconds\n"
    ));
    assert_eq!(text.lines().count(), 1 + 4);
}

#[test]
fn simulate_config_errors_are_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    let out = run(&["simulate", "--config", bad.to_str().unwrap(), "--out", "/tmp/x.csv"]);
    assert_eq!(out.status.code(), Some(2));

    let invalid = dir.path().join("invalid.json");
    fs::write(
        &invalid,
        r#"{"study":"band_comparison","family":"gld","truth":[0.0],"n_grid":[10],
            "methods":["abs"],"alpha":0.1,"replications":5,"master_seed":1}"#,
    )
    .unwrap();
    let out = run(&["simulate", "--config", invalid.to_str().unwrap(), "--out", "/tmp/x.csv"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["simulate", "--config", "/nonexistent.json", "--out", "/tmp/x.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bundled_configs_parse_and_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut found = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) == Some("json") {
            let text = fs::read_to_string(&path).unwrap();
            quantci::sim::ExperimentConfig::from_json(&text)
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            found += 1;
        }
    }
    assert_eq!(found, 4);
}
