use std::path::PathBuf;
use std::process::Command;

use serde_json::{json, Value};
use tempfile::TempDir;

fn run(args: &[&str]) -> (i32, Value) {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> (i32, Value) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_radon-hgf"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    let report: Value = serde_json::from_slice(&out.stdout).expect("stdout is a JSON report");
    (out.status.code().unwrap(), report)
}

fn write(dir: &TempDir, name: &str, v: &Value) -> String {
    let p: PathBuf = dir.path().join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p.to_str().unwrap().to_string()
}

fn matrix(rows: usize, cols: usize, entries: &[f64]) -> Value {
    let data: Vec<[f64; 2]> = entries.iter().map(|&x| [x, 0.0]).collect();
    json!({ "rows": rows, "cols": cols, "data": data })
}

/// The (1,1,1,1) normal form at x = 0.3.
fn gauss_z(dir: &TempDir) -> String {
    write(dir, "z.json", &matrix(2, 4, &[1.0, 0.0, 1.0, 1.0, 0.0, 1.0, -1.0, -0.3]))
}

#[test]
fn theta_prints_text_and_latex() {
    let (code, rep) = run(&["theta", "--p", "4"]);
    assert_eq!(code, 0);
    assert_eq!(rep["command"], "theta");
    assert_eq!(rep["results"]["theta"], json!(["h1", "h2 - 1/2 h1^2", "h3 - 1/2 (h1 h2 + h2 h1) + 1/3 h1^3"]));
    let (_, rep) = run(&["theta", "--p", "3", "--latex"]);
    assert_eq!(rep["results"]["format"], "latex");
    assert_eq!(rep["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn verify_gamma_reports_two_pi() {
    let (code, rep) = run(&["verify-gamma", "--r", "2", "--a", "3"]);
    assert_eq!(code, 0);
    assert_eq!(rep["pass"], true);
    let v = rep["results"]["estimate"]["value"][0].as_f64().unwrap();
    assert!((v - 2.0 * std::f64::consts::PI).abs() < 1e-10);
    assert_eq!(rep["results"]["estimate"]["method"], "eigen-tensor");
}

#[test]
fn exit_codes() {
    let (code, rep) = run(&["verify-gamma", "--r", "2"]);
    assert_eq!(code, 2);
    assert!(rep["error"].as_str().unwrap().contains("--a"));
    let (code, _) = run(&["verify-beta", "--r", "1", "--a", "2", "--b", "3", "--tol", "1e-300"]);
    assert_eq!(code, 1);
    let (code, _) = run_env(&["theta", "--p", "3"], &[("RADON_HGF_THREADS", "zero")]);
    assert_eq!(code, 2);
    let (code, rep) = run_env(&["theta", "--p", "3"], &[("RADON_HGF_THREADS", "2")]);
    assert_eq!(code, 0);
    assert_eq!(rep["threads"], 2);
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", &json!({ "rows": 2, "cols": 2, "data": [[1.0, 0.0]] }));
    let (code, _) = run(&["zcheck", "--partition", "1,1", "--z-json", &bad]);
    assert_eq!(code, 2);
}

#[test]
fn zcheck_and_normal_form() {
    let dir = TempDir::new().unwrap();
    let z = gauss_z(&dir);
    let (code, rep) = run(&["zcheck", "--partition", "1,1,1,1", "--z-json", &z]);
    assert_eq!(code, 0);
    assert_eq!(rep["results"]["member"], true);
    let bad = write(&dir, "bad.json", &matrix(2, 4, &[1.0, 0.0, 1.0, 2.0, 0.0, 1.0, 0.0, 0.0]));
    let (_, rep) = run(&["zcheck", "--partition", "1,1,1,1", "--z-json", &bad]);
    assert_eq!(rep["results"]["member"], false);
    assert!(!rep["results"]["failing"].as_array().unwrap().is_empty());
    let (code, rep) = run(&["normal-form", "--partition", "1,1,1,1", "--z-json", &z]);
    assert_eq!(code, 0);
    assert_eq!(rep["results"]["form_label"], "(1,1,1,1)/x1");
    let x = rep["results"]["x"][0]["data"][0][0].as_f64().unwrap();
    assert!((x - 0.3).abs() < 1e-12);
    assert!(rep["results"]["residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn chi_of_torus_element() {
    let dir = TempDir::new().unwrap();
    let blocks: Vec<Value> = [2.0, 0.5, 4.0].iter().map(|&v| json!([matrix(1, 1, &[v])])).collect();
    let h = write(&dir, "h.json", &json!({ "blocks": blocks }));
    let alpha = write(&dir, "a.json", &json!([0.5, [-1.0, 0.0], -1.5]));
    let (code, rep) = run(&["chi", "--partition", "1,1,1", "--alpha-json", &alpha, "--element-json", &h, "--m", "2", "--validation", "relaxed"]);
    assert_eq!(code, 0, "{rep}");
    // 2^0.5 · 0.5^-1 · 4^-1.5
    let v = rep["results"]["value"][0].as_f64().unwrap();
    assert!((v - 2f64.sqrt() * 2.0 / 8.0).abs() < 1e-14);
}

#[test]
fn radon_and_eval_agree_on_gauss() {
    let dir = TempDir::new().unwrap();
    let z = gauss_z(&dir);
    // gauss a = 0.6, b = 0.7, c = 1.3: α = (b - c, a - 1, c - a - 1, -b)
    let (code, rep) =
        run(&["radon", "--partition", "1,1,1,1", "--alpha", "-0.6,-0.4,-0.3,-0.7", "--validation", "relaxed", "--z-json", &z]);
    assert_eq!(code, 0, "{rep}");
    assert_eq!(rep["results"]["normal_form"], "(1,1,1,1)/x1");
    let radon = rep["results"]["estimate"]["value"][0].as_f64().unwrap();
    let x = write(&dir, "x.json", &matrix(1, 1, &[0.3]));
    let (code, rep) = run(&["eval", "--family", "gauss", "--a", "0.6", "--b", "0.7", "--c", "1.3", "--X-json", &x]);
    assert_eq!(code, 0, "{rep}");
    let direct = rep["results"]["estimate"]["value"][0].as_f64().unwrap();
    assert!((radon - direct).abs() < 1e-8 * direct.abs());
    let (code, _) = run(&["radon", "--partition", "1,1,1,1", "--alpha", "-0.6,-0.4,-0.3,-0.7", "--validation", "relaxed", "--z-json", &z, "--chain", "line"]);
    assert_eq!(code, 2);
}

#[test]
fn seed_fixes_monte_carlo() {
    let dir = TempDir::new().unwrap();
    let x = write(&dir, "x.json", &matrix(2, 2, &[0.0, 0.0, 0.0, 0.0]));
    let args = ["eval", "--family", "gauss", "--r", "2", "--a", "2", "--b", "1", "--c", "4", "--X-json", &x, "--method", "haar-mc", "--samples", "2e4", "--seed", "42"];
    let (code, a) = run(&args);
    assert_eq!(code, 0, "{a}");
    let (_, b) = run_env(&args, &[("RADON_HGF_THREADS", "1")]);
    assert_eq!(a["results"]["estimate"], b["results"]["estimate"]);
    assert_eq!(a["results"]["estimate"]["seed"], 42);
    let v = a["results"]["normalized"]["value"][0].as_f64().unwrap();
    let sigma = a["results"]["normalized"]["abs_error_est"].as_f64().unwrap();
    assert!((v - 1.0).abs() < 4.0 * sigma);
}

#[test]
fn verify_pde_and_covariance() {
    let dir = TempDir::new().unwrap();
    let z = write(&dir, "z.json", &matrix(2, 4, &[1.02, 0.03, 0.98, 1.01, -0.02, 1.01, -1.03, -0.31]));
    let w = ["--alpha", "-0.45,-0.3,-0.7", "--fix-leading", "--validation", "relaxed"];
    let mut args = vec!["verify-pde", "--partition", "1,1,1,1", "--z-json", &z, "--h", "1e-3"];
    args.extend(w);
    let (code, rep) = run(&args);
    assert_eq!(code, 0, "{rep}");
    let pairs = rep["results"]["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 6);
    assert_eq!(pairs[0]["I"], json!([1, 2]));
    let mut args = vec!["verify-covariance", "--partition", "1,1,1,1", "--z-json", &z, "--trials", "5", "--gl-trials", "3"];
    args.extend(w);
    let (code, rep) = run(&args);
    assert_eq!(code, 0, "{rep}");
    assert_eq!(rep["results"]["report"]["h_trials"], 5);
}

#[test]
fn verify_classical_default_grid() {
    let (code, rep) = run(&["verify-classical"]);
    assert_eq!(code, 0, "{rep}");
    assert_eq!(rep["results"]["points"].as_array().unwrap().len(), 10);
}

#[test]
fn suite_subset() {
    let (code, rep) = run(&["suite", "--level", "quick", "--only", "1,9,13"]);
    assert_eq!(code, 0, "{rep}");
    let crit = rep["results"]["criteria"].as_array().unwrap();
    assert_eq!(crit.len(), 3);
    assert!(crit.iter().all(|c| c["pass"] == true));
    let (code, _) = run(&["suite", "--only", "14"]);
    assert_eq!(code, 2);
    let (code, _) = run(&["suite", "--level", "huge"]);
    assert_eq!(code, 2);
}
