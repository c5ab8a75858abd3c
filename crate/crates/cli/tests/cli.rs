//! End-to-end checks of the `concert` binary: example values, exit codes,
//! CSV shape, and seed determinism.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_concert"))
}

fn scratch(name: &str, content: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("concert-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    fs::write(&path, content).unwrap();
    path
}

fn report(out: &Output) -> serde_json::Value {
    assert!(!out.stdout.is_empty(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

const HOPFIELD_MODEL: &str = r#"{
    "type": "hopfield",
    "lambda": [1.0, 1.0],
    "t": [[0.0, 1.0], [1.0, 0.0]],
    "activations": [
        {"kind": "tanh_like", "a": 0.5, "k": 1.0},
        {"kind": "tanh_like", "a": 0.5, "k": 1.0}
    ],
    "input": {"kind": "constant", "value": [0.0, 0.0]}
}"#;

const DECOUPLED_MODEL: &str = r#"{
    "type": "hopfield",
    "lambda": [1.0, 1.0],
    "t": [[0.0, 0.0], [0.0, 0.0]],
    "activations": [{"kind": "zero"}, {"kind": "zero"}],
    "input": {"kind": "constant", "value": [0.0, 0.0]}
}"#;

#[test]
fn measure_examples() {
    // Worked infinity-norm example matrix.
    let m = scratch("cx.json", "[[-1.6857, 1.0143], [-0.4143, -0.3143]]");
    let out = bin().args(["measure", m.to_str().unwrap(), "--p", "inf"]).output().unwrap();
    assert!(out.status.success());
    let rep = report(&out);
    let mu = rep["report"]["mu"].as_f64().unwrap();
    let mu_plus = rep["report"]["mu_plus"].as_f64().unwrap();
    assert!((mu - 0.1).abs() < 1e-9, "mu = {mu}");
    assert!((mu_plus + 0.3143).abs() < 1e-9, "mu+ = {mu_plus}");

    let m = scratch("diag.json", "[[-1.0, 0.0], [0.0, -2.0]]");
    let out = bin()
        .args(["measure", m.to_str().unwrap(), "--p", "1", "--oracle"])
        .output()
        .unwrap();
    let rep = report(&out);
    assert!((rep["report"]["mu_plus"].as_f64().unwrap() + 1.0).abs() < 1e-12);
    assert!(rep["report"]["oracle"]["mu_plus_gap"].as_f64().unwrap() < 2e-3);

    let m = scratch("id.json", "[[1.0, 0.0], [0.0, 1.0]]");
    let out = bin().args(["measure", m.to_str().unwrap(), "--p", "1"]).output().unwrap();
    let rep = report(&out);
    assert!((rep["report"]["mu_plus"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn parse_errors_exit_2() {
    let bad = scratch("bad.json", "[[1.0, 2.0], [3.0]]");
    let out = bin().args(["measure", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin().args(["measure", "/nonexistent/a.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn certify_pass_and_refute() {
    let model = scratch("hop.json", HOPFIELD_MODEL);
    let pass = bin()
        .args([
            "certify", model.to_str().unwrap(),
            "--condition", "one-sided-lipschitz",
            "--rate", "-0.5", "--p", "1", "--weight", "diag:1,1",
        ])
        .output()
        .unwrap();
    assert_eq!(pass.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&pass.stderr));
    let rep = report(&pass);
    assert_eq!(rep["report"]["verdict"], "certified-at-samples");

    // Inflated rate: the network only contracts at 0.5.
    let refute = bin()
        .args([
            "certify", model.to_str().unwrap(),
            "--condition", "one-sided-lipschitz",
            "--rate", "-0.7", "--p", "1", "--weight", "diag:1,1",
        ])
        .output()
        .unwrap();
    assert_eq!(refute.status.code(), Some(1));
    let rep = report(&refute);
    assert_eq!(rep["report"]["verdict"], "refuted");
    assert!(rep["report"]["witness"].is_object(), "refutation carries a witness");
}

#[test]
fn hopfield_rate_and_weight() {
    let model = scratch("hop2.json", HOPFIELD_MODEL);
    let out = bin()
        .args(["hopfield", model.to_str().unwrap(), "--p", "2", "--equilibrium"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let rep = report(&out);
    assert!((rep["report"]["c"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert!((rep["report"]["eta"][0].as_f64().unwrap() - 1.0).abs() < 1e-8);
    let eq = &rep["report"]["equilibrium"]["x_star"];
    assert!(eq[0].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn simulate_linear_decay_csv() {
    let model = scratch("dec.json", DECOUPLED_MODEL);
    let out = bin()
        .args([
            "simulate", model.to_str().unwrap(),
            "--x0", "1.0,1.0", "--horizon", "5", "--p", "inf",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,x1,x2,norm,dini");
    assert_eq!(lines.len(), 202);
    // Row at t = 1: x = e^{-1} both coordinates, sup norm likewise, and
    // the Dini derivative of the norm is -e^{-1}.
    let row: Vec<f64> = lines[41].split(',').map(|v| v.parse().unwrap()).collect();
    assert!((row[0] - 1.0).abs() < 1e-9);
    let e1 = (-1.0f64).exp();
    assert!((row[1] - e1).abs() < 1e-8);
    assert!((row[3] - e1).abs() < 1e-8);
    assert!((row[4] + e1).abs() < 1e-4);

    // Equilibrium start: constant zero rows.
    let out = bin()
        .args(["simulate", model.to_str().unwrap(), "--x0", "0,0", "--horizon", "2"])
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        let row: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(&row[1..3], &[0.0, 0.0]);
    }
}

#[test]
fn simulate_pair_distance_decays() {
    let model = scratch("hop3.json", HOPFIELD_MODEL);
    let out = bin()
        .args([
            "simulate", model.to_str().unwrap(),
            "--x0", "0.9,-0.4", "--x0", "-0.3,0.8",
            "--horizon", "10", "--p", "1",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    let d0 = rows[0].last().copied().unwrap();
    for r in &rows {
        let (t, d) = (r[0], *r.last().unwrap());
        // Contraction at rate 0.5 in the Perron norm (here the plain
        // 1-norm), with slack for the integration grid.
        assert!(d <= d0 * (-0.5 * t).exp() * 1.0001, "t = {t}: {d}");
    }
}

#[test]
fn same_seed_same_report() {
    let model = scratch("hop4.json", HOPFIELD_MODEL);
    let run = || {
        let out = bin()
            .args([
                "certify", model.to_str().unwrap(),
                "--condition", "jacobian",
                "--rate", "-0.5", "--p", "1", "--seed", "42", "--samples", "100",
            ])
            .output()
            .unwrap();
        report(&out)
    };
    let (a, b) = (run(), run());
    assert_eq!(a["report"], b["report"], "same seed must reproduce the report exactly");
    assert_eq!(a["seed"], 42);
}

const COMPARISON_MODEL: &str = r#"{
    "type": "comparison",
    "alpha": [{"kind": "linear", "slope": 2.0}, {"kind": "linear", "slope": 2.0}],
    "gains": [[null, {"kind": "linear", "slope": 0.5}], [{"kind": "linear", "slope": 0.5}, null]],
    "input_gains": [{"kind": "linear", "slope": 1.0}, {"kind": "linear", "slope": 1.0}],
    "alpha_lower": [{"kind": "linear", "slope": 1.0}, {"kind": "linear", "slope": 1.0}],
    "alpha_upper": [{"kind": "linear", "slope": 1.0}, {"kind": "linear", "slope": 1.0}]
}"#;

#[test]
fn iss_envelope_and_out_file() {
    let model = scratch("cmp.json", COMPARISON_MODEL);
    let out_path = scratch("iss-report.json", "");
    let ok = bin()
        .args([
            "iss", model.to_str().unwrap(),
            "--rate", "-1.5", "--u", "0.3,0.3", "--v0", "0.5,0.8",
            "--horizon", "12", "--p", "1",
            "--out", out_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&ok.stderr));
    let rep: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(rep["report"]["ok"], true);

    // The doubled rate is falsified: exit 1.
    let bad = bin()
        .args([
            "iss", model.to_str().unwrap(),
            "--rate", "-3.0", "--u", "0.3,0.3", "--v0", "0.5,0.8",
            "--horizon", "12", "--p", "1",
        ])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn selftest_quick_green_and_corruptible() {
    let ok = bin().args(["selftest", "--quick"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let text = String::from_utf8(ok.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("criterion")).count(), 10);

    // A corrupted closed form must surface as a red criterion.
    let bad = bin()
        .args(["selftest", "--quick"])
        .env("CONCERT_MUTATE_CLOSED_FORM", "1")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1), "corruption not surfaced");
}
