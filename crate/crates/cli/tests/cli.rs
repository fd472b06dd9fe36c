use std::process::{Command, Output};

use serde_json::Value;

const FAMILY: &str = r#"{"template":"v*z","params":[2,4,8,16],"disc":{"center":"0","radius":1}}"#;

fn nevanlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nevanlab"))
        .args(args)
        .env_remove("NEVANLAB_SAMPLES")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn characteristic_of_z_is_log_r() {
    let out = nevanlab(&["characteristic", "--f", "z", "--rmin", "2", "--rmax", "128"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("# config: "));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 64);
    for row in rows {
        assert!((row[4] - row[0].ln()).abs() < 1e-6);
    }
}

#[test]
fn characteristic_of_exp_tracks_r_over_pi() {
    let out = nevanlab(&["characteristic", "--f", "exp(z)", "--rmin", "10", "--rmax", "50", "--points", "3"]);
    assert_eq!(out.status.code(), Some(0));
    for row in csv_rows(&stdout(&out)) {
        let want = row[0] / std::f64::consts::PI;
        assert!((row[4] - want).abs() / want < 0.02);
    }
}

#[test]
fn malformed_expression_exits_2() {
    let out = nevanlab(&["characteristic", "--f", "exp(z"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("syntax error"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(nevanlab(&["nonsense"]).status.code(), Some(2));
    assert_eq!(nevanlab(&["expand", "--n", "3"]).status.code(), Some(2));
}

#[test]
fn lemma3_rejects_zero_order() {
    let out = nevanlab(&["verify", "lemma3", "--g", "(z^2-1)/z", "--spec", r#"{"n":0,"pairs":[[3,0]]}"#, "--values", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lemma3_passes_for_identity() {
    let out = nevanlab(&[
        "verify", "lemma3", "--g", "z", "--spec", r#"{"n":1,"pairs":[[2,1]]}"#, "--values", "1,2", "--samples", "512",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("\"pass\":true"));
}

#[test]
fn lemma3_degree_precondition_exits_2() {
    let out = nevanlab(&["verify", "lemma3", "--g", "z", "--poly", "g'", "--values", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn smt_passes_for_square() {
    let out = nevanlab(&["verify", "smt", "--f", "z^2", "--values", "0,1,-1", "--samples", "512"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn samples_env_is_echoed() {
    let out = Command::new(env!("CARGO_BIN_EXE_nevanlab"))
        .args(["characteristic", "--f", "z", "--points", "2", "--format", "json"])
        .env("NEVANLAB_SAMPLES", "256")
        .output()
        .unwrap();
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["config"]["samples"], 256);
    assert_eq!(report["report"]["samples"], 256);
}

#[test]
fn expand_prints_exact_coefficients() {
    let out = nevanlab(&["expand", "--n", "3", "--t", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "6*g*(g')^2 + 3*g^2*g''");
}

#[test]
fn criteria_print_exact_rationals() {
    let out = nevanlab(&["criteria", "th1", "--n", "3", "--pairs", "3:1", "--q", "1", "--ell", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "lhs=1/3 rhs=3/7 PASS");

    let out = nevanlab(&["criteria", "th2", "--n", "0", "--pairs", "2:1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).trim().ends_with("FAIL"));
}

#[test]
fn zalcman_converges_to_identity() {
    let out = nevanlab(&[
        "zalcman", "--family", FAMILY, "--alpha", "0", "--zv", "0", "--rho", "1/v", "--limit", "z", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["report"]["converged"], true);
    for step in report["report"]["steps"].as_array().unwrap() {
        assert!(step["distance_to_limit"].as_f64().unwrap() < 1e-10);
    }
}

#[test]
fn marty_reads_family_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let family = dir.path().join("family.json");
    std::fs::write(
        &family,
        r#"{"template":"v*z","params":[1,4,16,64,256,1024],"disc":{"center":"0","radius":1}}"#,
    )
    .unwrap();
    let report_path = dir.path().join("report.json");
    let out = nevanlab(&[
        "marty",
        "--family",
        &format!("@{}", family.display()),
        "--format",
        "json",
        "--output",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["report"]["flag"], "NOT-NORMAL-EVIDENCE");
    assert_eq!(report["config"]["args"]["resolution"], 32);
}

#[test]
fn remark14_pass_and_violation() {
    let family = r#"{"template":"v*z","params":[10,100,1000,10000,100000,1000000],"disc":{"center":"0","radius":1}}"#;
    let rho = "[0.03162277660168379,0.001,3.1622776601683795e-5,1e-6,3.1622776601683795e-8,1e-9]";
    let out = nevanlab(&[
        "remark14", "--family", family, "--main", r#"{"n":1,"pairs":[[2,1]]}"#, "--extra", r#"{"n":2,"pairs":[[2,1]]}"#,
        "--rho", rho,
    ]);
    assert_eq!(out.status.code(), Some(0));

    let out = nevanlab(&[
        "remark14", "--family", family, "--main", r#"{"n":1,"pairs":[[2,1]]}"#, "--extra", r#"{"n":1,"pairs":[[1,1]]}"#,
        "--rho", rho,
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha violation"));
}
