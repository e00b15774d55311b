//! End-to-end tests of the command-line binary: output formats, exit codes,
//! and determinism.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_melnikov-cert"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str, header: &str) -> Vec<Vec<f64>> {
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), header);
    lines
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn validate_reports_all_pass() {
    let text = stdout(&run(&["validate"]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 8);
    assert!(entries.iter().all(|e| e["status"] != "Fail"));
}

#[test]
fn melnikov_csv_matches_closed_form() {
    let text = stdout(&run(&["melnikov", "--c", "0.5", "--c", "2"]));
    let rows = csv_rows(&text, "c,theta,M_numeric,M_closed_form,abs_error");
    assert!(!rows.is_empty());
    for r in &rows {
        assert!((r[2] - r[3]).abs() <= 1e-6, "row {r:?}");
        assert!(r[4] <= 1e-6);
    }
}

#[test]
fn coeffs_csv_has_small_quadrature_errors() {
    let text = stdout(&run(&["coeffs", "--branch", "tilde_minus"]));
    let rows = csv_rows(
        &text,
        "c,j,re,im,quad_error,closed_form_re,closed_form_im",
    );
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert!(r[4] < 1e-8);
        assert!((r[2] - r[5]).hypot(r[3] - r[6]) < 1e-7, "row {r:?}");
    }
}

#[test]
fn monodromy_csv_flags_nonzero_commutators() {
    let text = stdout(&run(&["monodromy"]));
    let rows = csv_rows(
        &text,
        "c,ell,m_hat_re,m_hat_im,lambda1_plus,lambda1_minus,commutator_norm,threshold",
    );
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert!(r[1] == 1.0 || r[1] == -1.0);
        assert!(r[6] > 0.0, "commutator must not vanish at the reference point");
    }
}

#[test]
fn certify_writes_certificate_to_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["certify", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("certify.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let sec = &v["sections"][0];
    assert_eq!(sec["certificate"]["verdict"], "CertifiedNonintegrable");
    let witnesses = sec["certificate"]["witnesses"].as_array().unwrap();
    let mut ells: Vec<i64> = witnesses.iter().map(|w| w["ell"].as_i64().unwrap()).collect();
    ells.sort_unstable();
    assert_eq!(ells, vec![-1, 1]);
}

#[test]
fn output_is_deterministic_across_runs() {
    let args = ["certify", "--c", "0.75", "--branch", "minus"];
    let a = stdout(&run(&args));
    let b = stdout(&run(&args));
    assert_eq!(a, b);
}

#[test]
fn config_file_drives_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "[problem]\nbranch = \"tilde_plus\"\nc_values = [1.5]\n\n[params]\ndelta3 = 0.1\n",
    )
    .unwrap();
    let text = stdout(&run(&["coeffs", "--config", cfg.to_str().unwrap()]));
    let rows = csv_rows(
        &text,
        "c,j,re,im,quad_error,closed_form_re,closed_form_im",
    );
    assert!(rows.iter().all(|r| r[0] == 1.5));
    let j0 = rows.iter().find(|r| r[1] == 0.0).unwrap();
    assert!(j0[2].abs() > 1e-3, "damping makes the constant term nonzero");
}

#[test]
fn simulate_conserves_integrals_without_forcing() {
    let text = stdout(&run(&["simulate", "--eps", "0", "--t-end", "40"]));
    let rows = csv_rows(&text, "t,w1,w2,w3,F1,F2");
    let (f1, f2) = (rows[0][4], rows[0][5]);
    for r in &rows {
        assert!((r[4] - f1).abs() <= 1e-8 && (r[5] - f2).abs() <= 1e-8);
    }
    // the default start lies on the connecting orbit, which tends to (0, 1, 0)
    let last = rows.last().unwrap();
    let dist = (last[1].powi(2) + (last[2] - 1.0).powi(2) + last[3].powi(2)).sqrt();
    assert!(dist <= 1e-5, "endpoint distance {dist:e}");
}

#[test]
fn simulate_poincare_emits_stroboscopic_samples() {
    let text = stdout(&run(&["simulate", "--poincare", "--eps", "0.05", "--t-end", "30"]));
    let rows = csv_rows(&text, "sample_index,w1,w2,w3");
    // 30 / (2 pi) covers samples k = 0..=4
    assert_eq!(rows.len(), 5);
    for (k, r) in rows.iter().enumerate() {
        assert_eq!(r[0], k as f64);
    }
}

#[test]
fn autonomize_check_residuals_are_tiny() {
    let text = stdout(&run(&["autonomize-check", "--eps", "0.05", "--t-end", "10"]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v["max_uv_deviation"].as_f64().unwrap() < 1e-8);
    assert!(v["max_x_deviation"].as_f64().unwrap() < 1e-8);
    assert!(v["variable_change_residual"].as_f64().unwrap() < 1e-12);
    assert!(v["complex_rotation_deviation"].as_f64().unwrap() < 1e-8);
}

#[test]
fn configuration_errors_exit_with_code_two() {
    let cases: Vec<Vec<&str>> = vec![
        vec!["certify", "--branch", "sideways"],
        vec!["certify", "--c", "100.0"],
        vec!["simulate", "--eps", "-0.1"],
        vec!["certify", "--config", "/nonexistent/run.toml"],
    ];
    for args in cases {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "args {args:?}");
    }
}

#[test]
fn unknown_problem_name_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[problem]\nname = \"pendulum\"\n").unwrap();
    let out = run(&["certify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(Path::new(env!("CARGO_BIN_EXE_melnikov-cert")).exists());
}
