use std::path::Path;
use std::process::{Command, Output};

fn ccorder(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccorder"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn generate(dir: &Path, preset: &str, point: &str) -> (String, String) {
    let x = dir.join("x.csv").display().to_string();
    let y = dir.join("y.csv").display().to_string();
    let out = ccorder(&["generate", "--preset", preset, "--point", point, "--seed", "3", "--x", &x, "--y", &y]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    (x, y)
}

#[test]
fn detect_finds_two_signals() {
    let dir = tempfile::tempdir().unwrap();
    // fig5 point 3: M = 400
    let (x, y) = generate(dir.path(), "fig5", "3");
    for method in ["maxmin-mdl-threshold", "d3"] {
        let out = ccorder(&["detect", "--x", &x, "--y", &y, "--method", method, "--rmax", "8"]);
        assert!(out.status.success());
        assert!(stdout(&out).starts_with("d_hat=2 "), "{method}: {}", stdout(&out));
    }
    let out = ccorder(&["detect", "--x", &x, "--y", &y, "--pfa", "0.001", "--rmax", "8"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("d_hat="));
}

#[test]
fn detect_json_has_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let (x, y) = generate(dir.path(), "fig5", "0");
    let out = ccorder(&["detect", "--x", &x, "--y", &y, "--method", "maxmin-ht", "--rmax", "4", "--json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["diagnostics"].as_array().unwrap().len(), 16);
    assert_eq!(doc["method"], "max_min_ht");

    let out = ccorder(&["detect", "--x", &x, "--y", &y, "--method", "full-aic", "--json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["r_x_star"], 40);
}

#[test]
fn sev_is_refused() {
    let out = ccorder(&["detect", "--x", "a.csv", "--y", "b.csv", "--method", "sev"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not implemented"));
}

#[test]
fn missing_input_is_config_error() {
    let out = ccorder(&["detect", "--x", "/nonexistent/x.csv", "--y", "/nonexistent/y.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/x.csv"));
}

#[test]
fn singular_covariance_is_numerical_failure() {
    // duplicated rows make R_xx singular
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    std::fs::write(&path, "1+1i,2,3\n1+1i,2,3\n").unwrap();
    let p = path.display().to_string();
    let out = ccorder(&["detect", "--x", &p, "--y", &p, "--method", "full-mdl"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn simulate_and_hist_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("fig2.csv");
    let out = ccorder(&[
        "simulate", "--preset", "fig2", "--trials", "3", "--seed", "1", "--threads", "2",
        "--out", report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&report).unwrap();
    assert_eq!(text.lines().count(), 1 + 6);

    let spec = dir.path().join("fig3.json");
    std::fs::write(&spec, stdout(&ccorder(&["preset", "fig3"]))).unwrap();
    let hist = dir.path().join("hist.csv");
    let out = ccorder(&[
        "hist", "--config", spec.to_str().unwrap(), "--rx", "5", "--ry", "5", "--s", "3",
        "--trials", "4", "--out", hist.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("chi2 dof 8"));
    assert_eq!(std::fs::read_to_string(&hist).unwrap().lines().count(), 5);
}

#[test]
fn bad_config_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.json");
    std::fs::write(&spec, r#"{"schema": 7}"#).unwrap();
    let out = ccorder(&["simulate", "--config", spec.to_str().unwrap(), "--out", "/tmp/unused.csv"]);
    assert_eq!(out.status.code(), Some(2));
    let out = ccorder(&["simulate", "--preset", "nope", "--out", "/tmp/unused.csv"]);
    assert_eq!(out.status.code(), Some(2));
    let out = ccorder(&["hist", "--preset", "fig3", "--rx", "5", "--ry", "5", "--s", "5", "--out", "/tmp/unused.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn preset_listing() {
    let out = ccorder(&["preset"]);
    assert!(stdout(&out).lines().any(|l| l == "fig10"));
}
