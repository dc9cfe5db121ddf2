mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn eerf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eerf")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

const SMALL_THEORY: &str = r#"
skip = ["recovery", "concentration", "delta_limit", "selection"]

[orthogonality]
families = ["gaussian"]
pairs = 5
draws = 20000
min_passing = 4

[linear]
n = 20000
"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&eerf(&[])), 1);
    assert_eq!(code(&eerf(&["frobnicate"])), 1);
    assert_eq!(code(&eerf(&["run"])), 1);
    assert_eq!(code(&eerf(&["run", "--config", "/nonexistent/cfg.toml"])), 1);
    assert_eq!(code(&eerf(&["plot"])), 1);
    assert_eq!(code(&eerf(&["--help"])), 0);
}

#[test]
fn small_theory_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "theory.toml", SMALL_THEORY);
    let out_dir = dir.path().join("report");
    let out = eerf(&["theory", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("orthogonality"));
    assert!(stdout.contains("linear"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("theory_report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert!(out_dir.join("theory_summary.csv").exists());
}

#[test]
fn injected_fault_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "theory.toml", &format!("fault_injection = true\n{SMALL_THEORY}"));
    let out_dir = dir.path().join("report");
    let out = eerf(&["theory", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn bad_theory_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "theory.toml", "skip = [\"nonsense\"]\n");
    assert_eq!(code(&eerf(&["theory", "--config", &cfg, "--out", dir.path().to_str().unwrap()])), 1);
}

#[test]
fn run_score_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "exp.toml",
        &common::synthetic_toml(&dir.path().join("ignored"), &[1, 2], &[4, 8], "{ multiplier = 5 }"),
    );
    let res = dir.path().join("res");
    let res_s = res.to_str().unwrap();
    let out = eerf(&["run", "--config", &cfg, "--out", res_s, "--threads", "2", "--seed", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 4);
    for f in ["results.csv", "timings.csv", "summary.csv", "error_vs_m.svg", "config.toml"] {
        assert!(res.join(f).exists(), "{f}");
    }
    assert!(fs::read_to_string(res.join("config.toml")).unwrap().contains("master_seed = 3"));
    assert!(!dir.path().join("ignored").exists());

    fs::remove_file(res.join("error_vs_m.svg")).unwrap();
    assert_eq!(code(&eerf(&["plot", "--out", res_s])), 0);
    assert!(res.join("error_vs_m.svg").exists());

    let scores = dir.path().join("scores");
    let out = eerf(&["score", "--config", &cfg, "--out", scores.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(scores.join("scores.json").exists());
    assert!(scores.join("features.json").exists());
}

#[test]
fn failed_cells_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let text = common::synthetic_toml(&dir.path().join("res"), &[1], &[4], "{ multiplier = 2 }")
        .replacen("name = \"small\"", "name = \"small\"\nloss = \"logistic\"", 1);
    let cfg = write(dir.path(), "exp.toml", &text);
    let out = eerf(&["run", "--config", &cfg]);
    assert_eq!(code(&out), 2);
    assert!(dir.path().join("res").join("results.csv").exists());
}
