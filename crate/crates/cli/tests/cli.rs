use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pt_anneal::sweep_io::SweepJob;

fn anneal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anneal")).args(args).output().expect("binary runs")
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn every_shipped_config_parses_and_validates() {
    let mut names = Vec::new();
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let text = std::fs::read_to_string(&path).unwrap();
            let job = SweepJob::from_json(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            job.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            names.push(path.file_stem().unwrap().to_string_lossy().into_owned());
        }
    }
    for fig in ["fig2a", "fig2h", "fig3a", "fig3c", "fig4a", "fig4b", "fig5", "fig6a", "fig6b", "fig7a", "fig7b", "fig8a", "fig8b"] {
        assert!(names.iter().any(|n| n == fig), "missing config {fig}");
    }
}

#[test]
fn unknown_config_key_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"target": "qaa", "fixed": {"gama": 0.1, "k": 0.01}}"#).unwrap();
    let out = anneal(&["anneal", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gama"));
}

#[test]
fn mismatched_subcommand_and_bad_grid_exit_with_one() {
    let cfg = configs_dir().join("fig2a.json");
    assert_eq!(anneal(&["lzs", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(anneal(&["lzs", "--k", "0.01", "--grid", "gamma:0.2:0.1:3"]).status.code(), Some(1));
    assert_eq!(anneal(&["lzs", "--k", "0.01", "--grid", "tau:0:1:3"]).status.code(), Some(1));
    assert_eq!(anneal(&["sweep"]).status.code(), Some(1));
}

#[test]
fn writes_csv_sidecar_and_heatmap() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("grid");
    let out = anneal(&[
        "lzs",
        "--epsilon",
        "0",
        "--grid",
        "gamma:0:0.2:3",
        "--grid",
        "k:0.001:0.05:4:log",
        "--out",
        stem.to_str().unwrap(),
        "--format",
        "csv+svg",
        "--jobs",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    assert_eq!(csv.lines().count(), 13);
    assert!(csv.starts_with("gamma,k,exponent,p_ground"));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("grid.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["rows"], 12);
    assert_eq!(meta["job"]["target"], "lzs");
    let svg = std::fs::read_to_string(dir.path().join("grid.svg")).unwrap();
    assert_eq!(svg.matches(r#"class="cell""#).count(), 12);
}

#[test]
fn grid_flag_replaces_config_axis() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("f2");
    let cfg = configs_dir().join("fig2b.json");
    let out = anneal(&["spectrum", "--config", cfg.to_str().unwrap(), "--grid", "s:0:1:11", "--out", stem.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("f2.csv")).unwrap();
    assert_eq!(csv.lines().count(), 12);
}

#[test]
fn numerical_failure_in_a_row_exits_with_two() {
    // Beyond epsilon = 1 there is no level crossing, so the effective model is undefined.
    let out = anneal(&["lzs", "--k", "0.01", "--gamma", "0.1", "--grid", "epsilon:0.5:1.5:3"]);
    assert_eq!(out.status.code(), Some(2));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().count(), 4);
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("fig2f.json");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(anneal(&["sweep", "--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap(), "--jobs", "1"]).status.success());
    assert!(anneal(&["sweep", "--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap(), "--jobs", "3"]).status.success());
    assert_eq!(std::fs::read(dir.path().join("a.csv")).unwrap(), std::fs::read(dir.path().join("b.csv")).unwrap());
}
