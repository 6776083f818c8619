use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aoi-intent"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn small_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("small.toml");
    std::fs::write(
        &path,
        r#"
k_folds = 3
methods = ["F-Score"]
models = ["RR-BR", "KNN-CC"]

[grid]
lambda = [0.5, 1.0]
knn_k = [5]
feature_counts = [5, 10]
"#,
    )
    .unwrap();
    path
}

#[test]
fn synth_then_run_writes_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("cohort");
    let out = run(&["synth", "--out", data.to_str().unwrap(), "--users", "6", "--sessions", "2", "--seed", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["gaze.csv", "events.csv", "layout.toml"] {
        assert!(data.join(f).exists(), "{f}");
    }

    let cfg = small_config(tmp.path());
    let reports = tmp.path().join("reports");
    let out = run(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--corpus",
        data.to_str().unwrap(),
        "--seed",
        "1",
        "--out",
        reports.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("best:"));
    for f in ["metrics.csv", "manifest.json", "folds.csv", "mi.csv"] {
        assert!(reports.join(f).exists(), "{f}");
    }
}

#[test]
fn missing_config_file_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["run", "--config", "/nonexistent/cfg.toml", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&out), 3);
}

#[test]
fn single_fold_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["run", "--folds", "1", "--corpus", tmp.path().to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn bad_grid_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "[grid]\nknn_k = []\n").unwrap();
    let out = run(&["run", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn missing_corpus_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["run", "--corpus", tmp.path().to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&out), 3);
}

#[test]
fn malformed_csv_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("gaze.csv"), "not,a,gaze\nfile\n").unwrap();
    std::fs::write(tmp.path().join("events.csv"), "").unwrap();
    let out = run(&["run", "--corpus", tmp.path().to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unwritable_output_exits_5() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let target = blocker.join("cohort");
    let out = run(&["synth", "--out", target.to_str().unwrap(), "--users", "1", "--sessions", "1"]);
    assert_eq!(code(&out), 5, "{}", String::from_utf8_lossy(&out.stderr));
}
