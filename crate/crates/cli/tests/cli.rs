use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn churnlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_churnlab"))
        .args(args)
        .env_remove("CHURNLAB_WORKERS")
        .output()
        .expect("binary runs")
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn help_exits_zero_and_bad_usage_exits_one() {
    assert_eq!(churnlab(&["--help"]).status.code(), Some(0));
    assert_eq!(churnlab(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(churnlab(&["run"]).status.code(), Some(1), "run without --config");
}

#[test]
fn stats_on_the_fixture_prints_ranks() {
    let fixture = root().join("data/fmeasure_24x7.csv");
    let out = churnlab(&["stats", "--input", path_str(&fixture)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["friedman"]["avg_ranks"].as_array().unwrap().len(), 7);
    assert_eq!(v["friedman"]["n_blocks"], 24);
    assert_eq!(v["holm"]["best"], "WOE");
    assert_eq!(v["holm"]["comparisons"].as_array().unwrap().len(), 6);
}

#[test]
fn malformed_matrix_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.csv");
    std::fs::write(&m, "block,A,B\nx,0.1,0.2\ny,0.3,0.1\n").unwrap();
    assert_eq!(churnlab(&["stats", "--input", path_str(&m)]).status.code(), Some(2));
    std::fs::write(&m, "block,A,B,C\nx,0.1,0.2\n").unwrap();
    assert_eq!(churnlab(&["stats", "--input", path_str(&m)]).status.code(), Some(2));
}

#[test]
fn ingest_and_transform_write_their_files() {
    let dir = tempfile::tempdir().unwrap();
    let data = root().join("data/churn_3333.csv");
    let ing = dir.path().join("ingest");
    let out = churnlab(&["ingest", "--input", path_str(&data), "--output", path_str(&ing)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(ing.join("dataset.csv").is_file() && ing.join("schema.json").is_file());
    assert!(stdout(&out).starts_with("3333 rows"));

    let tr = dir.path().join("woe");
    let out = churnlab(&["transform", "--input", path_str(&data), "--method", "WOE", "--output", path_str(&tr)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let fitted = std::fs::read_to_string(tr.join("transform.json")).unwrap();
    assert!(fitted.contains("\"kind\""));
}

#[test]
fn missing_label_column_is_a_config_error() {
    let data = root().join("data/churn_3333.csv");
    let out = churnlab(&["select", "--input", path_str(&data), "--label", "nope"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn minimal_run_reports_two_cells_and_refuses_to_overwrite() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let config = serde_json::json!({
        "datasets": [{
            "name": "dataset-3",
            "path": root().join("data/churn_3333.csv"),
            "label_column": "churn",
            "top_k": 15
        }],
        "transforms": ["RAW", "WOE"],
        "classifiers": ["LR"],
        "folds": 10,
        "master_seed": 1
    });
    std::fs::write(&cfg, config.to_string()).unwrap();
    let out_dir = dir.path().join("out");
    let args = ["--config", path_str(&cfg), "--output", path_str(&out_dir), "--subsample", "600", "run"];

    let first = churnlab(&args);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    assert!(String::from_utf8_lossy(&first.stderr).contains("notice:"));
    let results = std::fs::read_to_string(out_dir.join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), 3, "{results}");
    assert!(!out_dir.join("friedman.json").exists());

    assert_eq!(churnlab(&args).status.code(), Some(1));
    let mut forced = args.to_vec();
    forced.insert(0, "--force");
    assert_eq!(churnlab(&forced).status.code(), Some(0));

    let report = out_dir.join("report.json");
    let out = churnlab(&["report", "--input", path_str(&report), "--output", path_str(&dir.path().join("again"))]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(dir.path().join("again/results.csv")).unwrap(), results);
}
