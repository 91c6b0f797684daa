use std::path::{Path, PathBuf};

use churnlab_core::evaluation::{cross_validate, row_keys, stratified_folds_keyed, CvOptions};
use churnlab_core::experiment::{run_experiment, ExperimentConfig, RunOptions};
use churnlab_core::ingest::{class_balance, ingest, stratified_subsample, write_dataset_csv, IngestOptions};
use churnlab_core::report::{emit_report, stats_from_csv, write_results_csv};
use churnlab_core::seed::CellKey;
use churnlab_core::stats::{friedman, ResultMatrix};
use churnlab_core::transforms::{TransformConfig, TransformKind};
use churnlab_core::{ClassifierKind, Dataset, Error, HyperParams};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn small_dataset() -> Dataset {
    let (d, _) = ingest(data("churn_3333.csv"), &IngestOptions::new("churn")).unwrap();
    stratified_subsample(&d, 300, 11)
}

#[test]
fn reingesting_exported_data_is_a_fixed_point() {
    let opts = IngestOptions::new("churn");
    let (first, _) = ingest(data("churn_3333.csv"), &opts).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    write_dataset_csv(&first, "churn", &path).unwrap();
    let (second, _) = ingest(&path, &opts).unwrap();
    assert_eq!(first.features, second.features);
    assert_eq!(first.feature_names, second.feature_names);
    assert_eq!(first.labels, second.labels);
}

#[test]
fn bundled_datasets_have_expected_shape() {
    let opts = IngestOptions::new("churn");
    let (d3, _) = ingest(data("churn_3333.csv"), &opts).unwrap();
    assert_eq!(d3.n_rows(), 3333);
    let (churn, stay) = class_balance(&d3);
    assert_eq!(d3.labels.iter().filter(|l| **l == 1).count(), 483);
    assert!((churn + stay - 1.0).abs() <= 1e-12);
    let (d2, _) = ingest(data("churn_5000.csv"), &opts).unwrap();
    assert_eq!(d2.n_rows(), 5000);
    assert!(d2.features.is_finite());
}

#[test]
fn fold_metrics_do_not_depend_on_row_order() {
    let d = small_dataset();
    let order: Vec<usize> = (0..d.n_rows()).rev().collect();
    let shuffled = Dataset::new(
        d.features.select_rows(&order),
        d.feature_names.clone(),
        order.iter().map(|&i| d.labels[i]).collect(),
    )
    .unwrap();
    let key = CellKey {
        master_seed: 3,
        dataset: "d",
        transform: "WOE",
        classifier: "NB",
        fold: 0,
        grid_point: 0,
    };
    let run = |ds: &Dataset| {
        let plan = stratified_folds_keyed(&ds.labels, &row_keys(ds), 5, 99).unwrap();
        cross_validate(
            ds,
            TransformKind::Woe,
            &TransformConfig::default(),
            &CvOptions::default(),
            ClassifierKind::Nb,
            &HyperParams::new(),
            &plan,
            &key,
        )
        .unwrap()
    };
    let a = run(&d);
    let b = run(&shuffled);
    let mut fa = a.folds.clone();
    let mut fb = b.folds.clone();
    let by_f = |x: &churnlab_core::MetricSet, y: &churnlab_core::MetricSet| x.f_measure.total_cmp(&y.f_measure);
    fa.sort_by(by_f);
    fb.sort_by(by_f);
    for (x, y) in fa.iter().zip(&fb) {
        assert!((x.f_measure - y.f_measure).abs() <= 1e-12);
        assert!((x.auc - y.auc).abs() <= 1e-12);
    }
}

#[test]
fn transposed_fixture_is_a_different_problem() {
    let fixture = data("fmeasure_24x7.csv");
    let m = ResultMatrix::load(&fixture).unwrap();
    let k = m.n_treatments();
    let cols: Vec<Vec<f64>> = (0..k).map(|j| m.values.iter().map(|r| r[j]).collect()).collect();
    let t = ResultMatrix::new(cols, m.treatment_labels.clone(), m.block_labels.clone()).unwrap();
    let a = friedman(&m, 0.05);
    let b = friedman(&t, 0.05);
    assert_eq!((a.n_blocks, a.avg_ranks.len()), (24, 7));
    assert_eq!((b.n_blocks, b.avg_ranks.len()), (7, 24));
    assert_ne!(b.avg_ranks.iter().position(|r| *r == 2.4167), Some(6));
    assert_ne!(a.statistic, b.statistic);
}

#[test]
fn two_treatment_csv_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    std::fs::write(&path, "block,A,B\nx,0.1,0.2\ny,0.3,0.1\n").unwrap();
    let err = stats_from_csv(&path, &[0.05]).unwrap_err();
    assert!(matches!(&err, Error::Domain(m) if m.contains("at least 3")), "{err:?}");
}

fn mini_config(transforms: &[&str], classifiers: &[&str], out: &Path) -> (ExperimentConfig, Vec<u8>) {
    let text = serde_json::json!({
        "datasets": [{
            "name": "mini",
            "path": data("churn_3333.csv"),
            "label_column": "churn",
            "top_k": 8,
            "subsample": 400
        }],
        "transforms": transforms,
        "classifiers": classifiers.iter().map(|c| serde_json::json!({
            "kind": c,
            "grid": [{"name": if *c == "KNN" { "k" } else { "var_smoothing" }, "values": if *c == "KNN" { vec![3.0, 7.0] } else { vec![1e-9] }}]
        })).collect::<Vec<_>>(),
        "folds": 5,
        "master_seed": 42,
        "output_dir": out
    })
    .to_string();
    (ExperimentConfig::from_json(&text, Path::new(".")).unwrap(), text.into_bytes())
}

#[test]
fn results_csv_replays_to_the_inline_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, bytes) = mini_config(&["RAW", "Z_SCORE", "WOE", "RANK"], &["NB", "KNN"], dir.path());
    let report = run_experiment(&cfg, &bytes, &RunOptions { workers: Some(1) }).unwrap();
    assert_eq!(report.rows.len(), 8);
    let inline = report.friedman.clone().expect("statistics ran");
    let out = dir.path().join("artifacts");
    emit_report(&report, &out, false).unwrap();
    let (replayed, holm) = stats_from_csv(out.join("results.csv"), &cfg.alphas).unwrap();
    assert_eq!(replayed.avg_ranks, inline.avg_ranks);
    assert_eq!(replayed.statistic, inline.statistic);
    assert_eq!(Some(holm), report.holm);
    for name in ["friedman.json", "holm.json", "heatmap.csv", "heatmap.svg", "report.json", "fmeasure_matrix.csv"] {
        assert!(out.join(name).is_file(), "{name} missing");
    }
}

#[test]
fn identical_runs_differ_only_in_timestamps() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, bytes) = mini_config(&["RAW", "WOE", "LOG"], &["NB"], dir.path());
    let run = || {
        let mut r = run_experiment(&cfg, &bytes, &RunOptions::default()).unwrap();
        r.provenance.started_unix = 0;
        r.provenance.finished_unix = 0;
        let mut csv = Vec::new();
        write_results_csv(&r.rows, &mut csv).unwrap();
        (serde_json::to_string(&r).unwrap(), csv)
    };
    assert_eq!(run(), run());
}

#[test]
fn two_transforms_skip_statistics_with_a_notice() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, bytes) = mini_config(&["RAW", "WOE"], &["NB"], dir.path());
    let report = run_experiment(&cfg, &bytes, &RunOptions::default()).unwrap();
    assert_eq!(report.rows.len(), 2);
    assert!(report.friedman.is_none());
    assert!(!report.notices.is_empty());
}
