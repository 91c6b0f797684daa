use std::hint::black_box;

use churnlab_bench::synthetic;
use churnlab_core::evaluation::stratified_folds;
use churnlab_core::feature_select::score_features;
use churnlab_core::stats::{friedman, holm_vs_best, ResultMatrix};
use churnlab_core::transforms::{self, TransformConfig, TransformKind};
use churnlab_core::{predict, train, ClassifierKind, HyperParams};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn transforms_fit_apply(c: &mut Criterion) {
    let (x, y) = synthetic(3000, 15, 1);
    let cfg = TransformConfig::default();
    let mut g = c.benchmark_group("transform");
    for kind in TransformKind::ALL {
        g.bench_with_input(BenchmarkId::from_parameter(kind), &kind, |b, &kind| {
            b.iter(|| {
                let fitted = transforms::fit(kind, &x, &y, &cfg).unwrap();
                black_box(fitted.apply(&x).unwrap())
            })
        });
    }
    g.finish();
}

fn selection_and_folds(c: &mut Criterion) {
    let (x, y) = synthetic(3000, 15, 2);
    c.bench_function("anova_scores", |b| b.iter(|| black_box(score_features(&x, &y).unwrap())));
    c.bench_function("stratified_folds", |b| b.iter(|| black_box(stratified_folds(&y, 10, 7).unwrap())));
}

fn classifiers(c: &mut Criterion) {
    let (x, y) = synthetic(1000, 10, 3);
    let mut g = c.benchmark_group("train_predict");
    g.sample_size(10);
    for kind in ClassifierKind::ALL {
        let hp = match kind {
            ClassifierKind::Fnn | ClassifierKind::Rnn => HyperParams::new().with("epochs", 5.0),
            ClassifierKind::Rf => HyperParams::new().with("n_trees", 20.0),
            ClassifierKind::Gb => HyperParams::new().with("n_rounds", 20.0),
            _ => HyperParams::new(),
        };
        g.bench_with_input(BenchmarkId::from_parameter(kind), &kind, |b, &kind| {
            b.iter(|| {
                let model = train(kind, &x, &y, &hp, 11).unwrap();
                black_box(predict(&model, &x).unwrap())
            })
        });
    }
    g.finish();
}

fn statistics(c: &mut Criterion) {
    let (x, _) = synthetic(24, 7, 4);
    let values: Vec<Vec<f64>> = x.iter_rows().map(<[f64]>::to_vec).collect();
    let m = ResultMatrix::new(
        values,
        (0..24).map(|i| format!("b{i}")).collect(),
        (0..7).map(|j| format!("t{j}")).collect(),
    )
    .unwrap();
    c.bench_function("friedman_holm_24x7", |b| {
        b.iter(|| {
            let f = friedman(&m, 0.05);
            black_box(holm_vs_best(&f, &[0.05, 0.10]).unwrap())
        })
    });
}

criterion_group!(benches, transforms_fit_apply, selection_and_folds, classifiers, statistics);
criterion_main!(benches);
