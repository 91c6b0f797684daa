//! Confusion-matrix metrics and the stratified cross-validation harness.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifiers::{self, ClassifierKind, HyperParams};
use crate::error::{Error, Result};
use crate::feature_select::{score_features, select_top_k};
use crate::ingest::Dataset;
use crate::matrix::Matrix;
use crate::seed::{splitmix64, CellKey, StableHasher};
use crate::transforms::{self, FitScope, TransformConfig, TransformKind};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub precision: f64,
    /// Probability of detection.
    pub recall: f64,
    /// Probability of false alarm.
    pub pof: f64,
    pub auc: f64,
    pub f_measure: f64,
}

impl MetricSet {
    /// Unweighted mean, summed in the given order.
    pub fn mean(sets: &[MetricSet]) -> MetricSet {
        let n = sets.len() as f64;
        let avg = |f: fn(&MetricSet) -> f64| sets.iter().map(f).sum::<f64>() / n;
        MetricSet {
            precision: avg(|m| m.precision),
            recall: avg(|m| m.recall),
            pof: avg(|m| m.pof),
            auc: avg(|m| m.auc),
            f_measure: avg(|m| m.f_measure),
        }
    }
}

pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Dimension {
            expected: y_true.len(),
            got: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::Domain(
            "confusion matrix needs at least one sample".into(),
        ));
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t != 0, p != 0) {
            (true, true) => cm.tp += 1,
            (false, false) => cm.tn += 1,
            (false, true) => cm.fp += 1,
            (true, false) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn metrics(cm: &ConfusionMatrix) -> MetricSet {
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    let pof = ratio(cm.fp, cm.fp + cm.tn);
    let auc = (1.0 + recall - pof) / 2.0;
    let f_measure = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    MetricSet {
        precision,
        recall,
        pof,
        auc,
        f_measure,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    /// Fold index of every row.
    pub assignment: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == fold)
            .collect()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] != fold)
            .collect()
    }
}

fn check_fold_inputs(y: &[u8], k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::Config(format!(
            "fold count must be at least 2, got {k}"
        )));
    }
    for class in [0u8, 1] {
        let n = y.iter().filter(|&&v| v == class).count();
        if n < k {
            return Err(Error::Domain(format!(
                "class {class} has {n} rows, fewer than {k} folds"
            )));
        }
    }
    Ok(())
}

/// Deals each class's rows round-robin over the folds, in `order`. The dealer
/// carries on from where the previous class stopped so fold sizes stay even.
fn deal(y: &[u8], k: usize, seed: u64, order: impl Fn(&mut Vec<usize>, u8)) -> FoldPlan {
    let mut assignment = vec![0; y.len()];
    let mut next = 0;
    for class in [1u8, 0] {
        let mut rows: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        order(&mut rows, class);
        for i in rows {
            assignment[i] = next % k;
            next += 1;
        }
    }
    FoldPlan {
        k,
        assignment,
        seed,
    }
}

/// Stratified folds from a seeded shuffle of each class.
pub fn stratified_folds(y: &[u8], k: usize, seed: u64) -> Result<FoldPlan> {
    check_fold_inputs(y, k)?;
    Ok(deal(y, k, seed, |rows, class| {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ u64::from(class)));
        rows.shuffle(&mut rng);
    }))
}

/// Content hash of each row, used to order rows independently of file order.
pub fn row_keys(dataset: &Dataset) -> Vec<u64> {
    (0..dataset.n_rows())
        .map(|i| {
            let h = dataset
                .features
                .row(i)
                .iter()
                .fold(StableHasher::new(), |h, &v| h.f64(v));
            h.u64(u64::from(dataset.labels[i])).finish()
        })
        .collect()
}

/// Stratified folds whose assignment follows row content rather than row
/// position: permuting the input rows permutes the assignment with them.
pub fn stratified_folds_keyed(y: &[u8], keys: &[u64], k: usize, seed: u64) -> Result<FoldPlan> {
    check_fold_inputs(y, k)?;
    if keys.len() != y.len() {
        return Err(Error::Dimension {
            expected: y.len(),
            got: keys.len(),
        });
    }
    Ok(deal(y, k, seed, |rows, _| {
        rows.sort_by_key(|&i| (splitmix64(keys[i] ^ seed), keys[i], i));
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvOptions {
    /// Keep this many top-scoring features; `None` keeps all.
    pub top_k: Option<usize>,
    /// Whether the untransformed baseline also goes through feature selection.
    pub select_raw: bool,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            top_k: None,
            select_raw: false,
        }
    }
}

/// One fold's transformed and feature-selected train/test data.
#[derive(Debug, Clone)]
pub struct PreparedFold {
    pub train_x: Matrix,
    pub train_y: Vec<u8>,
    pub test_x: Matrix,
    pub test_y: Vec<u8>,
    pub selected: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct PreparedFolds {
    pub transform: TransformKind,
    pub folds: Vec<PreparedFold>,
}

fn selection(kind: TransformKind, x: &Matrix, y: &[u8], options: &CvOptions) -> Result<Vec<usize>> {
    let d = x.cols();
    match options.top_k {
        Some(k) if k < d && (kind != TransformKind::Raw || options.select_raw) => {
            select_top_k(&score_features(x, y)?, k)
        }
        _ => Ok((0..d).collect()),
    }
}

/// Fits transforms and feature selection once per fold so that several
/// classifiers and grid points can share them.
pub fn prepare_folds(
    dataset: &Dataset,
    kind: TransformKind,
    config: &TransformConfig,
    options: &CvOptions,
    plan: &FoldPlan,
) -> Result<PreparedFolds> {
    if plan.assignment.len() != dataset.n_rows() {
        return Err(Error::Dimension {
            expected: dataset.n_rows(),
            got: plan.assignment.len(),
        });
    }
    let global = match config.fit_scope {
        FitScope::Global => {
            let fitted = transforms::fit(kind, &dataset.features, &dataset.labels, config)?;
            let all = fitted.apply(&dataset.features)?;
            let selected = selection(kind, &all, &dataset.labels, options)?;
            Some((all.select_columns(&selected), selected))
        }
        FitScope::TrainFold => None,
    };
    let prepare = |f: usize| -> Result<PreparedFold> {
        let train = plan.train_rows(f);
        let test = plan.test_rows(f);
        let train_y: Vec<u8> = train.iter().map(|&i| dataset.labels[i]).collect();
        let test_y: Vec<u8> = test.iter().map(|&i| dataset.labels[i]).collect();
        let (train_x, test_x, selected) = match &global {
            Some((all, selected)) => (
                all.select_rows(&train),
                all.select_rows(&test),
                selected.clone(),
            ),
            None => {
                let raw_train = dataset.features.select_rows(&train);
                let fitted = transforms::fit(kind, &raw_train, &train_y, config)?;
                let tr = fitted.apply(&raw_train)?;
                let te = fitted.apply(&dataset.features.select_rows(&test))?;
                let selected = selection(kind, &tr, &train_y, options)?;
                (
                    tr.select_columns(&selected),
                    te.select_columns(&selected),
                    selected,
                )
            }
        };
        Ok(PreparedFold {
            train_x,
            train_y,
            test_x,
            test_y,
            selected,
        })
    };
    let folds = (0..plan.k)
        .map(|f| prepare(f).map_err(|e| e.in_fold(f)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PreparedFolds {
        transform: kind,
        folds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub mean: MetricSet,
    pub folds: Vec<MetricSet>,
}

/// Trains and scores one classifier on every prepared fold. Fold seeds come
/// from `key` with its fold index replaced.
pub fn evaluate_prepared(
    prepared: &PreparedFolds,
    kind: ClassifierKind,
    hp: &HyperParams,
    key: &CellKey<'_>,
) -> Result<CvResult> {
    let folds = prepared
        .folds
        .iter()
        .enumerate()
        .map(|(f, fold)| {
            let seed = CellKey { fold: f, ..*key }.seed();
            let run = || -> Result<MetricSet> {
                let model = classifiers::train(kind, &fold.train_x, &fold.train_y, hp, seed)?;
                let pred: Vec<u8> = classifiers::predict(&model, &fold.test_x)?
                    .iter()
                    .map(|p| p.label)
                    .collect();
                Ok(metrics(&confusion(&fold.test_y, &pred)?))
            };
            run().map_err(|e| e.in_fold(f))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CvResult {
        mean: MetricSet::mean(&folds),
        folds,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn cross_validate(
    dataset: &Dataset,
    transform: TransformKind,
    config: &TransformConfig,
    options: &CvOptions,
    classifier: ClassifierKind,
    hp: &HyperParams,
    plan: &FoldPlan,
    key: &CellKey<'_>,
) -> Result<CvResult> {
    let prepared = prepare_folds(dataset, transform, config, options, plan)?;
    evaluate_prepared(&prepared, classifier, hp, key)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cm(tp: u64, tn: u64, fp: u64, fn_: u64) -> ConfusionMatrix {
        ConfusionMatrix { tp, tn, fp, fn_ }
    }

    #[test]
    fn confusion_examples() {
        assert_eq!(confusion(&[1, 1, 0], &[1, 1, 0]).unwrap(), cm(2, 1, 0, 0));
        assert_eq!(confusion(&[1, 0], &[0, 1]).unwrap(), cm(0, 0, 1, 1));
        let t = [1, 1, 0, 0, 1, 0, 0, 0, 1, 0];
        let p = [1, 1, 1, 0, 0, 0, 0, 0, 1, 0];
        assert_eq!(confusion(&t, &p).unwrap(), cm(3, 5, 1, 1));
        assert!(confusion(&[1], &[1, 0]).is_err());
    }

    #[test]
    fn metric_examples() {
        let m = metrics(&cm(3, 5, 1, 1));
        assert_eq!(m.precision, 0.75);
        assert_eq!(m.recall, 0.75);
        assert!((m.pof - 1.0 / 6.0).abs() < 1e-15);
        assert!((m.auc - 0.791_666_666_666_666_6).abs() < 1e-12);
        assert_eq!(m.f_measure, 0.75);

        let m = metrics(&cm(4, 6, 0, 0));
        assert_eq!(
            (m.precision, m.recall, m.f_measure, m.pof, m.auc),
            (1.0, 1.0, 1.0, 0.0, 1.0)
        );

        let m = metrics(&cm(0, 5, 0, 0));
        assert_eq!((m.precision, m.recall, m.f_measure), (0.0, 0.0, 0.0));
    }

    #[test]
    fn divisible_stratification_is_exact() {
        let y: Vec<u8> = (0..100).map(|i| u8::from(i % 10 == 3)).collect();
        let plan = stratified_folds(&y, 10, 7).unwrap();
        assert_eq!(plan, stratified_folds(&y, 10, 7).unwrap());
        for f in 0..10 {
            let rows = plan.test_rows(f);
            assert_eq!(rows.len(), 10);
            assert_eq!(rows.iter().filter(|&&i| y[i] == 1).count(), 1);
        }
    }

    #[test]
    fn two_folds_of_four() {
        let y = [1, 0, 1, 0];
        for seed in 0..20 {
            let plan = stratified_folds(&y, 2, seed).unwrap();
            for f in 0..2 {
                let mut labels: Vec<u8> = plan.test_rows(f).iter().map(|&i| y[i]).collect();
                labels.sort();
                assert_eq!(labels, vec![0, 1]);
            }
        }
    }

    #[test]
    fn small_class_is_rejected() {
        assert!(stratified_folds(&[1, 0, 0, 0], 2, 0).is_err());
        assert!(stratified_folds(&[1, 0], 1, 0).is_err());
    }

    #[test]
    fn keyed_folds_follow_rows() {
        let y: Vec<u8> = (0..30).map(|i| u8::from(i % 3 == 0)).collect();
        let keys: Vec<u64> = (0..30).map(|i| splitmix64(i as u64)).collect();
        let plan = stratified_folds_keyed(&y, &keys, 5, 11).unwrap();
        let perm: Vec<usize> = (0..30).rev().collect();
        let py: Vec<u8> = perm.iter().map(|&i| y[i]).collect();
        let pk: Vec<u64> = perm.iter().map(|&i| keys[i]).collect();
        let pplan = stratified_folds_keyed(&py, &pk, 5, 11).unwrap();
        for (j, &i) in perm.iter().enumerate() {
            assert_eq!(pplan.assignment[j], plan.assignment[i]);
        }
    }

    #[test]
    fn constant_features_predict_majority() {
        let n = 40;
        let y: Vec<u8> = (0..n).map(|i| u8::from(i % 4 == 0)).collect();
        let ds = Dataset::new(
            Matrix::from_vec(n, 2, vec![1.0; 2 * n]).unwrap(),
            vec!["a".into(), "b".into()],
            y.clone(),
        )
        .unwrap();
        let plan = stratified_folds(&y, 5, 1).unwrap();
        let key = CellKey {
            master_seed: 1,
            dataset: "d",
            transform: "RAW",
            classifier: "DTREE",
            fold: 0,
            grid_point: 0,
        };
        let r = cross_validate(
            &ds,
            TransformKind::Raw,
            &TransformConfig::default(),
            &CvOptions::default(),
            ClassifierKind::Dtree,
            &HyperParams::new(),
            &plan,
            &key,
        )
        .unwrap();
        assert_eq!((r.mean.recall, r.mean.pof, r.mean.auc), (0.0, 0.0, 0.5));
        let mean_f = r.folds.iter().map(|m| m.f_measure).sum::<f64>() / r.folds.len() as f64;
        assert!((mean_f - r.mean.f_measure).abs() < 1e-12);
    }
}
