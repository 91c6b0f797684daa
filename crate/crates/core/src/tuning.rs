//! Exhaustive grid search scored by cross-validation.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{ClassifierKind, HyperParams, ParamValue};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate_prepared, prepare_folds, CvOptions, CvResult, FoldPlan, MetricSet, PreparedFolds};
use crate::ingest::Dataset;
use crate::seed::CellKey;
use crate::transforms::{TransformConfig, TransformKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxis {
    pub name: String,
    pub values: Vec<ParamValue>,
}

/// Ordered hyperparameter axes. Points iterate lexicographically: the first
/// axis varies slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Grid {
    axes: Vec<GridAxis>,
}

impl Grid {
    pub fn new(kind: ClassifierKind, axes: Vec<(&str, Vec<ParamValue>)>) -> Result<Self> {
        Grid::from_axes(
            kind,
            axes.into_iter()
                .map(|(n, v)| GridAxis {
                    name: n.to_string(),
                    values: v,
                })
                .collect(),
        )
    }

    pub fn from_axes(kind: ClassifierKind, axes: Vec<GridAxis>) -> Result<Self> {
        let grid = Grid { axes };
        grid.validate(kind)?;
        Ok(grid)
    }

    pub fn validate(&self, kind: ClassifierKind) -> Result<()> {
        HyperParams::validate_names(kind, self.axes.iter().map(|a| a.name.as_str()))?;
        for (i, a) in self.axes.iter().enumerate() {
            if a.values.is_empty() {
                return Err(Error::Config(format!("grid axis '{}' has no values", a.name)));
            }
            if self.axes[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::Config(format!("grid axis '{}' appears twice", a.name)));
            }
        }
        for p in self.points() {
            p.resolve(kind)?;
        }
        Ok(())
    }

    pub fn axes(&self) -> &[GridAxis] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, mut index: usize) -> HyperParams {
        let mut hp = HyperParams::new();
        for a in self.axes.iter().rev() {
            hp.set(&a.name, a.values[index % a.values.len()]);
            index /= a.values.len();
        }
        hp
    }

    pub fn points(&self) -> Vec<HyperParams> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
}

fn nums(v: &[f64]) -> Vec<ParamValue> {
    v.iter().map(|&x| ParamValue::Num(x)).collect()
}

pub fn default_grid(kind: ClassifierKind) -> Grid {
    use ParamValue::Unlimited;
    let axes = match kind {
        ClassifierKind::Knn => vec![("k", nums(&[3.0, 5.0, 7.0, 11.0, 15.0]))],
        ClassifierKind::Lr => vec![("l2", nums(&[0.0, 0.01, 0.1, 1.0])), ("learning_rate", nums(&[0.01, 0.1]))],
        ClassifierKind::Dtree => vec![
            ("max_depth", [nums(&[3.0, 5.0, 8.0]), vec![Unlimited]].concat()),
            ("min_leaf", nums(&[1.0, 5.0, 20.0])),
        ],
        ClassifierKind::Rf => vec![
            ("n_trees", nums(&[50.0, 100.0, 200.0])),
            ("max_depth", [nums(&[5.0, 8.0]), vec![Unlimited]].concat()),
        ],
        ClassifierKind::Gb => vec![
            ("n_rounds", nums(&[50.0, 100.0, 200.0])),
            ("learning_rate", nums(&[0.05, 0.1, 0.3])),
            ("max_depth", nums(&[2.0, 3.0])),
        ],
        ClassifierKind::Nb => vec![("var_smoothing", nums(&[1e-9, 1e-6]))],
        ClassifierKind::Fnn => vec![
            ("hidden_units", nums(&[16.0, 32.0, 64.0])),
            ("learning_rate", nums(&[0.01, 0.001])),
            ("epochs", nums(&[30.0])),
        ],
        ClassifierKind::Rnn => vec![
            ("hidden_units", nums(&[8.0, 16.0])),
            ("learning_rate", nums(&[0.01, 0.001])),
            ("epochs", nums(&[30.0])),
        ],
    };
    Grid::new(kind, axes).expect("default grids are valid")
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMetric {
    #[default]
    FMeasure,
    Auc,
}

impl SelectionMetric {
    pub fn of(self, m: &MetricSet) -> f64 {
        match self {
            SelectionMetric::FMeasure => m.f_measure,
            SelectionMetric::Auc => m.auc,
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            SelectionMetric::FMeasure => "f_measure",
            SelectionMetric::Auc => "auc",
        }
    }
}

impl fmt::Display for SelectionMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for SelectionMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f_measure" => Ok(SelectionMetric::FMeasure),
            "auc" => Ok(SelectionMetric::Auc),
            _ => Err(Error::Config(format!("unknown selection metric '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningRow {
    pub grid_point: usize,
    pub params: HyperParams,
    pub result: CvResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningFailure {
    pub grid_point: usize,
    pub params: HyperParams,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningResult {
    pub best_point: usize,
    pub best_params: HyperParams,
    pub best_score: f64,
    pub selection_metric: SelectionMetric,
    pub table: Vec<TuningRow>,
    pub failures: Vec<TuningFailure>,
}

impl TuningResult {
    pub fn best(&self) -> &TuningRow {
        self.table.iter().find(|r| r.grid_point == self.best_point).expect("best row present")
    }
}

/// Grid search over already prepared folds. `key` supplies the seed context;
/// its grid point is replaced per point.
pub fn grid_search_prepared(
    kind: ClassifierKind,
    grid: &Grid,
    prepared: &PreparedFolds,
    metric: SelectionMetric,
    key: &CellKey<'_>,
) -> Result<TuningResult> {
    grid.validate(kind)?;
    let outcomes: Vec<(usize, HyperParams, Result<CvResult>)> = (0..grid.len())
        .into_par_iter()
        .map(|g| {
            let hp = grid.point(g);
            let r = evaluate_prepared(prepared, kind, &hp, &CellKey { grid_point: g, ..*key });
            (g, hp, r)
        })
        .collect();

    let mut table = Vec::new();
    let mut failures = Vec::new();
    for (grid_point, params, r) in outcomes {
        match r {
            Ok(result) => table.push(TuningRow {
                grid_point,
                params,
                result,
            }),
            Err(e) => failures.push(TuningFailure {
                grid_point,
                params,
                error: e.to_string(),
            }),
        }
    }
    let mut best: Option<&TuningRow> = None;
    for row in &table {
        if best.is_none_or(|b| metric.of(&row.result.mean) > metric.of(&b.result.mean)) {
            best = Some(row);
        }
    }
    let Some(best) = best else {
        let first = failures.first().map(|f| f.error.clone()).unwrap_or_default();
        return Err(Error::Tuning(format!(
            "all {} grid points of {kind} failed; first error: {first}",
            grid.len()
        )));
    };
    Ok(TuningResult {
        best_point: best.grid_point,
        best_params: best.params.clone(),
        best_score: metric.of(&best.result.mean),
        selection_metric: metric,
        table: table.clone(),
        failures,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn grid_search(
    kind: ClassifierKind,
    grid: &Grid,
    dataset: &Dataset,
    transform: TransformKind,
    config: &TransformConfig,
    options: &CvOptions,
    plan: &FoldPlan,
    metric: SelectionMetric,
    key: &CellKey<'_>,
) -> Result<TuningResult> {
    let prepared = prepare_folds(dataset, transform, config, options, plan)?;
    grid_search_prepared(kind, grid, &prepared, metric, key)
}

/// Tuning table as CSV: one row per evaluated point, failures included with
/// their error text.
pub fn write_tuning_csv(result: &TuningResult, out: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["grid_point", "params", "precision", "recall", "pof", "auc", "f_measure", "selected", "error"])?;
    let mut rows: Vec<(usize, Vec<String>)> = result
        .table
        .iter()
        .map(|r| {
            let m = &r.result.mean;
            (
                r.grid_point,
                vec![
                    r.grid_point.to_string(),
                    r.params.to_string(),
                    m.precision.to_string(),
                    m.recall.to_string(),
                    m.pof.to_string(),
                    m.auc.to_string(),
                    m.f_measure.to_string(),
                    u8::from(r.grid_point == result.best_point).to_string(),
                    String::new(),
                ],
            )
        })
        .collect();
    for f in &result.failures {
        let mut rec = vec![f.grid_point.to_string(), f.params.to_string()];
        rec.extend(std::iter::repeat_n(String::new(), 5));
        rec.push("0".into());
        rec.push(f.error.clone());
        rows.push((f.grid_point, rec));
    }
    rows.sort_by_key(|r| r.0);
    for (_, rec) in rows {
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("tuning table", e))?;
    Ok(())
}
