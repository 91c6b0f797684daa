//! Experiment configuration and the dataset × transform × classifier sweep.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifiers::ClassifierKind;
use crate::diagnostics::{qq_series, skewness, QqSeries, DEFAULT_QQ_TRANSFORMS};
use crate::error::{Error, Result};
use crate::evaluation::{prepare_folds, row_keys, stratified_folds_keyed, CvOptions, MetricSet};
use crate::ingest::{ingest, stratified_subsample, IngestOptions};
use crate::seed::{CellKey, StableHasher};
use crate::stats::{friedman, holm_vs_best, FriedmanResult, HolmResult, ResultMatrix};
use crate::transforms::{self, FitScope, TransformConfig, TransformKind};
use crate::tuning::{default_grid, grid_search_prepared, Grid, GridAxis, SelectionMetric, TuningResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub name: String,
    /// Relative paths resolve against the config file's directory.
    pub path: PathBuf,
    pub label_column: String,
    #[serde(default)]
    pub id_columns: Vec<String>,
    #[serde(default)]
    pub positive_labels: Vec<String>,
    /// Features kept by univariate selection; absent keeps all.
    #[serde(default)]
    pub top_k: Option<usize>,
    /// Stratified row subsample taken before anything else.
    #[serde(default)]
    pub subsample: Option<usize>,
    /// Features to draw Q-Q series for; defaults to the first three.
    #[serde(default)]
    pub qq_features: Option<Vec<String>>,
}

impl DatasetConfig {
    pub fn ingest_options(&self) -> IngestOptions {
        IngestOptions {
            label_column: self.label_column.clone(),
            id_columns: self.id_columns.clone(),
            positive_labels: self.positive_labels.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClassifierEntry {
    Kind(ClassifierKind),
    WithGrid {
        kind: ClassifierKind,
        grid: Vec<GridAxis>,
    },
}

impl ClassifierEntry {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            ClassifierEntry::Kind(k) | ClassifierEntry::WithGrid { kind: k, .. } => *k,
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        match self {
            ClassifierEntry::Kind(k) => Ok(default_grid(*k)),
            ClassifierEntry::WithGrid { kind, grid } => Grid::from_axes(*kind, grid.clone()),
        }
    }
}

fn default_folds() -> usize {
    10
}

fn default_alphas() -> Vec<f64> {
    vec![0.05, 0.10]
}

fn default_qq_transforms() -> Vec<TransformKind> {
    DEFAULT_QQ_TRANSFORMS.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetConfig>,
    pub transforms: Vec<TransformKind>,
    #[serde(default)]
    pub transform_config: TransformConfig,
    /// Overrides `transform_config.fit_scope` when given.
    #[serde(default)]
    pub fit_scope: Option<FitScope>,
    pub classifiers: Vec<ClassifierEntry>,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub selection_metric: SelectionMetric,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    /// Also run feature selection on untransformed cells.
    #[serde(default)]
    pub select_raw: bool,
    #[serde(default = "default_qq_transforms")]
    pub qq_transforms: Vec<TransformKind>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parses and validates a config; relative paths are resolved against `base`.
    pub fn from_json(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid experiment config: {e}")))?;
        for d in &mut cfg.datasets {
            if d.path.is_relative() {
                d.path = base.join(&d.path);
            }
        }
        if let Some(out) = &cfg.output_dir {
            if out.is_relative() {
                cfg.output_dir = Some(base.join(out));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(Self, Vec<u8>)> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let text = std::str::from_utf8(&bytes).map_err(|_| Error::Config(format!("{} is not UTF-8", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Ok((ExperimentConfig::from_json(text, base)?, bytes))
    }

    pub fn effective_transform_config(&self) -> TransformConfig {
        let mut c = self.transform_config;
        if let Some(s) = self.fit_scope {
            c.fit_scope = s;
        }
        c
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() || self.transforms.is_empty() || self.classifiers.is_empty() {
            return Err(Error::Config("config needs at least one dataset, transform and classifier".into()));
        }
        if self.folds < 2 {
            return Err(Error::Config(format!("folds must be at least 2, got {}", self.folds)));
        }
        self.effective_transform_config().validate()?;
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(Error::Config(format!("alpha {a} is outside (0, 1)")));
        }
        let mut names = HashSet::new();
        for d in &self.datasets {
            if !names.insert(&d.name) {
                return Err(Error::Config(format!("dataset name '{}' is repeated", d.name)));
            }
            if d.top_k == Some(0) {
                return Err(Error::Config(format!("dataset '{}': top_k must be positive", d.name)));
            }
        }
        if self.transforms.iter().collect::<HashSet<_>>().len() != self.transforms.len() {
            return Err(Error::Config("a transform is listed twice".into()));
        }
        let kinds: HashSet<ClassifierKind> = self.classifiers.iter().map(ClassifierEntry::kind).collect();
        if kinds.len() != self.classifiers.len() {
            return Err(Error::Config("a classifier is listed twice".into()));
        }
        for c in &self.classifiers {
            c.grid()?;
        }
        Ok(())
    }
}

/// One tuned cell, as in the appendix tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRow {
    pub dataset: String,
    pub transform: TransformKind,
    pub dt_method: String,
    pub classifier: ClassifierKind,
    pub best_params: String,
    pub grid_point: usize,
    /// Seed of the selected grid point's first fold.
    pub seed: u64,
    pub metrics: MetricSet,
    pub fold_metrics: Vec<MetricSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub dataset: String,
    pub transform: TransformKind,
    pub classifier: ClassifierKind,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellTuning {
    pub dataset: String,
    pub transform: TransformKind,
    pub classifier: ClassifierKind,
    pub result: TuningResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSkew {
    pub dataset: String,
    pub transform: TransformKind,
    pub feature: String,
    pub skewness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetQq {
    pub dataset: String,
    #[serde(flatten)]
    pub series: QqSeries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub name: String,
    pub n_rows: usize,
    pub n_features: usize,
    pub churn_fraction: f64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub toolkit_version: String,
    pub config_sha256: String,
    pub master_seed: u64,
    pub started_unix: u64,
    pub finished_unix: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<CellRow>,
    pub failures: Vec<CellFailure>,
    pub datasets: Vec<DatasetSummary>,
    pub matrix: Option<ResultMatrix>,
    pub friedman: Option<FriedmanResult>,
    pub holm: Option<HolmResult>,
    pub notices: Vec<String>,
    pub tuning: Vec<CellTuning>,
    pub qq: Vec<DatasetQq>,
    pub skewness: Vec<FeatureSkew>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses rayon's default.
    pub workers: Option<usize>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Every seed the run can hand out must be distinct.
pub fn check_seed_collisions(config: &ExperimentConfig) -> Result<usize> {
    let mut seen = HashSet::new();
    for d in &config.datasets {
        for t in &config.transforms {
            for c in &config.classifiers {
                let points = c.grid()?.len();
                for g in 0..points {
                    for f in 0..config.folds {
                        let key = CellKey {
                            master_seed: config.master_seed,
                            dataset: &d.name,
                            transform: t.key(),
                            classifier: c.kind().key(),
                            fold: f,
                            grid_point: g,
                        };
                        if !seen.insert(key.seed()) {
                            return Err(Error::Config(format!(
                                "seed collision at {}/{}/{} fold {f} point {g}; choose another master_seed",
                                d.name,
                                t,
                                c.kind()
                            )));
                        }
                    }
                }
            }
        }
    }
    Ok(seen.len())
}

fn fold_seed(master: u64, dataset: &str) -> u64 {
    StableHasher::new().str("folds").u64(master).str(dataset).finish()
}

enum CellOutcome {
    Done(CellRow, CellTuning),
    Failed(CellFailure),
}

/// Runs every cell and the statistics over them. `config_bytes` feeds the
/// provenance hash.
pub fn run_experiment(config: &ExperimentConfig, config_bytes: &[u8], options: &RunOptions) -> Result<ExperimentReport> {
    config.validate()?;
    let started_unix = unix_now();
    check_seed_collisions(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start workers: {e}")))?;
    pool.install(|| run_inner(config, config_bytes, started_unix))
}

fn run_inner(config: &ExperimentConfig, config_bytes: &[u8], started_unix: u64) -> Result<ExperimentReport> {
    let tconfig = config.effective_transform_config();
    let mut datasets = Vec::new();
    let mut loaded = Vec::new();
    let mut notices = Vec::new();
    for d in &config.datasets {
        let bytes = std::fs::read(&d.path).map_err(|e| Error::io(&d.path, e))?;
        let (mut ds, _) = ingest(&d.path, &d.ingest_options())?;
        if let Some(n) = d.subsample {
            ds = stratified_subsample(&ds, n, fold_seed(config.master_seed, &d.name));
        }
        let (churn, _) = crate::ingest::class_balance(&ds);
        datasets.push(DatasetSummary {
            name: d.name.clone(),
            n_rows: ds.n_rows(),
            n_features: ds.n_features(),
            churn_fraction: churn,
            sha256: sha256_hex(&bytes),
        });
        let plan = stratified_folds_keyed(&ds.labels, &row_keys(&ds), config.folds, fold_seed(config.master_seed, &d.name))?;
        loaded.push((d, ds, plan));
    }

    let groups: Vec<(usize, TransformKind)> = (0..loaded.len())
        .flat_map(|i| config.transforms.iter().map(move |&t| (i, t)))
        .collect();
    let outcomes: Vec<Vec<CellOutcome>> = groups
        .par_iter()
        .map(|&(i, t)| {
            let (dcfg, ds, plan) = &loaded[i];
            let cv = CvOptions {
                top_k: dcfg.top_k,
                select_raw: config.select_raw,
            };
            let prepared = prepare_folds(ds, t, &tconfig, &cv, plan);
            config
                .classifiers
                .par_iter()
                .map(|entry| {
                    let kind = entry.kind();
                    let fail = |e: Error| {
                        CellOutcome::Failed(CellFailure {
                            dataset: dcfg.name.clone(),
                            transform: t,
                            classifier: kind,
                            error: e.to_string(),
                        })
                    };
                    let prepared = match &prepared {
                        Ok(p) => p,
                        Err(e) => return fail(Error::Fit(e.to_string())),
                    };
                    let key = CellKey {
                        master_seed: config.master_seed,
                        dataset: &dcfg.name,
                        transform: t.key(),
                        classifier: kind.key(),
                        fold: 0,
                        grid_point: 0,
                    };
                    let grid = match entry.grid() {
                        Ok(g) => g,
                        Err(e) => return fail(e),
                    };
                    match grid_search_prepared(kind, &grid, prepared, config.selection_metric, &key) {
                        Ok(result) => {
                            let best = result.best();
                            let row = CellRow {
                                dataset: dcfg.name.clone(),
                                transform: t,
                                dt_method: t.label().to_string(),
                                classifier: kind,
                                best_params: result.best_params.to_string(),
                                grid_point: result.best_point,
                                seed: CellKey {
                                    grid_point: result.best_point,
                                    ..key
                                }
                                .seed(),
                                metrics: best.result.mean,
                                fold_metrics: best.result.folds.clone(),
                            };
                            CellOutcome::Done(
                                row,
                                CellTuning {
                                    dataset: dcfg.name.clone(),
                                    transform: t,
                                    classifier: kind,
                                    result,
                                },
                            )
                        }
                        Err(e) => fail(e),
                    }
                })
                .collect()
        })
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut tuning = Vec::new();
    for o in outcomes.into_iter().flatten() {
        match o {
            CellOutcome::Done(r, t) => {
                rows.push(r);
                tuning.push(t);
            }
            CellOutcome::Failed(f) => failures.push(f),
        }
    }
    for f in &failures {
        notices.push(format!("cell {}/{}/{} failed: {}", f.dataset, f.transform, f.classifier, f.error));
    }

    let (matrix, notice) = fmeasure_matrix(config, &rows);
    notices.extend(notice);
    let (friedman_result, holm) = match &matrix {
        Some(m) => {
            let f = friedman(m, config.alphas[0]);
            let h = holm_vs_best(&f, &config.alphas)?;
            (Some(f), Some(h))
        }
        None => (None, None),
    };

    let (qq, skew) = diagnostics_for(config, &loaded, &tconfig, &mut notices);

    Ok(ExperimentReport {
        rows,
        failures,
        datasets,
        matrix,
        friedman: friedman_result,
        holm,
        notices,
        tuning,
        qq,
        skewness: skew,
        provenance: Provenance {
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: sha256_hex(config_bytes),
            master_seed: config.master_seed,
            started_unix,
            finished_unix: unix_now(),
        },
    })
}

/// Label of a Friedman block.
pub fn block_label(classifier: ClassifierKind, dataset: &str) -> String {
    format!("{classifier}/{dataset}")
}

/// F-measure matrix with blocks `(classifier, dataset)` and treatments = the
/// configured transforms. `None` with a notice when statistics cannot run.
pub fn fmeasure_matrix(config: &ExperimentConfig, rows: &[CellRow]) -> (Option<ResultMatrix>, Option<String>) {
    if config.transforms.len() < 3 {
        return (None, Some(format!("statistics skipped: {} transforms, at least 3 needed", config.transforms.len())));
    }
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for d in &config.datasets {
        for c in &config.classifiers {
            let mut row = Vec::new();
            for t in &config.transforms {
                match rows.iter().find(|r| r.dataset == d.name && r.classifier == c.kind() && r.transform == *t) {
                    Some(r) => row.push(r.metrics.f_measure),
                    None => {
                        return (
                            None,
                            Some(format!("statistics skipped: no result for {}/{}/{}", d.name, t, c.kind())),
                        )
                    }
                }
            }
            values.push(row);
            labels.push(block_label(c.kind(), &d.name));
        }
    }
    let treatments = config.transforms.iter().map(|t| t.label().to_string()).collect();
    match ResultMatrix::new(values, labels, treatments) {
        Ok(m) => (Some(m), None),
        Err(e) => (None, Some(format!("statistics skipped: {e}"))),
    }
}

fn diagnostics_for(
    config: &ExperimentConfig,
    loaded: &[(&DatasetConfig, crate::ingest::Dataset, crate::evaluation::FoldPlan)],
    tconfig: &TransformConfig,
    notices: &mut Vec<String>,
) -> (Vec<DatasetQq>, Vec<FeatureSkew>) {
    let mut qq = Vec::new();
    let mut skew = Vec::new();
    for (dcfg, ds, _) in loaded {
        let features: Vec<usize> = match &dcfg.qq_features {
            Some(names) => names
                .iter()
                .filter_map(|n| {
                    let j = ds.feature_names.iter().position(|f| f == n);
                    if j.is_none() {
                        notices.push(format!("{}: no feature '{n}' for Q-Q", dcfg.name));
                    }
                    j
                })
                .collect(),
            None => (0..ds.n_features().min(3)).collect(),
        };
        for &t in &config.qq_transforms {
            // diagnostic view of the whole dataset, not part of any fold
            let fitted = transforms::fit(t, &ds.features, &ds.labels, tconfig).and_then(|f| f.apply(&ds.features));
            let x = match fitted {
                Ok(x) => x,
                Err(e) => {
                    notices.push(format!("{}: {t} diagnostics skipped: {e}", dcfg.name));
                    continue;
                }
            };
            for &j in &features {
                let col = x.column(j);
                let name = &ds.feature_names[j];
                match qq_series(name, t, &col) {
                    Ok(series) => qq.push(DatasetQq {
                        dataset: dcfg.name.clone(),
                        series,
                    }),
                    Err(e) => notices.push(format!("{}: Q-Q for {name} under {t} skipped: {e}", dcfg.name)),
                }
                skew.push(FeatureSkew {
                    dataset: dcfg.name.clone(),
                    transform: t,
                    feature: name.clone(),
                    skewness: skewness(&col).ok(),
                });
            }
        }
    }
    (qq, skew)
}
