//! Churn prediction with per-feature data transformations.
//!
//! The pipeline ingests a tabular CSV, applies one of seven transforms, keeps
//! the top-scoring features, tunes eight classifiers by stratified
//! cross-validation and compares the transforms with a Friedman test and Holm
//! post-hoc comparisons.

pub mod classifiers;
pub mod diagnostics;
pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod feature_select;
pub mod ingest;
pub mod matrix;
pub mod report;
pub mod seed;
pub mod stats;
pub mod transforms;
pub mod tuning;

pub use classifiers::{predict, train, ClassifierKind, HyperParams, ParamValue, Prediction, TrainedModel};
pub use error::{Error, Result};
pub use evaluation::{confusion, cross_validate, metrics, stratified_folds, ConfusionMatrix, CvOptions, FoldPlan, MetricSet};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentReport, RunOptions};
pub use ingest::{Dataset, IngestOptions};
pub use matrix::Matrix;
pub use report::{emit_report, stats_from_csv};
pub use stats::{FriedmanResult, HolmResult, ResultMatrix};
pub use transforms::{FitScope, FittedTransform, TransformConfig, TransformKind};
pub use tuning::{default_grid, Grid, SelectionMetric, TuningResult};
