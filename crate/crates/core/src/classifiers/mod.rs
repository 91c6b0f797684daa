//! The eight baseline learners behind one `train` / `predict` interface.
//!
//! Every learner is deterministic given its inputs and seed, trains in `f64`,
//! and scores rows with a churn probability in `[0, 1]`. Labels come from a
//! fixed 0.5 threshold.

mod boosting;
mod forest;
mod knn;
mod logistic;
mod naive_bayes;
pub mod neural;
mod params;
pub(crate) mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub use boosting::GradientBoosting;
pub use forest::RandomForest;
pub use knn::Knn;
pub use logistic::LogisticRegression;
pub use naive_bayes::GaussianNb;
pub use neural::{FeedForward, Recurrent};
pub use params::{HyperParams, ParamSpec, ParamValue};
pub use tree::DecisionTree;

/// Probability threshold for the churn label.
pub const THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ClassifierKind {
    Knn,
    Nb,
    Lr,
    Rf,
    Dtree,
    Gb,
    Fnn,
    Rnn,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 8] = [
        ClassifierKind::Knn,
        ClassifierKind::Nb,
        ClassifierKind::Lr,
        ClassifierKind::Rf,
        ClassifierKind::Dtree,
        ClassifierKind::Gb,
        ClassifierKind::Fnn,
        ClassifierKind::Rnn,
    ];

    pub fn key(self) -> &'static str {
        match self {
            ClassifierKind::Knn => "KNN",
            ClassifierKind::Nb => "NB",
            ClassifierKind::Lr => "LR",
            ClassifierKind::Rf => "RF",
            ClassifierKind::Dtree => "DTREE",
            ClassifierKind::Gb => "GB",
            ClassifierKind::Fnn => "FNN",
            ClassifierKind::Rnn => "RNN",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_uppercase().as_str() {
            "KNN" => ClassifierKind::Knn,
            "NB" => ClassifierKind::Nb,
            "LR" => ClassifierKind::Lr,
            "RF" => ClassifierKind::Rf,
            "DTREE" | "DT" => ClassifierKind::Dtree,
            "GB" => ClassifierKind::Gb,
            "FNN" => ClassifierKind::Fnn,
            "RNN" => ClassifierKind::Rnn,
            _ => return Err(Error::Config(format!("unknown classifier '{s}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub score: f64,
    pub label: u8,
}

impl Prediction {
    pub fn from_score(score: f64) -> Self {
        let score = score.clamp(0.0, 1.0);
        Prediction {
            score,
            label: u8::from(score >= THRESHOLD),
        }
    }
}

/// Per-kind fitted parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelParams {
    Knn(Knn),
    Nb(GaussianNb),
    Lr(LogisticRegression),
    Rf(RandomForest),
    Dtree(DecisionTree),
    Gb(GradientBoosting),
    Fnn(FeedForward),
    Rnn(Recurrent),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: ClassifierKind,
    pub hyperparams: HyperParams,
    pub seed: u64,
    pub n_features: usize,
    pub params: ModelParams,
}

impl TrainedModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Churn probability per row.
    pub fn scores(&self, x: &Matrix) -> Result<Vec<f64>> {
        x.check_cols(self.n_features)?;
        Ok(match &self.params {
            ModelParams::Knn(m) => m.scores(x),
            ModelParams::Nb(m) => m.scores(x),
            ModelParams::Lr(m) => m.scores(x),
            ModelParams::Rf(m) => m.scores(x),
            ModelParams::Dtree(m) => m.scores(x),
            ModelParams::Gb(m) => m.scores(x),
            ModelParams::Fnn(m) => m.scores(x),
            ModelParams::Rnn(m) => m.scores(x),
        })
    }
}

pub(crate) fn check_training_data(x: &Matrix, y: &[u8]) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::Dimension {
            expected: x.rows(),
            got: y.len(),
        });
    }
    if x.cols() == 0 {
        return Err(Error::Fit("training matrix has no features".into()));
    }
    if !x.is_finite() {
        return Err(Error::Fit(
            "training matrix contains non-finite values".into(),
        ));
    }
    if !(y.contains(&0) && y.contains(&1)) {
        return Err(Error::Fit(
            "training labels must contain both classes".into(),
        ));
    }
    Ok(())
}

pub fn train(
    kind: ClassifierKind,
    x: &Matrix,
    y: &[u8],
    hp: &HyperParams,
    seed: u64,
) -> Result<TrainedModel> {
    let resolved = hp.resolve(kind)?;
    check_training_data(x, y)?;
    let params = match kind {
        ClassifierKind::Knn => ModelParams::Knn(Knn::fit(x, y, &resolved)?),
        ClassifierKind::Nb => ModelParams::Nb(GaussianNb::fit(x, y, &resolved)?),
        ClassifierKind::Lr => ModelParams::Lr(LogisticRegression::fit(x, y, &resolved)?),
        ClassifierKind::Rf => ModelParams::Rf(RandomForest::fit(x, y, &resolved, seed)?),
        ClassifierKind::Dtree => ModelParams::Dtree(DecisionTree::fit(x, y, &resolved)?),
        ClassifierKind::Gb => ModelParams::Gb(GradientBoosting::fit(x, y, &resolved)?),
        ClassifierKind::Fnn => ModelParams::Fnn(FeedForward::fit(x, y, &resolved, seed)?),
        ClassifierKind::Rnn => ModelParams::Rnn(Recurrent::fit(x, y, &resolved, seed)?),
    };
    Ok(TrainedModel {
        kind,
        hyperparams: resolved,
        seed,
        n_features: x.cols(),
        params,
    })
}

pub fn predict(model: &TrainedModel, x: &Matrix) -> Result<Vec<Prediction>> {
    Ok(model
        .scores(x)?
        .into_iter()
        .map(Prediction::from_score)
        .collect())
}

/// Largest relative gap between analytic and central-difference gradients of
/// the mean cross-entropy loss, over every network parameter.
pub fn gradient_check(
    kind: ClassifierKind,
    x: &Matrix,
    y: &[u8],
    hp: &HyperParams,
    seed: u64,
) -> Result<f64> {
    let resolved = hp.resolve(kind)?;
    if x.rows() != y.len() {
        return Err(Error::Dimension {
            expected: x.rows(),
            got: y.len(),
        });
    }
    match kind {
        ClassifierKind::Fnn => {
            let net = FeedForward::init(x.cols(), resolved.int("hidden_units"), seed);
            Ok(neural::check_gradients(&net, x, y))
        }
        ClassifierKind::Rnn => {
            let net = Recurrent::init(resolved.int("hidden_units"), seed);
            Ok(neural::check_gradients(&net, x, y))
        }
        other => Err(Error::Config(format!(
            "gradient check applies to FNN and RNN, not {other}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_rule() {
        assert_eq!(Prediction::from_score(0.5).label, 1);
        assert_eq!(Prediction::from_score(0.4999).label, 0);
    }

    #[test]
    fn kind_round_trip() {
        for k in ClassifierKind::ALL {
            assert_eq!(k.key().parse::<ClassifierKind>().unwrap(), k);
        }
        assert_eq!(
            "DT".parse::<ClassifierKind>().unwrap(),
            ClassifierKind::Dtree
        );
    }

    #[test]
    fn single_class_is_rejected() {
        let x = Matrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        for k in ClassifierKind::ALL {
            assert!(
                train(k, &x, &[1, 1], &HyperParams::new(), 0).is_err(),
                "{k}"
            );
        }
    }
}
