use serde::{Deserialize, Serialize};

use super::logistic::sigmoid;
use super::tree::{grow, Criterion, Presorted, Tree, TreeSpec};
use super::HyperParams;
use crate::error::Result;
use crate::matrix::Matrix;

/// Gradient-boosted regression trees on the logistic loss.
///
/// Starts from the training log-odds; each round fits a tree to the residuals
/// `y - p` and uses one Newton step `Σ(y - p) / Σ p(1 - p)` per leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoosting {
    pub init: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
}

impl GradientBoosting {
    pub(crate) fn fit(x: &Matrix, y: &[u8], hp: &HyperParams) -> Result<Self> {
        let n = y.len();
        let pos = y.iter().filter(|&&v| v == 1).count() as f64;
        let init = (pos / (n as f64 - pos)).ln();
        let lr = hp.num("learning_rate");
        let spec = TreeSpec {
            max_depth: hp.depth("max_depth"),
            min_leaf: hp.int("min_leaf"),
            max_features: None,
        };
        let pre = Presorted::new(x);
        let count = vec![1u32; n];
        let mut f = vec![init; n];
        let mut r = vec![0.0; n];
        let mut h = vec![0.0; n];
        let mut trees = Vec::new();
        for _ in 0..hp.int("n_rounds") {
            for i in 0..n {
                let p = sigmoid(f[i]);
                r[i] = f64::from(y[i]) - p;
                h[i] = p * (1.0 - p);
            }
            let tree = grow::<rand_chacha::ChaCha8Rng>(
                &pre,
                &r,
                &h,
                &count,
                Criterion::Newton,
                &spec,
                None,
            );
            for (i, fi) in f.iter_mut().enumerate() {
                *fi += lr * tree.predict_row(x.row(i));
            }
            trees.push(tree);
        }
        Ok(GradientBoosting {
            init,
            learning_rate: lr,
            trees,
        })
    }

    pub fn raw_score(&self, row: &[f64]) -> f64 {
        self.init + self.learning_rate * self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>()
    }

    pub(crate) fn scores(&self, x: &Matrix) -> Vec<f64> {
        x.iter_rows().map(|r| sigmoid(self.raw_score(r))).collect()
    }
}
