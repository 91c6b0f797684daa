use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{grow, Criterion, Presorted, Tree, TreeSpec};
use super::HyperParams;
use crate::error::Result;
use crate::matrix::Matrix;
use crate::seed::splitmix64;

/// Bagged Gini trees; the score is the mean leaf probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<Tree>,
    pub features_per_split: usize,
}

impl RandomForest {
    pub(crate) fn fit(x: &Matrix, y: &[u8], hp: &HyperParams, seed: u64) -> Result<Self> {
        let d = x.cols();
        let m = ((hp.num("feature_fraction") * d as f64).ceil() as usize).clamp(1, d);
        let spec = TreeSpec {
            max_depth: hp.depth("max_depth"),
            min_leaf: hp.int("min_leaf"),
            max_features: Some(m),
        };
        let bootstrap = hp.num("bootstrap") != 0.0;
        let pre = Presorted::new(x);
        let n = y.len();
        let mut count = vec![1u32; n];
        let mut a = vec![0.0; n];
        let trees = (0..hp.int("n_trees") as u64)
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(t)));
                if bootstrap {
                    count.iter_mut().for_each(|c| *c = 0);
                    for _ in 0..n {
                        count[rng.random_range(0..n)] += 1;
                    }
                }
                for i in 0..n {
                    a[i] = f64::from(y[i]) * f64::from(count[i]);
                }
                let w: Vec<f64> = count.iter().map(|&c| f64::from(c)).collect();
                grow(&pre, &a, &w, &count, Criterion::Gini, &spec, Some(&mut rng))
            })
            .collect();
        Ok(RandomForest {
            trees,
            features_per_split: m,
        })
    }

    pub(crate) fn scores(&self, x: &Matrix) -> Vec<f64> {
        let k = self.trees.len().max(1) as f64;
        x.iter_rows()
            .map(|r| self.trees.iter().map(|t| t.predict_row(r)).sum::<f64>() / k)
            .collect()
    }
}
