use serde::{Deserialize, Serialize};

use super::HyperParams;
use crate::error::Result;
use crate::matrix::Matrix;

/// Gaussian naive Bayes with an additive variance floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    /// `ln P(class)` for classes 0 and 1.
    pub log_prior: [f64; 2],
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
    pub epsilon: f64,
}

fn column_variances(x: &Matrix, rows: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let d = x.cols();
    let n = rows.len() as f64;
    let mut mean = vec![0.0; d];
    for &i in rows {
        for (m, v) in mean.iter_mut().zip(x.row(i)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; d];
    for &i in rows {
        for ((s, v), m) in var.iter_mut().zip(x.row(i)).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    var.iter_mut().for_each(|s| *s /= n);
    (mean, var)
}

impl GaussianNb {
    pub(crate) fn fit(x: &Matrix, y: &[u8], hp: &HyperParams) -> Result<Self> {
        let smoothing = hp.num("var_smoothing");
        let all: Vec<usize> = (0..x.rows()).collect();
        let (_, total_var) = column_variances(x, &all);
        let max_var = total_var.iter().copied().fold(0.0, f64::max);
        // a floor of zero would make constant features blow up the likelihood
        let epsilon = smoothing * if max_var > 0.0 { max_var } else { 1.0 };

        let mut log_prior = [0.0; 2];
        let mut means: [Vec<f64>; 2] = Default::default();
        let mut variances: [Vec<f64>; 2] = Default::default();
        for c in 0..2u8 {
            let rows: Vec<usize> = (0..x.rows()).filter(|&i| y[i] == c).collect();
            let (m, mut v) = column_variances(x, &rows);
            v.iter_mut().for_each(|s| *s += epsilon);
            log_prior[c as usize] = (rows.len() as f64 / x.rows() as f64).ln();
            means[c as usize] = m;
            variances[c as usize] = v;
        }
        Ok(GaussianNb {
            log_prior,
            means,
            variances,
            epsilon,
        })
    }

    /// Log joint likelihood `ln P(x, class)` up to a shared constant.
    pub fn log_joint(&self, row: &[f64], class: usize) -> f64 {
        let mut lj = self.log_prior[class];
        for ((x, m), v) in row
            .iter()
            .zip(&self.means[class])
            .zip(&self.variances[class])
        {
            lj -= 0.5 * (v.ln() + (x - m) * (x - m) / v);
        }
        lj
    }

    pub(crate) fn scores(&self, x: &Matrix) -> Vec<f64> {
        x.iter_rows()
            .map(|r| {
                let diff = self.log_joint(r, 0) - self.log_joint(r, 1);
                // P(1|x) = 1 / (1 + exp(lj0 - lj1))
                if diff >= 0.0 {
                    let e = (-diff).exp();
                    e / (1.0 + e)
                } else {
                    1.0 / (1.0 + diff.exp())
                }
            })
            .collect()
    }
}
