use serde::{Deserialize, Serialize};

use super::HyperParams;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// L2-regularized logistic regression trained by full-batch gradient descent.
///
/// Each iteration starts from `learning_rate` and halves the step until the
/// Armijo sufficient-decrease condition holds, so the objective never rises.
/// Descent runs on standardized features with the penalty rescaled to match,
/// which leaves the objective unchanged but conditions it far better; the
/// stored weights are on the original feature scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticRegression {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub initial_loss: f64,
    /// Gradient norm in the standardized coordinates the descent ran in.
    pub final_loss: f64,
    pub final_grad_norm: f64,
}

#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
#[inline]
pub(crate) fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Cross-entropy of a logit against a 0/1 target.
#[inline]
pub(crate) fn bce_with_logit(z: f64, y: f64) -> f64 {
    softplus(z) - y * z
}

struct Problem {
    x: Matrix,
    y: Vec<f64>,
    /// Per-weight L2 coefficient in standardized coordinates.
    penalty: Vec<f64>,
}

impl Problem {
    fn penalty(&self, w: &[f64]) -> f64 {
        0.5 * w.iter().zip(&self.penalty).map(|(wi, p)| p * wi * wi).sum::<f64>()
    }

    fn loss(&self, w: &[f64], b: f64) -> f64 {
        let n = self.x.rows() as f64;
        let data: f64 = self
            .x
            .iter_rows()
            .zip(&self.y)
            .map(|(r, &y)| bce_with_logit(dot(r, w) + b, y))
            .sum::<f64>()
            / n;
        data + self.penalty(w)
    }

    fn loss_and_grad(&self, w: &[f64], b: f64, gw: &mut [f64]) -> (f64, f64) {
        let n = self.x.rows() as f64;
        gw.iter_mut().for_each(|g| *g = 0.0);
        let mut gb = 0.0;
        let mut loss = 0.0;
        for (r, &y) in self.x.iter_rows().zip(&self.y) {
            let z = dot(r, w) + b;
            loss += bce_with_logit(z, y);
            let e = sigmoid(z) - y;
            gb += e;
            for (g, v) in gw.iter_mut().zip(r) {
                *g += e * v;
            }
        }
        for ((g, wi), p) in gw.iter_mut().zip(w).zip(&self.penalty) {
            *g = *g / n + p * wi;
        }
        (loss / n + self.penalty(w), gb / n)
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl LogisticRegression {
    pub(crate) fn fit(x: &Matrix, y: &[u8], hp: &HyperParams) -> Result<Self> {
        let lr = hp.num("learning_rate");
        let max_iters = hp.int("max_iters");
        let tol = hp.num("tol");
        let l2 = hp.num("l2");
        let d = x.cols();
        let n = x.rows() as f64;
        let mut mean = vec![0.0; d];
        let mut scale = vec![0.0; d];
        for j in 0..d {
            let c = x.column(j);
            let m = c.iter().sum::<f64>() / n;
            let sd = (c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt();
            mean[j] = m;
            scale[j] = if sd > 0.0 { sd } else { 1.0 };
        }
        let problem = Problem {
            x: Matrix::from_vec(
                x.rows(),
                d,
                x.iter_rows()
                    .flat_map(|r| r.iter().zip(&mean).zip(&scale).map(|((v, m), s)| (v - m) / s))
                    .collect(),
            )?,
            y: y.iter().map(|&v| f64::from(v)).collect(),
            penalty: scale.iter().map(|s| l2 / (s * s)).collect(),
        };
        let mut w = vec![0.0; d];
        let mut b = 0.0;
        let mut gw = vec![0.0; d];
        let mut trial = vec![0.0; d];

        let (mut loss, mut gb) = problem.loss_and_grad(&w, b, &mut gw);
        let initial_loss = loss;
        let mut grad_norm = (dot(&gw, &gw) + gb * gb).sqrt();
        let mut iterations = 0;

        while iterations < max_iters && grad_norm > tol {
            let sq = grad_norm * grad_norm;
            let mut step = lr;
            let mut accepted = false;
            for _ in 0..60 {
                for ((t, wi), g) in trial.iter_mut().zip(&w).zip(&gw) {
                    *t = wi - step * g;
                }
                let tb = b - step * gb;
                let l = problem.loss(&trial, tb);
                if !l.is_finite() {
                    return Err(Error::Divergence { learning_rate: lr });
                }
                if l <= loss - 1e-4 * step * sq {
                    std::mem::swap(&mut w, &mut trial);
                    b = tb;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            iterations += 1;
            if !accepted {
                // no representable decrease left
                break;
            }
            let (l, g) = problem.loss_and_grad(&w, b, &mut gw);
            if !l.is_finite() {
                return Err(Error::Divergence { learning_rate: lr });
            }
            loss = l;
            gb = g;
            grad_norm = (dot(&gw, &gw) + gb * gb).sqrt();
        }

        let weights: Vec<f64> = w.iter().zip(&scale).map(|(wi, s)| wi / s).collect();
        let bias = b - dot(&weights, &mean);
        Ok(LogisticRegression {
            weights,
            bias,
            iterations,
            initial_loss,
            final_loss: loss,
            final_grad_norm: grad_norm,
        })
    }

    pub(crate) fn scores(&self, x: &Matrix) -> Vec<f64> {
        x.iter_rows()
            .map(|r| sigmoid(dot(r, &self.weights) + self.bias))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_helpers() {
        assert!((softplus(1000.0) - 1000.0).abs() < 1e-12);
        assert!(softplus(-1000.0) >= 0.0);
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0).is_finite());
    }

    #[test]
    fn descent_improves_and_converges() {
        use super::super::ClassifierKind;
        let rows: Vec<Vec<f64>> = (0..80).map(|i| vec![i as f64 * 3.0, ((i * 7) % 13) as f64 - 6.0]).collect();
        let y: Vec<u8> = (0..80).map(|i| u8::from(i > 35 && i % 5 != 0 || i % 11 == 0)).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let hp = HyperParams::new().with("l2", 0.1).with("max_iters", 5000.0).resolve(ClassifierKind::Lr).unwrap();
        let m = LogisticRegression::fit(&x, &y, &hp).unwrap();
        assert!(m.final_loss <= m.initial_loss);
        assert!(m.final_grad_norm <= 1e-6, "{}", m.final_grad_norm);
        // stationary on the original scale too, up to the feature scale factor
        let n = 80.0;
        let mut g = [0.0; 2];
        for (r, &t) in x.iter_rows().zip(&y) {
            let e = sigmoid(dot(r, &m.weights) + m.bias) - f64::from(t);
            g[0] += e * r[0] / n;
            g[1] += e * r[1] / n;
        }
        for j in 0..2 {
            assert!((g[j] + 0.1 * m.weights[j]).abs() < 1e-4, "{g:?} {:?}", m.weights);
        }
    }
}
