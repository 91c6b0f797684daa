//! One-hidden-layer feedforward and Elman recurrent networks.
//!
//! Both are trained on mean binary cross-entropy with Adam over shuffled
//! mini-batches. Parameters live in one flat vector so the optimizer and the
//! finite-difference check treat both nets alike.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::logistic::{bce_with_logit, sigmoid};
use super::HyperParams;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// A differentiable binary scorer over a flat parameter vector.
pub trait Network: Clone {
    fn params(&self) -> &[f64];
    fn params_mut(&mut self) -> &mut [f64];
    /// Output logit for one row.
    fn logit(&self, row: &[f64]) -> f64;
    /// Adds `scale · ∂loss/∂θ` for one row to `grad` and returns that row's loss.
    fn accumulate(&self, row: &[f64], y: f64, scale: f64, grad: &mut [f64]) -> f64;

    /// Mean loss and its gradient over `rows`.
    fn loss_grad(&self, x: &Matrix, y: &[u8], rows: &[usize], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let scale = 1.0 / rows.len() as f64;
        let mut loss = 0.0;
        for &i in rows {
            loss += self.accumulate(x.row(i), f64::from(y[i]), scale, grad);
        }
        loss * scale
    }

    fn loss(&self, x: &Matrix, y: &[u8]) -> f64 {
        let total: f64 = x
            .iter_rows()
            .zip(y)
            .map(|(r, &t)| bce_with_logit(self.logit(r), f64::from(t)))
            .sum();
        total / x.rows() as f64
    }
}

fn normal_fill(rng: &mut ChaCha8Rng, out: &mut [f64], sd: f64) {
    let dist = Normal::new(0.0, sd).expect("finite sd");
    out.iter_mut().for_each(|v| *v = dist.sample(rng));
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedForward {
    pub inputs: usize,
    pub hidden: usize,
    /// `[W1 (hidden × inputs, row-major) | b1 | w2 | b2]`
    pub params: Vec<f64>,
}

impl FeedForward {
    /// He-initialized hidden layer, Xavier-initialized output, zero biases.
    pub fn init(inputs: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = vec![0.0; hidden * inputs + 2 * hidden + 1];
        normal_fill(
            &mut rng,
            &mut params[..hidden * inputs],
            (2.0 / inputs.max(1) as f64).sqrt(),
        );
        let w2 = hidden * inputs + hidden;
        normal_fill(
            &mut rng,
            &mut params[w2..w2 + hidden],
            (1.0 / hidden as f64).sqrt(),
        );
        FeedForward {
            inputs,
            hidden,
            params,
        }
    }

    pub fn zeros(inputs: usize, hidden: usize) -> Self {
        FeedForward {
            inputs,
            hidden,
            params: vec![0.0; hidden * inputs + 2 * hidden + 1],
        }
    }

    fn split(&self) -> (&[f64], &[f64], &[f64], f64) {
        let (h, d) = (self.hidden, self.inputs);
        let (w1, rest) = self.params.split_at(h * d);
        let (b1, rest) = rest.split_at(h);
        let (w2, b2) = rest.split_at(h);
        (w1, b1, w2, b2[0])
    }

    pub(crate) fn fit(x: &Matrix, y: &[u8], hp: &HyperParams, seed: u64) -> Result<Self> {
        let net = FeedForward::init(x.cols(), hp.int("hidden_units"), seed);
        train_adam(net, x, y, hp, seed)
    }

    pub(crate) fn scores(&self, x: &Matrix) -> Vec<f64> {
        x.iter_rows().map(|r| sigmoid(self.logit(r))).collect()
    }
}

impl Network for FeedForward {
    fn params(&self) -> &[f64] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn logit(&self, row: &[f64]) -> f64 {
        let (w1, b1, w2, b2) = self.split();
        let mut o = b2;
        for j in 0..self.hidden {
            let z = b1[j] + dot(&w1[j * self.inputs..(j + 1) * self.inputs], row);
            if z > 0.0 {
                o += w2[j] * z;
            }
        }
        o
    }

    fn accumulate(&self, row: &[f64], y: f64, scale: f64, grad: &mut [f64]) -> f64 {
        let (h, d) = (self.hidden, self.inputs);
        let (w1, b1, w2, b2) = self.split();
        let mut act = vec![0.0; h];
        let mut o = b2;
        for j in 0..h {
            let z = b1[j] + dot(&w1[j * d..(j + 1) * d], row);
            act[j] = z.max(0.0);
            o += w2[j] * act[j];
        }
        let e = (sigmoid(o) - y) * scale;
        let (gw1, rest) = grad.split_at_mut(h * d);
        let (gb1, rest) = rest.split_at_mut(h);
        let (gw2, gb2) = rest.split_at_mut(h);
        gb2[0] += e;
        for j in 0..h {
            gw2[j] += e * act[j];
            if act[j] > 0.0 {
                let delta = e * w2[j];
                gb1[j] += delta;
                for (g, v) in gw1[j * d..(j + 1) * d].iter_mut().zip(row) {
                    *g += delta * v;
                }
            }
        }
        bce_with_logit(o, y)
    }
}

/// Elman cell scanned over a row's features as a sequence of scalars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recurrent {
    pub hidden: usize,
    /// `[w_in | W_hh (row-major) | b | v | c]`
    pub params: Vec<f64>,
}

impl Recurrent {
    pub fn init(hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = hidden;
        let mut params = vec![0.0; h + h * h + 2 * h + 1];
        normal_fill(&mut rng, &mut params[..h], (2.0 / (1 + h) as f64).sqrt());
        normal_fill(&mut rng, &mut params[h..h + h * h], (1.0 / h as f64).sqrt());
        let v = h + h * h + h;
        normal_fill(&mut rng, &mut params[v..v + h], (1.0 / h as f64).sqrt());
        Recurrent { hidden, params }
    }

    pub fn zeros(hidden: usize) -> Self {
        Recurrent {
            hidden,
            params: vec![0.0; hidden + hidden * hidden + 2 * hidden + 1],
        }
    }

    fn split(&self) -> (&[f64], &[f64], &[f64], &[f64], f64) {
        let h = self.hidden;
        let (wi, rest) = self.params.split_at(h);
        let (whh, rest) = rest.split_at(h * h);
        let (b, rest) = rest.split_at(h);
        let (v, c) = rest.split_at(h);
        (wi, whh, b, v, c[0])
    }

    /// Hidden states `h_1..h_d` stacked row-major.
    fn states(&self, row: &[f64]) -> Vec<f64> {
        let h = self.hidden;
        let (wi, whh, b, _, _) = self.split();
        let mut states = vec![0.0; h * row.len()];
        let mut prev = vec![0.0; h];
        for (t, &xt) in row.iter().enumerate() {
            let cur = &mut states[t * h..(t + 1) * h];
            for j in 0..h {
                let s = wi[j] * xt + b[j] + dot(&whh[j * h..(j + 1) * h], &prev);
                cur[j] = s.tanh();
            }
            prev.copy_from_slice(cur);
        }
        states
    }

    pub(crate) fn fit(x: &Matrix, y: &[u8], hp: &HyperParams, seed: u64) -> Result<Self> {
        let net = Recurrent::init(hp.int("hidden_units"), seed);
        train_adam(net, x, y, hp, seed)
    }

    pub(crate) fn scores(&self, x: &Matrix) -> Vec<f64> {
        x.iter_rows().map(|r| sigmoid(self.logit(r))).collect()
    }
}

impl Network for Recurrent {
    fn params(&self) -> &[f64] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn logit(&self, row: &[f64]) -> f64 {
        let h = self.hidden;
        let (_, _, _, v, c) = self.split();
        let states = self.states(row);
        match row.len() {
            0 => c,
            d => c + dot(v, &states[(d - 1) * h..]),
        }
    }

    fn accumulate(&self, row: &[f64], y: f64, scale: f64, grad: &mut [f64]) -> f64 {
        let h = self.hidden;
        let d = row.len();
        let (_, whh, _, v, c) = self.split();
        let states = self.states(row);
        let last = if d == 0 {
            &[][..]
        } else {
            &states[(d - 1) * h..]
        };
        let o = c + if d == 0 { 0.0 } else { dot(v, last) };
        let e = (sigmoid(o) - y) * scale;

        let (gwi, rest) = grad.split_at_mut(h);
        let (gwhh, rest) = rest.split_at_mut(h * h);
        let (gb, rest) = rest.split_at_mut(h);
        let (gv, gc) = rest.split_at_mut(h);
        gc[0] += e;
        if d == 0 {
            return bce_with_logit(o, y);
        }
        let mut dh: Vec<f64> = v.iter().map(|vj| e * vj).collect();
        for (g, s) in gv.iter_mut().zip(last) {
            *g += e * s;
        }
        let zero = vec![0.0; h];
        let mut ds = vec![0.0; h];
        for t in (0..d).rev() {
            let cur = &states[t * h..(t + 1) * h];
            let prev = if t == 0 {
                &zero[..]
            } else {
                &states[(t - 1) * h..t * h]
            };
            for j in 0..h {
                ds[j] = dh[j] * (1.0 - cur[j] * cur[j]);
                gwi[j] += ds[j] * row[t];
                gb[j] += ds[j];
                for (g, p) in gwhh[j * h..(j + 1) * h].iter_mut().zip(prev) {
                    *g += ds[j] * p;
                }
            }
            dh.iter_mut().for_each(|v| *v = 0.0);
            for (j, &dsj) in ds.iter().enumerate() {
                for (dk, w) in dh.iter_mut().zip(&whh[j * h..(j + 1) * h]) {
                    *dk += w * dsj;
                }
            }
        }
        bce_with_logit(o, y)
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn train_adam<N: Network>(
    mut net: N,
    x: &Matrix,
    y: &[u8],
    hp: &HyperParams,
    seed: u64,
) -> Result<N> {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;
    let lr = hp.num("learning_rate");
    let epochs = hp.int("epochs");
    let batch = hp.int("batch_size").max(1);
    let p = net.params().len();
    let mut m = vec![0.0; p];
    let mut v = vec![0.0; p];
    let mut grad = vec![0.0; p];
    let mut order: Vec<usize> = (0..x.rows()).collect();
    // distinct stream from the initializer
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5bd1_e995_9e37_79b9);
    let mut step = 0i32;
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for rows in order.chunks(batch) {
            let loss = net.loss_grad(x, y, rows, &mut grad);
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Divergence { learning_rate: lr });
            }
            step += 1;
            let c1 = 1.0 - BETA1.powi(step);
            let c2 = 1.0 - BETA2.powi(step);
            for (((w, g), mi), vi) in net
                .params_mut()
                .iter_mut()
                .zip(&grad)
                .zip(&mut m)
                .zip(&mut v)
            {
                *mi = BETA1 * *mi + (1.0 - BETA1) * g;
                *vi = BETA2 * *vi + (1.0 - BETA2) * g * g;
                *w -= lr * (*mi / c1) / ((*vi / c2).sqrt() + EPS);
            }
        }
    }
    if net.params().iter().any(|w| !w.is_finite()) {
        return Err(Error::Divergence { learning_rate: lr });
    }
    Ok(net)
}

/// Central-difference step for [`check_gradients`].
pub const FD_STEP: f64 = 1e-5;

/// Relative-error denominators below this are floored, so parameters with
/// vanishing gradients are judged by absolute error.
pub const FD_FLOOR: f64 = 1e-6;

/// Per-parameter analytic and central-difference gradients of the mean loss.
pub fn gradients<N: Network>(net: &N, x: &Matrix, y: &[u8]) -> (Vec<f64>, Vec<f64>) {
    let rows: Vec<usize> = (0..x.rows()).collect();
    let mut analytic = vec![0.0; net.params().len()];
    net.loss_grad(x, y, &rows, &mut analytic);
    let mut probe = net.clone();
    let numeric = (0..analytic.len())
        .map(|i| {
            let w = net.params()[i];
            probe.params_mut()[i] = w + FD_STEP;
            let up = probe.loss(x, y);
            probe.params_mut()[i] = w - FD_STEP;
            let down = probe.loss(x, y);
            probe.params_mut()[i] = w;
            (up - down) / (2.0 * FD_STEP)
        })
        .collect();
    (analytic, numeric)
}

pub fn check_gradients<N: Network>(net: &N, x: &Matrix, y: &[u8]) -> f64 {
    let (a, n) = gradients(net, x, y);
    a.iter()
        .zip(&n)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(FD_FLOOR))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn tiny(seed: u64, d: usize) -> (Matrix, Vec<u8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 6;
        let data = (0..n * d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut y: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        y[0] = 0;
        y[1] = 1;
        (Matrix::from_vec(n, d, data).unwrap(), y)
    }

    #[test]
    fn feedforward_gradients_match_differences() {
        for s in 0..5 {
            let (x, y) = tiny(s, 4);
            let err = check_gradients(&FeedForward::init(4, 5, s), &x, &y);
            assert!(err < 1e-4, "seed {s}: {err}");
        }
    }

    #[test]
    fn recurrent_gradients_match_differences() {
        for s in 0..5 {
            let (x, y) = tiny(s, 4);
            let err = check_gradients(&Recurrent::init(3, s), &x, &y);
            assert!(err < 1e-4, "seed {s}: {err}");
        }
    }

    #[test]
    fn zero_network_bias_gradients_are_exact() {
        let x = Matrix::zeros(4, 3);
        let y = [0, 1, 1, 0];
        let ff = FeedForward::zeros(3, 2);
        let (a, n) = gradients(&ff, &x, &y);
        let b2 = a.len() - 1;
        for i in (6..8).chain([b2]) {
            assert!((a[i] - n[i]).abs() < 1e-8, "param {i}");
        }
        let rnn = Recurrent::zeros(2);
        let (a, n) = gradients(&rnn, &x, &y);
        let b = 2 + 4;
        for i in (b..b + 2).chain([a.len() - 1]) {
            assert!((a[i] - n[i]).abs() < 1e-8, "param {i}");
        }
    }

    #[test]
    fn training_reduces_loss() {
        let (x, y) = tiny(9, 3);
        let hp = HyperParams::new()
            .with("learning_rate", 0.01)
            .with("epochs", 200.0)
            .resolve(super::super::ClassifierKind::Fnn)
            .unwrap();
        let before = FeedForward::init(3, 32, 1).loss(&x, &y);
        let after = FeedForward::fit(&x, &y, &hp, 1).unwrap().loss(&x, &y);
        assert!(after < before);
    }
}
