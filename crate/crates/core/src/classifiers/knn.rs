use serde::{Deserialize, Serialize};

use super::HyperParams;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Brute-force Euclidean k-nearest-neighbour vote.
///
/// Neighbours at equal distance are taken in training-row order. A tied vote
/// (possible for even `k`) scores just below the threshold, so it labels 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub x: Matrix,
    pub y: Vec<u8>,
}

const TIE_SCORE: f64 = 0.499_999_999_999_999_94; // largest f64 below 0.5

impl Knn {
    pub(crate) fn fit(x: &Matrix, y: &[u8], hp: &HyperParams) -> Result<Self> {
        let k = hp.int("k");
        if k > x.rows() {
            return Err(Error::Config(format!(
                "k = {k} exceeds {} training rows",
                x.rows()
            )));
        }
        Ok(Knn {
            k,
            x: x.clone(),
            y: y.to_vec(),
        })
    }

    /// Indices of the `k` nearest training rows, nearest first.
    pub fn neighbors(&self, query: &[f64]) -> Vec<usize> {
        let mut d: Vec<(f64, u32)> = self
            .x
            .iter_rows()
            .enumerate()
            .map(|(i, r)| {
                let dist: f64 = r.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
                (dist, i as u32)
            })
            .collect();
        let cmp = |a: &(f64, u32), b: &(f64, u32)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < d.len() {
            d.select_nth_unstable_by(self.k - 1, cmp);
            d.truncate(self.k);
        }
        d.sort_unstable_by(cmp);
        d.into_iter().map(|(_, i)| i as usize).collect()
    }

    pub(crate) fn scores(&self, x: &Matrix) -> Vec<f64> {
        x.iter_rows()
            .map(|q| {
                let votes = self
                    .neighbors(q)
                    .iter()
                    .filter(|&&i| self.y[i] == 1)
                    .count();
                if 2 * votes == self.k {
                    TIE_SCORE
                } else {
                    votes as f64 / self.k as f64
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tie_score_is_just_below_half() {
        assert!(TIE_SCORE < 0.5);
        assert_eq!(TIE_SCORE, f64::from_bits(0.5f64.to_bits() - 1));
    }

    #[test]
    fn even_k_tie_goes_to_zero() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![5.0]]).unwrap();
        let m = Knn::fit(
            &x,
            &[0, 1, 1],
            &HyperParams::new()
                .with("k", 2.0)
                .resolve(super::super::ClassifierKind::Knn)
                .unwrap(),
        )
        .unwrap();
        let s = m.scores(&Matrix::from_rows(&[vec![0.4]]).unwrap());
        assert!(s[0] < 0.5);
    }

    #[test]
    fn equal_distances_use_lowest_index() {
        let x = Matrix::from_rows(&[vec![1.0], vec![-1.0], vec![1.0]]).unwrap();
        let m = Knn {
            k: 2,
            x,
            y: vec![0, 1, 1],
        };
        assert_eq!(m.neighbors(&[0.0]), vec![0, 1]);
    }
}
