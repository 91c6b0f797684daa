//! Friedman rank test with Holm step-down comparisons against the best
//! treatment.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};

/// Blocks × treatments score grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultMatrix {
    pub values: Vec<Vec<f64>>,
    pub block_labels: Vec<String>,
    pub treatment_labels: Vec<String>,
}

impl ResultMatrix {
    pub fn new(values: Vec<Vec<f64>>, block_labels: Vec<String>, treatment_labels: Vec<String>) -> Result<Self> {
        let k = treatment_labels.len();
        if k < 3 {
            return Err(Error::Domain(format!("need at least 3 treatments, got {k}")));
        }
        if values.len() < 2 {
            return Err(Error::Domain(format!("need at least 2 blocks, got {}", values.len())));
        }
        if block_labels.len() != values.len() {
            return Err(Error::Dimension {
                expected: values.len(),
                got: block_labels.len(),
            });
        }
        for (b, row) in values.iter().enumerate() {
            if row.len() != k {
                return Err(Error::Dimension { expected: k, got: row.len() });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain(format!("block '{}' has a missing or non-finite cell", block_labels[b])));
            }
        }
        Ok(ResultMatrix {
            values,
            block_labels,
            treatment_labels,
        })
    }

    /// First column is the block label, the rest are treatments.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.len() < 2 {
            return Err(Error::Parse {
                row: 1,
                message: "result matrix needs a block column and treatment columns".into(),
            });
        }
        let treatments: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut values = Vec::new();
        let mut blocks = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            blocks.push(rec.get(0).unwrap_or_default().to_string());
            let row = rec
                .iter()
                .skip(1)
                .map(|c| {
                    c.parse::<f64>().map_err(|_| Error::Parse {
                        row: line,
                        message: format!("'{c}' is not a number"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            values.push(row);
        }
        ResultMatrix::new(values, blocks, treatments)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        ResultMatrix::from_csv(f)
    }

    pub fn n_blocks(&self) -> usize {
        self.values.len()
    }

    pub fn n_treatments(&self) -> usize {
        self.treatment_labels.len()
    }
}

/// Ranks one block, 1 = best, ties share the mean of the ranks they span.
pub fn rank_block(values: &[f64], higher_is_better: bool) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        let o = values[a].total_cmp(&values[b]);
        if higher_is_better {
            o.reverse()
        } else {
            o
        }
    });
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &t in &idx[i..=j] {
            ranks[t] = r;
        }
        i = j + 1;
    }
    ranks
}

pub fn rank_blocks(matrix: &ResultMatrix, higher_is_better: bool) -> Vec<Vec<f64>> {
    matrix.values.iter().map(|b| rank_block(b, higher_is_better)).collect()
}

/// Upper tail of the chi-square distribution.
pub fn chi_square_sf(x: f64, dof: usize) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    gamma_ur(dof as f64 / 2.0, x / 2.0)
}

/// `1 − Φ(z)` for the standard normal.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriedmanResult {
    pub treatment_labels: Vec<String>,
    pub avg_ranks: Vec<f64>,
    pub n_blocks: usize,
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub alpha: f64,
    pub reject_h0: bool,
}

/// Friedman statistic from average ranks, without tie correction.
pub fn friedman_statistic(avg_ranks: &[f64], n_blocks: usize) -> f64 {
    let k = avg_ranks.len() as f64;
    let n = n_blocks as f64;
    let sum_sq: f64 = avg_ranks.iter().map(|r| r * r).sum();
    12.0 * n / (k * (k + 1.0)) * (sum_sq - k * (k + 1.0) * (k + 1.0) / 4.0)
}

pub fn friedman_from_ranks(labels: Vec<String>, avg_ranks: Vec<f64>, n_blocks: usize, alpha: f64) -> FriedmanResult {
    // tiny negative values are rounding noise on an all-tied grid
    let statistic = friedman_statistic(&avg_ranks, n_blocks).max(0.0);
    let dof = avg_ranks.len() - 1;
    let p_value = chi_square_sf(statistic, dof);
    FriedmanResult {
        treatment_labels: labels,
        avg_ranks,
        n_blocks,
        statistic,
        dof,
        p_value,
        alpha,
        reject_h0: p_value < alpha,
    }
}

/// Friedman test on scores where higher is better.
pub fn friedman(matrix: &ResultMatrix, alpha: f64) -> FriedmanResult {
    let ranks = rank_blocks(matrix, true);
    let n = matrix.n_blocks();
    let avg: Vec<f64> = (0..matrix.n_treatments())
        .map(|j| ranks.iter().map(|r| r[j]).sum::<f64>() / n as f64)
        .collect();
    friedman_from_ranks(matrix.treatment_labels.clone(), avg, n, alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolmComparison {
    /// 1-based position after sorting by p.
    pub i: usize,
    pub treatment: String,
    pub pair: String,
    pub z: f64,
    pub p_value: f64,
    /// `α / (k − i)` for each configured α, in order.
    pub adjusted_alpha: Vec<f64>,
    pub rejected: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolmResult {
    pub best: String,
    pub alphas: Vec<f64>,
    pub comparisons: Vec<HolmComparison>,
}

fn rank_se(k: usize, n: usize) -> f64 {
    let k = k as f64;
    (k * (k + 1.0) / (6.0 * n as f64)).sqrt()
}

fn two_sided_p(diff: f64, se: f64) -> (f64, f64) {
    let z = diff / se;
    (z, (2.0 * normal_sf(z.abs())).min(1.0))
}

pub fn holm_vs_best(result: &FriedmanResult, alphas: &[f64]) -> Result<HolmResult> {
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
        return Err(Error::Config(format!("alpha {a} is outside (0, 1)")));
    }
    let k = result.avg_ranks.len();
    let se = rank_se(k, result.n_blocks);
    let best = (0..k)
        .min_by(|&a, &b| result.avg_ranks[a].total_cmp(&result.avg_ranks[b]).then(a.cmp(&b)))
        .expect("at least one treatment");
    let best_label = &result.treatment_labels[best];
    let mut rows: Vec<(usize, f64, f64)> = (0..k)
        .filter(|&j| j != best)
        .map(|j| {
            let (z, p) = two_sided_p(result.avg_ranks[j] - result.avg_ranks[best], se);
            (j, z, p)
        })
        .collect();
    rows.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)));

    let mut still_rejecting = vec![true; alphas.len()];
    let comparisons = rows
        .into_iter()
        .enumerate()
        .map(|(pos, (j, z, p))| {
            let i = pos + 1;
            let adjusted: Vec<f64> = alphas.iter().map(|a| a / (k - i) as f64).collect();
            let rejected: Vec<bool> = adjusted
                .iter()
                .zip(still_rejecting.iter_mut())
                .map(|(adj, go)| {
                    *go = *go && p < *adj;
                    *go
                })
                .collect();
            HolmComparison {
                i,
                treatment: result.treatment_labels[j].clone(),
                pair: format!("{best_label} vs. {}", result.treatment_labels[j]),
                z,
                p_value: p,
                adjusted_alpha: adjusted,
                rejected,
            }
        })
        .collect();
    Ok(HolmResult {
        best: best_label.clone(),
        alphas: alphas.to_vec(),
        comparisons,
    })
}

/// Unadjusted two-sided p-value for every treatment pair, `k × k`.
pub fn pairwise_p_values(result: &FriedmanResult) -> Vec<Vec<f64>> {
    let k = result.avg_ranks.len();
    let se = rank_se(k, result.n_blocks);
    (0..k)
        .map(|a| {
            (0..k)
                .map(|b| two_sided_p(result.avg_ranks[a] - result.avg_ranks[b], se).1)
                .collect()
        })
        .collect()
}

pub fn write_heatmap_csv(result: &FriedmanResult, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![String::new()];
    header.extend(result.treatment_labels.iter().cloned());
    w.write_record(&header)?;
    for (label, row) in result.treatment_labels.iter().zip(pairwise_p_values(result)) {
        let mut rec = vec![label.clone()];
        rec.extend(row.iter().map(|p| format!("{p:.6}")));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("heatmap", e))?;
    Ok(())
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Minimal SVG heatmap: darker cells are smaller p-values.
pub fn heatmap_svg(result: &FriedmanResult) -> String {
    let k = result.avg_ranks.len();
    let cell = 70;
    let margin = 110;
    let size = margin + cell * k + 10;
    let p = pairwise_p_values(result);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" font-family=\"sans-serif\" font-size=\"11\">\n"
    );
    for (i, label) in result.treatment_labels.iter().enumerate() {
        let c = margin + i * cell + cell / 2;
        let l = xml_escape(label);
        s += &format!("<text x=\"{c}\" y=\"{}\" text-anchor=\"middle\">{l}</text>\n", margin - 8);
        s += &format!("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{l}</text>\n", margin - 8, c + 4);
    }
    for (i, row) in p.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let shade = (255.0 * v.clamp(0.0, 1.0).powf(0.25)).round() as u8;
            let (x, y) = (margin + j * cell, margin + i * cell);
            let ink = if shade < 128 { "#ffffff" } else { "#000000" };
            s += &format!(
                "<rect x=\"{x}\" y=\"{y}\" width=\"{cell}\" height=\"{cell}\" fill=\"rgb({shade},{shade},255)\" stroke=\"#ffffff\"/>\n\
                 <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" fill=\"{ink}\">{v:.4}</text>\n",
                x + cell / 2,
                y + cell / 2 + 4
            );
        }
    }
    s += "</svg>\n";
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: Vec<Vec<f64>>) -> ResultMatrix {
        let k = rows[0].len();
        let n = rows.len();
        ResultMatrix::new(rows, (0..n).map(|i| format!("b{i}")).collect(), (0..k).map(|j| format!("t{j}")).collect()).unwrap()
    }

    #[test]
    fn block_ranking_examples() {
        assert_eq!(rank_block(&[0.9, 0.5, 0.7], true), vec![1.0, 3.0, 2.0]);
        let r = rank_block(&[0.06, 0.002, 0.002, 0.002, 0.008, 0.002, 0.492], true);
        assert_eq!(r, vec![2.0, 5.5, 5.5, 5.5, 3.0, 5.5, 1.0]);
        assert_eq!(rank_block(&[0.3; 7], true), vec![4.0; 7]);
    }

    #[test]
    fn all_tied_has_no_effect() {
        let f = friedman(&matrix(vec![vec![1.0; 4]; 5]), 0.05);
        assert_eq!(f.statistic, 0.0);
        assert_eq!(f.p_value, 1.0);
        assert!(!f.reject_h0);
    }

    #[test]
    fn shape_is_validated() {
        let mk = |rows: Vec<Vec<f64>>, k: usize| {
            ResultMatrix::new(rows.clone(), (0..rows.len()).map(|i| i.to_string()).collect(), (0..k).map(|j| j.to_string()).collect())
        };
        assert!(mk(vec![vec![1.0, 2.0]; 3], 2).is_err());
        assert!(mk(vec![vec![1.0, 2.0, 3.0]], 3).is_err());
        assert!(mk(vec![vec![1.0, 2.0, f64::NAN]; 2], 3).is_err());
    }

    #[test]
    fn tail_values() {
        assert_eq!(chi_square_sf(0.0, 6), 1.0);
        assert!((chi_square_sf(12.59, 6) - 0.05).abs() < 0.001);
        // even dof closed form: e^{-x/2} Σ_{i<dof/2} (x/2)^i / i!
        let x: f64 = 7.3;
        let closed = (-x / 2.0).exp() * (1.0 + x / 2.0 + (x / 2.0).powi(2) / 2.0);
        assert!((chi_square_sf(x, 6) - closed).abs() < 1e-12);
        assert_eq!(normal_sf(0.0), 0.5);
        assert!((2.0 * normal_sf(1.804) - 0.0712).abs() < 1e-4);
        for z in [0.1, 1.0, 2.5, 7.9] {
            assert!((normal_sf(z) + normal_sf(-z) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn equal_ranks_never_reject() {
        let f = friedman_from_ranks(vec!["a".into(), "b".into(), "c".into()], vec![1.5, 1.5, 3.0], 10, 0.05);
        let h = holm_vs_best(&f, &[0.05]).unwrap();
        assert_eq!(h.best, "a");
        let b = h.comparisons.iter().find(|c| c.treatment == "b").unwrap();
        assert_eq!((b.z, b.p_value, b.rejected[0]), (0.0, 1.0, false));
    }

    #[test]
    fn step_down_stops_after_first_acceptance() {
        let f = friedman_from_ranks((0..5).map(|i| i.to_string()).collect(), vec![1.0, 2.8, 3.0, 3.9, 4.3], 12, 0.05);
        let h = holm_vs_best(&f, &[0.05, 0.10]).unwrap();
        for a in 0..2 {
            let d: Vec<bool> = h.comparisons.iter().map(|c| c.rejected[a]).collect();
            assert!(d.windows(2).all(|w| w[0] || !w[1]), "{d:?}");
        }
        assert!(h.comparisons.windows(2).all(|w| w[0].p_value <= w[1].p_value));
        assert!(holm_vs_best(&f, &[1.5]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let csv = "block,A,B,C\nx,0.1,0.2,0.3\ny,0.3,0.2,0.1\n";
        let m = ResultMatrix::from_csv(csv.as_bytes()).unwrap();
        assert_eq!(m.treatment_labels, vec!["A", "B", "C"]);
        assert_eq!(m.values[1], vec![0.3, 0.2, 0.1]);
        assert!(ResultMatrix::from_csv("block,A,B,C\nx,0.1,oops,0.3\ny,1,2,3\n".as_bytes()).is_err());
        let f = friedman(&m, 0.05);
        let mut out = Vec::new();
        write_heatmap_csv(&f, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap().lines().count(), 4);
        assert!(heatmap_svg(&f).starts_with("<svg"));
    }
}
