//! Univariate feature scoring (two-group ANOVA F) and top-k selection.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureScore {
    pub feature_index: usize,
    pub score: f64,
    pub rank: usize,
}

/// One-way ANOVA F statistic of `feature` split by the binary label.
///
/// Zero within-group variance yields `0.0` when the group means agree and
/// `f64::MAX` when they differ.
pub fn anova_f_score(feature: &[f64], labels: &[u8]) -> Result<f64> {
    if feature.len() != labels.len() {
        return Err(Error::Dimension {
            expected: feature.len(),
            got: labels.len(),
        });
    }
    let n = feature.len();
    let (mut n1, mut s1, mut s0) = (0usize, 0.0, 0.0);
    for (&x, &y) in feature.iter().zip(labels) {
        if y == 1 {
            n1 += 1;
            s1 += x;
        } else {
            s0 += x;
        }
    }
    let n0 = n - n1;
    if n1 == 0 || n0 == 0 {
        return Err(Error::Fit("feature scoring needs both classes".into()));
    }
    if n < 3 {
        return Err(Error::Fit("feature scoring needs at least 3 rows".into()));
    }
    let m1 = s1 / n1 as f64;
    let m0 = s0 / n0 as f64;
    let ssw: f64 = feature
        .iter()
        .zip(labels)
        .map(|(&x, &y)| {
            let d = x - if y == 1 { m1 } else { m0 };
            d * d
        })
        .sum();
    let d = m1 - m0;
    // SSB for two groups: n1*n0/n * (m1-m0)^2
    let ssb = (n1 as f64) * (n0 as f64) / n as f64 * d * d;
    let scale = m1.abs().max(m0.abs()).max(1.0);
    let ssw_negligible = ssw <= (f64::EPSILON * scale).powi(2) * n as f64;
    if ssw_negligible {
        return Ok(if ssb == 0.0 { 0.0 } else { f64::MAX });
    }
    Ok(ssb / (ssw / (n - 2) as f64))
}

/// Scores every column; ranks follow descending score, ties by lower index.
pub fn score_features(features: &Matrix, labels: &[u8]) -> Result<Vec<FeatureScore>> {
    let scores = (0..features.cols())
        .map(|j| anova_f_score(&features.column(j), labels))
        .collect::<Result<Vec<_>>>()?;
    Ok(rank_scores(&scores))
}

pub fn rank_scores(scores: &[f64]) -> Vec<FeatureScore> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut out: Vec<FeatureScore> = scores
        .iter()
        .enumerate()
        .map(|(i, &s)| FeatureScore {
            feature_index: i,
            score: s,
            rank: 0,
        })
        .collect();
    for (r, &i) in order.iter().enumerate() {
        out[i].rank = r + 1;
    }
    out
}

/// Indices of the `k` best-ranked features, ascending.
pub fn select_top_k(scores: &[FeatureScore], k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > scores.len() {
        return Err(Error::Config(format!(
            "top_k must be in 1..={}, got {k}",
            scores.len()
        )));
    }
    let mut picked: Vec<usize> = scores
        .iter()
        .filter(|s| s.rank <= k)
        .map(|s| s.feature_index)
        .collect();
    picked.sort_unstable();
    Ok(picked)
}

/// Audit CSV: `feature_name,score,rank,selected`.
pub fn write_scores_csv(
    scores: &[FeatureScore],
    names: &[String],
    selected: &[usize],
    out: impl Write,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["feature_name", "score", "rank", "selected"])?;
    for s in scores {
        w.write_record([
            names[s.feature_index].clone(),
            format!("{}", s.score),
            s.rank.to_string(),
            selected.contains(&s.feature_index).to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(Path::new("<scores>"), e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_anova() {
        let f = anova_f_score(&[1.0, 2.0, 3.0, 4.0], &[0, 0, 1, 1]).unwrap();
        assert!((f - 8.0).abs() < 1e-12);
    }

    #[test]
    fn constant_feature_scores_zero() {
        assert_eq!(anova_f_score(&[3.0; 5], &[0, 1, 0, 1, 1]).unwrap(), 0.0);
    }

    #[test]
    fn label_copy_beats_everything() {
        let y = [0u8, 1, 0, 1, 1, 0];
        let copy: Vec<f64> = y.iter().map(|&v| f64::from(v)).collect();
        let noisy = [0.1, 0.9, 0.3, 0.6, 0.8, 0.4];
        let a = anova_f_score(&copy, &y).unwrap();
        let b = anova_f_score(&noisy, &y).unwrap();
        assert_eq!(a, f64::MAX);
        assert!(a > b);
    }

    #[test]
    fn single_class_errors() {
        assert!(anova_f_score(&[1.0, 2.0, 3.0], &[1, 1, 1]).is_err());
    }

    #[test]
    fn top_k_tie_rule() {
        let scores = rank_scores(&[1.0, 5.0, 0.5, 2.0, 3.0, 0.1, 0.2, 3.0]);
        // 4 and 7 tie at 3.0 behind index 1; one slot left after {1}
        assert_eq!(select_top_k(&scores, 2).unwrap(), vec![1, 4]);
        assert_eq!(
            select_top_k(&scores, 8).unwrap(),
            (0..8).collect::<Vec<_>>()
        );
        assert!(select_top_k(&scores, 9).is_err());
        let ranks: Vec<usize> = scores.iter().map(|s| s.rank).collect();
        let mut sorted = ranks.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (1..=8).collect::<Vec<_>>());
    }

    #[test]
    fn audit_csv_lists_every_feature() {
        let scores = rank_scores(&[2.0, 1.0]);
        let mut buf = Vec::new();
        write_scores_csv(&scores, &["a".into(), "b".into()], &[0], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(
            s,
            "feature_name,score,rank,selected\na,2,1,true\nb,1,2,false\n"
        );
    }
}
