//! Per-feature data transformations, each split into a `fit` on training data
//! and an `apply` that can run on any rows.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TransformKind {
    Raw,
    Log,
    Rank,
    BoxCox,
    ZScore,
    EqualWidth,
    Woe,
}

impl TransformKind {
    pub const ALL: [TransformKind; 7] = [
        TransformKind::Raw,
        TransformKind::Log,
        TransformKind::Rank,
        TransformKind::BoxCox,
        TransformKind::ZScore,
        TransformKind::EqualWidth,
        TransformKind::Woe,
    ];

    /// Identifier used in configs and JSON.
    pub fn key(self) -> &'static str {
        match self {
            TransformKind::Raw => "RAW",
            TransformKind::Log => "LOG",
            TransformKind::Rank => "RANK",
            TransformKind::BoxCox => "BOX_COX",
            TransformKind::ZScore => "Z_SCORE",
            TransformKind::EqualWidth => "EQUAL_WIDTH",
            TransformKind::Woe => "WOE",
        }
    }

    /// Name used in result tables (`dt_method` column).
    pub fn label(self) -> &'static str {
        match self {
            TransformKind::Raw => "RAW",
            TransformKind::Log => "LOG",
            TransformKind::Rank => "RANK",
            TransformKind::BoxCox => "BOX-COX",
            TransformKind::ZScore => "Z-SCORE",
            TransformKind::EqualWidth => "Discritization",
            TransformKind::Woe => "WOE",
        }
    }

    pub fn needs_labels(self) -> bool {
        self == TransformKind::Woe
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for TransformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_uppercase();
        Ok(match norm.as_str() {
            "RAW" | "NONE" => TransformKind::Raw,
            "LOG" => TransformKind::Log,
            "RANK" => TransformKind::Rank,
            "BOXCOX" => TransformKind::BoxCox,
            "ZSCORE" => TransformKind::ZScore,
            "EQUALWIDTH" | "DISCRETIZATION" | "DISCRITIZATION" => TransformKind::EqualWidth,
            "WOE" => TransformKind::Woe,
            _ => return Err(Error::Config(format!("unknown transform '{s}'"))),
        })
    }
}

/// Where transforms (and feature selection) are fitted during cross-validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitScope {
    /// Fit on each fold's training part only.
    #[default]
    TrainFold,
    /// Fit once on the whole dataset before splitting.
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransformConfig {
    pub lambda: f64,
    pub bins_b: usize,
    pub woe_bins: usize,
    pub woe_smoothing: f64,
    pub fit_scope: FitScope,
}

impl Default for TransformConfig {
    fn default() -> Self {
        TransformConfig {
            lambda: 0.5,
            bins_b: 10,
            woe_bins: 10,
            woe_smoothing: 0.5,
            fit_scope: FitScope::TrainFold,
        }
    }
}

impl TransformConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lambda == 0.0 || !self.lambda.is_finite() {
            return Err(Error::Config(
                "Box-Cox lambda must be finite and non-zero".into(),
            ));
        }
        if self.bins_b < 2 {
            return Err(Error::Config("bins_b must be at least 2".into()));
        }
        if self.woe_bins < 2 {
            return Err(Error::Config("woe_bins must be at least 2".into()));
        }
        if !(self.woe_smoothing >= 0.0 && self.woe_smoothing.is_finite()) {
            return Err(Error::Config("woe_smoothing must be non-negative".into()));
        }
        Ok(())
    }
}

/// `ln(x+1)` at zero and `ln(x)` for positive `x`.
///
/// This is discontinuous on `(0, 1)`: values there map below zero while zero
/// itself maps to zero.
pub fn log_value(x: f64) -> Result<f64> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::Domain(format!(
            "log transform needs x >= 0, got {x}"
        )));
    }
    Ok(if x == 0.0 { (x + 1.0).ln() } else { x.ln() })
}

/// Power transform `(x^lambda - 1) / lambda`.
pub fn boxcox_value(x: f64, lambda: f64) -> Result<f64> {
    if lambda == 0.0 {
        return Err(Error::Config("Box-Cox lambda must be non-zero".into()));
    }
    if x <= 0.0 || x.is_nan() {
        return Err(Error::Domain(format!("Box-Cox needs x > 0, got {x}")));
    }
    Ok((x.powf(lambda) - 1.0) / lambda)
}

/// Decile rank in `1..=10`. A value equal to a cut point belongs to the lower interval.
pub fn rank_value(x: f64, boundaries: &[f64]) -> u32 {
    boundaries.partition_point(|&q| q < x) as u32 + 1
}

/// Equal-width bin in `1..=b` for `b + 1` edges; out-of-range values clamp.
pub fn discretize_value(x: f64, edges: &[f64]) -> u32 {
    let b = edges.len() - 1;
    if x <= edges[0] {
        return 1;
    }
    if x >= edges[b] {
        return b as u32;
    }
    (edges.partition_point(|&e| e <= x).clamp(1, b)) as u32
}

/// Linear-interpolation percentile of sorted data, `p` in `[0, 1]`.
pub fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Nine decile cut points (10th..90th percentiles).
pub fn decile_boundaries(values: &[f64]) -> Vec<f64> {
    let s = sorted_copy(values);
    (1..=9)
        .map(|k| percentile_sorted(&s, k as f64 / 10.0))
        .collect()
}

/// How a WOE table assigns values to bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "keys", rename_all = "snake_case")]
pub enum WoeBinning {
    /// One bin per distinct value (sorted).
    Categories(Vec<f64>),
    /// Equal-frequency cut points; a value `x` lands in bin `#{cut < x}`.
    Cuts(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WoeTable {
    pub binning: WoeBinning,
    pub woe: Vec<f64>,
}

impl WoeTable {
    fn bin_of(&self, x: f64) -> Option<usize> {
        match &self.binning {
            WoeBinning::Categories(keys) => keys.binary_search_by(|k| k.total_cmp(&x)).ok(),
            WoeBinning::Cuts(cuts) => Some(cuts.partition_point(|&c| c < x)),
        }
    }

    /// WOE for `x`; unseen categories carry no evidence.
    pub fn value(&self, x: f64) -> f64 {
        self.bin_of(x).map_or(0.0, |b| self.woe[b])
    }

    pub fn n_bins(&self) -> usize {
        self.woe.len()
    }
}

fn has_both_classes(labels: &[u8]) -> bool {
    labels.contains(&0) && labels.contains(&1)
}

/// Weight of evidence, `ln(churn share / non-churn share)` per bin.
///
/// Features with at most `bins` distinct values get one bin per value;
/// others are cut into `bins` equal-frequency bins. Counts are smoothed by
/// `smoothing` per bin. With zero smoothing, a bin with an empty class gets
/// the half-count correction so every value stays finite.
pub fn woe_table(feature: &[f64], labels: &[u8], bins: usize, smoothing: f64) -> Result<WoeTable> {
    if feature.len() != labels.len() {
        return Err(Error::Dimension {
            expected: feature.len(),
            got: labels.len(),
        });
    }
    if !has_both_classes(labels) {
        return Err(Error::Fit("WOE needs both churn and non-churn rows".into()));
    }
    let sorted = sorted_copy(feature);
    let mut distinct = sorted.clone();
    distinct.dedup();

    let binning = if distinct.len() <= bins {
        WoeBinning::Categories(distinct)
    } else {
        let max = sorted[sorted.len() - 1];
        let mut cuts: Vec<f64> = (1..bins)
            .map(|i| percentile_sorted(&sorted, i as f64 / bins as f64))
            .filter(|&c| c < max)
            .collect();
        cuts.dedup();
        WoeBinning::Cuts(cuts)
    };
    let n_bins = match &binning {
        WoeBinning::Categories(k) => k.len(),
        WoeBinning::Cuts(c) => c.len() + 1,
    };

    let mut table = WoeTable {
        binning,
        woe: vec![0.0; n_bins],
    };
    let mut churn = vec![0.0f64; n_bins];
    let mut stay = vec![0.0f64; n_bins];
    for (&x, &y) in feature.iter().zip(labels) {
        let b = table.bin_of(x).expect("fitted value has a bin");
        if y == 1 {
            churn[b] += 1.0;
        } else {
            stay[b] += 1.0;
        }
    }
    let total_churn: f64 = churn.iter().sum();
    let total_stay: f64 = stay.iter().sum();
    let nb = n_bins as f64;
    for b in 0..n_bins {
        let s = if smoothing == 0.0 && (churn[b] == 0.0 || stay[b] == 0.0) {
            0.5
        } else {
            smoothing
        };
        let p_churn = (churn[b] + s) / (total_churn + s * nb);
        let p_stay = (stay[b] + s) / (total_stay + s * nb);
        // difference of logs keeps label swapping an exact negation
        table.woe[b] = p_churn.ln() - p_stay.ln();
    }
    Ok(table)
}

/// Learned parameters for one feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FeatureParams {
    Identity,
    /// `shift` is added before the transform; `floor` is the smallest shifted
    /// training value, used for out-of-domain inputs at apply time.
    Log {
        shift: f64,
        floor: f64,
    },
    BoxCox {
        shift: f64,
        floor: f64,
        lambda: f64,
    },
    ZScore {
        mean: f64,
        std: f64,
    },
    Rank {
        boundaries: Vec<f64>,
    },
    EqualWidth {
        edges: Vec<f64>,
    },
    Woe(WoeTable),
}

impl FeatureParams {
    pub fn apply_value(&self, x: f64) -> f64 {
        match self {
            FeatureParams::Identity => x,
            FeatureParams::Log { shift, floor } => {
                let v = x + shift;
                let v = if v < 0.0 { *floor } else { v };
                log_value(v).expect("shifted value is non-negative")
            }
            FeatureParams::BoxCox {
                shift,
                floor,
                lambda,
            } => {
                let v = x + shift;
                let v = if v <= 0.0 { *floor } else { v };
                boxcox_value(v, *lambda).expect("shifted value is positive")
            }
            FeatureParams::ZScore { mean, std } => {
                if *std > 0.0 {
                    (x - mean) / std
                } else {
                    0.0
                }
            }
            FeatureParams::Rank { boundaries } => f64::from(rank_value(x, boundaries)),
            FeatureParams::EqualWidth { edges } => f64::from(discretize_value(x, edges)),
            FeatureParams::Woe(t) => t.value(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedTransform {
    pub kind: TransformKind,
    pub features: Vec<FeatureParams>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    // a constant column must give exactly zero spread, whatever the rounding in `mean`
    if values.len() < 2 || values.iter().all(|v| *v == values[0]) {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

fn equal_width_edges(values: &[f64], b: usize) -> Vec<f64> {
    let (lo, hi) = min_max(values);
    // a constant column gets unit-width bins so edges stay strictly increasing
    let width = if hi > lo { (hi - lo) / b as f64 } else { 1.0 };
    let mut edges: Vec<f64> = (0..=b).map(|i| lo + i as f64 * width).collect();
    if hi > lo {
        edges[b] = hi;
    }
    edges
}

fn fit_feature(
    kind: TransformKind,
    col: &[f64],
    labels: &[u8],
    config: &TransformConfig,
) -> Result<FeatureParams> {
    Ok(match kind {
        TransformKind::Raw => FeatureParams::Identity,
        TransformKind::Log => {
            let (lo, _) = min_max(col);
            let shift = if lo < 0.0 { 1.0 - lo } else { 0.0 };
            let floor = lo + shift;
            if floor < 0.0 {
                return Err(Error::Fit(
                    "log transform input negative after shift".into(),
                ));
            }
            FeatureParams::Log { shift, floor }
        }
        TransformKind::BoxCox => {
            let (lo, _) = min_max(col);
            let shift = if lo <= 0.0 { 1.0 - lo } else { 0.0 };
            let floor = lo + shift;
            if floor <= 0.0 {
                return Err(Error::Fit("Box-Cox input non-positive after shift".into()));
            }
            FeatureParams::BoxCox {
                shift,
                floor,
                lambda: config.lambda,
            }
        }
        TransformKind::ZScore => {
            let (mean, std) = mean_std(col);
            FeatureParams::ZScore { mean, std }
        }
        TransformKind::Rank => FeatureParams::Rank {
            boundaries: decile_boundaries(col),
        },
        TransformKind::EqualWidth => FeatureParams::EqualWidth {
            edges: equal_width_edges(col, config.bins_b),
        },
        TransformKind::Woe => FeatureParams::Woe(woe_table(
            col,
            labels,
            config.woe_bins,
            config.woe_smoothing,
        )?),
    })
}

/// Learns per-feature parameters. Labels are read only by WOE.
pub fn fit(
    kind: TransformKind,
    features: &Matrix,
    labels: &[u8],
    config: &TransformConfig,
) -> Result<FittedTransform> {
    config.validate()?;
    if !features.is_finite() {
        return Err(Error::Fit("features contain non-finite values".into()));
    }
    if features.rows() == 0 {
        return Err(Error::Fit("cannot fit a transform on zero rows".into()));
    }
    if kind.needs_labels() {
        if labels.len() != features.rows() {
            return Err(Error::Dimension {
                expected: features.rows(),
                got: labels.len(),
            });
        }
        if !has_both_classes(labels) {
            return Err(Error::Fit("WOE needs both churn and non-churn rows".into()));
        }
    }
    let params = (0..features.cols())
        .map(|j| fit_feature(kind, &features.column(j), labels, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(FittedTransform {
        kind,
        features: params,
    })
}

impl FittedTransform {
    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn apply(&self, features: &Matrix) -> Result<Matrix> {
        apply(self, features)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn apply(fitted: &FittedTransform, features: &Matrix) -> Result<Matrix> {
    features.check_cols(fitted.n_features())?;
    if fitted.kind == TransformKind::Raw {
        return Ok(features.clone());
    }
    let mut out = Matrix::zeros(features.rows(), features.cols());
    for i in 0..features.rows() {
        for (j, p) in fitted.features.iter().enumerate() {
            out.set(i, j, p.apply_value(features.get(i, j)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn col(values: &[f64]) -> Matrix {
        Matrix::from_columns(&[values.to_vec()]).unwrap()
    }

    #[test]
    fn log_examples() {
        assert_eq!(log_value(0.0).unwrap(), 0.0);
        assert_eq!(log_value(1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(
            log_value(std::f64::consts::E).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert!(matches!(log_value(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn boxcox_examples() {
        assert_eq!(boxcox_value(1.0, 0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(boxcox_value(4.0, 0.5).unwrap(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(boxcox_value(9.0, 0.5).unwrap(), 4.0, epsilon = 1e-15);
        assert!(matches!(boxcox_value(0.0, 0.5), Err(Error::Domain(_))));
        assert!(matches!(boxcox_value(2.0, 0.0), Err(Error::Config(_))));
    }

    #[test]
    fn zscore_fit_and_apply() {
        let f = fit(
            TransformKind::ZScore,
            &col(&[1.0, 2.0, 3.0]),
            &[],
            &TransformConfig::default(),
        )
        .unwrap();
        assert_eq!(
            f.features[0],
            FeatureParams::ZScore {
                mean: 2.0,
                std: 1.0
            }
        );
        assert_eq!(f.apply(&col(&[3.0])).unwrap().get(0, 0), 1.0);
    }

    #[test]
    fn zscore_constant_column_maps_to_zero() {
        let f = fit(
            TransformKind::ZScore,
            &col(&[4.0, 4.0]),
            &[],
            &TransformConfig::default(),
        )
        .unwrap();
        assert_eq!(f.apply(&col(&[4.0, 9.0])).unwrap().as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn deciles_of_one_to_hundred() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        let q = decile_boundaries(&v);
        for (k, qk) in q.iter().enumerate() {
            // inclusive interpolation: position p*(n-1)
            assert_abs_diff_eq!(*qk, 1.0 + (k as f64 + 1.0) * 0.1 * 99.0, epsilon = 1e-12);
        }
        assert_eq!(rank_value(1.0, &q), 1);
        assert_eq!(rank_value(100.0, &q), 10);
        assert_eq!(rank_value(-5.0, &q), 1);
        assert_eq!(rank_value(500.0, &q), 10);
    }

    #[test]
    fn rank_tie_matches_interval_scan() {
        let q: Vec<f64> = (1..=9).map(|k| f64::from(k) * 10.0).collect();
        // brute force: first k with x in [Q_{k-1}, Q_k], Q_0 = -inf, Q_10 = +inf
        let scan = |x: f64| -> u32 {
            for k in 1..=9 {
                if x <= q[k - 1] {
                    return k as u32;
                }
            }
            10
        };
        for x in [q[4], q[0], q[8], 55.0, 0.0, 95.0] {
            assert_eq!(rank_value(x, &q), scan(x));
        }
        assert_eq!(rank_value(q[4], &q), 5);
    }

    #[test]
    fn discretize_examples() {
        let edges: Vec<f64> = (0..=10).map(f64::from).collect();
        assert_eq!(discretize_value(0.0, &edges), 1);
        assert_eq!(discretize_value(10.0, &edges), 10);
        assert_eq!(discretize_value(3.5, &edges), 4);
        // brute-force scan of [e_{i-1}, e_i)
        for x in [0.2, 1.0, 3.5, 7.99, 9.5] {
            let expected = (1..=10)
                .find(|&i| x >= edges[i - 1] && x < edges[i])
                .unwrap() as u32;
            assert_eq!(discretize_value(x, &edges), expected);
        }
    }

    #[test]
    fn woe_examples() {
        // churn 30/100 and non-churn 10/100 in bin 0, remainder in bin 1
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..100 {
            x.push(if i < 30 { 0.0 } else { 1.0 });
            y.push(1);
        }
        for i in 0..100 {
            x.push(if i < 10 { 0.0 } else { 1.0 });
            y.push(0);
        }
        let t = woe_table(&x, &y, 10, 0.0).unwrap();
        assert_abs_diff_eq!(t.value(0.0), 3.0f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(t.value(0.0), 1.0986, epsilon = 1e-4);
        assert_eq!(t.value(7.0), 0.0);
    }

    #[test]
    fn woe_equal_proportions_is_zero() {
        let x = vec![0.0, 0.0, 1.0, 1.0];
        let y = vec![1, 0, 1, 0];
        let t = woe_table(&x, &y, 10, 0.5).unwrap();
        assert_eq!(t.value(0.0), 0.0);
        assert_eq!(t.value(1.0), 0.0);
    }

    #[test]
    fn woe_single_class_is_fit_error() {
        let m = col(&[1.0, 2.0, 3.0]);
        assert!(matches!(
            fit(
                TransformKind::Woe,
                &m,
                &[1, 1, 1],
                &TransformConfig::default()
            ),
            Err(Error::Fit(_))
        ));
    }

    #[test]
    fn woe_continuous_uses_equal_frequency_bins() {
        let x: Vec<f64> = (0..200).map(f64::from).collect();
        let y: Vec<u8> = (0..200).map(|i| u8::from(i % 3 == 0)).collect();
        let t = woe_table(&x, &y, 10, 0.5).unwrap();
        assert_eq!(t.n_bins(), 10);
        assert!(t.woe.iter().all(|w| w.is_finite()));
    }

    #[test]
    fn log_shift_and_clamp() {
        let f = fit(
            TransformKind::Log,
            &col(&[-2.0, 0.0, 5.0]),
            &[],
            &TransformConfig::default(),
        )
        .unwrap();
        assert_eq!(
            f.features[0],
            FeatureParams::Log {
                shift: 3.0,
                floor: 1.0
            }
        );
        let out = f.apply(&col(&[-2.0, -10.0])).unwrap();
        assert_eq!(out.get(0, 0), 0.0);
        assert_eq!(out.get(1, 0), 0.0);
    }

    #[test]
    fn raw_apply_is_bitwise_identity() {
        let m = Matrix::from_rows(&[vec![1.5, -0.0], vec![f64::MIN_POSITIVE, 3.0]]).unwrap();
        let f = fit(TransformKind::Raw, &m, &[], &TransformConfig::default()).unwrap();
        let out = f.apply(&m).unwrap();
        let bits = |m: &Matrix| m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&out), bits(&m));
    }

    #[test]
    fn apply_checks_dimensions() {
        let f = fit(
            TransformKind::ZScore,
            &col(&[1.0, 2.0]),
            &[],
            &TransformConfig::default(),
        )
        .unwrap();
        let wide = Matrix::zeros(1, 2);
        assert!(matches!(f.apply(&wide), Err(Error::Dimension { .. })));
    }

    #[test]
    fn config_validation() {
        let bad = TransformConfig {
            lambda: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = TransformConfig {
            bins_b: 1,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn fitted_transform_json_round_trip() {
        let m =
            Matrix::from_columns(&[vec![1.0, 2.0, 3.0, 4.0], vec![0.0, 1.0, 0.0, 1.0]]).unwrap();
        let y = vec![0, 1, 0, 1];
        for kind in TransformKind::ALL {
            let f = fit(kind, &m, &y, &TransformConfig::default()).unwrap();
            let back = FittedTransform::from_json(&f.to_json().unwrap()).unwrap();
            assert_eq!(back, f);
        }
    }

    #[test]
    fn kind_parsing() {
        assert_eq!(
            "box-cox".parse::<TransformKind>().unwrap(),
            TransformKind::BoxCox
        );
        assert_eq!(
            "Discritization".parse::<TransformKind>().unwrap(),
            TransformKind::EqualWidth
        );
        assert_eq!(
            "Z_SCORE".parse::<TransformKind>().unwrap(),
            TransformKind::ZScore
        );
        assert!("arcsine".parse::<TransformKind>().is_err());
    }
}
