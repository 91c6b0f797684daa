//! Skewness and normal Q-Q data for transformed features.

use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc_inv;

use crate::error::{Error, Result};
use crate::stats::normal_sf;
use crate::transforms::TransformKind;

/// Transforms whose Q-Q series are emitted unless asked otherwise.
pub const DEFAULT_QQ_TRANSFORMS: [TransformKind; 3] = [TransformKind::Raw, TransformKind::Woe, TransformKind::ZScore];

fn central_moments(values: &[f64]) -> (f64, f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut m2, mut m3) = (0.0, 0.0);
    for v in values {
        let d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    (mean, m2 / n, m3 / n)
}

/// Sample skewness `m3 / m2^1.5` from population central moments.
pub fn skewness(values: &[f64]) -> Result<f64> {
    if values.len() < 3 {
        return Err(Error::Domain(format!("skewness needs at least 3 values, got {}", values.len())));
    }
    let (mean, m2, m3) = central_moments(values);
    if m2 <= f64::EPSILON * f64::EPSILON * mean * mean {
        return Err(Error::Domain("skewness of a constant sample is undefined".into()));
    }
    Ok(m3 / m2.powf(1.5))
}

/// Inverse standard normal CDF, refined by one Newton step.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("quantile probability {p} is outside (0, 1)")));
    }
    let mut x = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    // Φ(x) - p, evaluated on the short tail for accuracy
    let err = if x < 0.0 { normal_sf(-x) - p } else { (1.0 - p) - normal_sf(x) };
    let density = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if density > 0.0 {
        x -= err / density;
    }
    Ok(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QqSeries {
    pub feature_name: String,
    pub transform: TransformKind,
    /// `(theoretical, sample)` with the sample standardized.
    pub points: Vec<(f64, f64)>,
}

/// Hazen plotting positions `(i - 0.5) / n` against the standardized sorted
/// sample.
pub fn qq_points(values: &[f64]) -> Result<Vec<(f64, f64)>> {
    let n = values.len();
    if n < 3 {
        return Err(Error::Domain(format!("Q-Q plot needs at least 3 values, got {n}")));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    if !(sd > f64::EPSILON * mean.abs()) {
        return Err(Error::Domain("Q-Q plot of a constant sample is undefined".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .iter()
        .enumerate()
        .map(|(i, v)| Ok((normal_quantile((i as f64 + 0.5) / n as f64)?, (v - mean) / sd)))
        .collect()
}

pub fn qq_series(feature_name: &str, transform: TransformKind, values: &[f64]) -> Result<QqSeries> {
    Ok(QqSeries {
        feature_name: feature_name.to_string(),
        transform,
        points: qq_points(values)?,
    })
}

pub fn write_qq_csv(series: &QqSeries, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["theoretical", "sample"])?;
    for (t, s) in &series.points {
        w.write_record([t.to_string(), s.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("qq series", e))?;
    Ok(())
}

/// Scatter of the series with the identity line.
pub fn qq_svg(series: &QqSeries) -> String {
    let (w, h, pad) = (360.0, 360.0, 30.0);
    let lim = series
        .points
        .iter()
        .flat_map(|(a, b)| [a.abs(), b.abs()])
        .filter(|v| v.is_finite())
        .fold(1.0f64, f64::max);
    let sx = |v: f64| pad + (v + lim) / (2.0 * lim) * (w - 2.0 * pad);
    let sy = |v: f64| h - pad - (v + lim) / (2.0 * lim) * (h - 2.0 * pad);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <text x=\"{pad}\" y=\"18\">{} ({})</text>\n\
         <line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#d33\"/>\n",
        series.feature_name.replace('&', "&amp;").replace('<', "&lt;"),
        series.transform.label(),
        sx(-lim),
        sy(-lim),
        sx(lim),
        sy(lim)
    );
    for (t, v) in &series.points {
        s += &format!("<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"1.5\" fill=\"#236\"/>\n", sx(*t), sy(*v));
    }
    s += "</svg>\n";
    s
}
