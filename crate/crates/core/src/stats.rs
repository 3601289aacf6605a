//! Step-2 descriptive statistics and the sample autocorrelation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{mean, sample_variance};
use crate::process::RateSeries;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("empty input")]
    EmptyInput,
    #[error("series is constant; autocorrelation is undefined")]
    ZeroVariance,
    #[error("series of length {n} is too short for lag {h_max}")]
    TooShort { n: usize, h_max: usize },
    #[error("mean is zero; dispersion ratio is undefined")]
    ZeroMean,
}

/// Five-number summary plus quartiles (for boxplot data).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
    /// Sample variance (n-1 denominator); 0 when n = 1.
    pub variance: f64,
    /// Set when n = 1 and the variance is undefined.
    pub variance_undefined: bool,
}

/// Linear-interpolation quantile of sorted data (type 7).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(values: &[f64]) -> Result<SummaryStats, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    Ok(SummaryStats {
        n,
        min: sorted[0],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q3: quantile_sorted(&sorted, 0.75),
        max: sorted[n - 1],
        mean: mean(values),
        variance: sample_variance(values),
        variance_undefined: n < 2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfCurve {
    pub lags: Vec<usize>,
    pub rho: Vec<f64>,
}

/// Sample autocorrelation at lags `1..=h_max`, normalised by the total sum
/// of squares so that the sequence is positive semidefinite and |rho| <= 1.
pub fn acf(values: &[f64], h_max: usize) -> Result<AcfCurve, StatsError> {
    let n = values.len();
    if n < h_max + 2 {
        return Err(StatsError::TooShort { n, h_max });
    }
    let m = mean(values);
    let centered: Vec<f64> = values.iter().map(|v| v - m).collect();
    let denom: f64 = centered.iter().map(|v| v * v).sum();
    if denom <= 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let autocov = |h: usize| centered[..n - h].iter().zip(&centered[h..]).map(|(a, b)| a * b).sum::<f64>();
    debug_assert!((autocov(0) / denom - 1.0).abs() < 1e-12);
    let lags: Vec<usize> = (1..=h_max).collect();
    let rho = lags.iter().map(|&h| autocov(h) / denom).collect();
    Ok(AcfCurve { lags, rho })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionHint {
    /// Variance-to-mean ratio; 1 for a Poisson count process.
    pub ratio: f64,
    pub overdispersed: bool,
}

pub const DEFAULT_DISPERSION_THRESHOLD: f64 = 1.5;

/// Flags rate series whose variance clearly exceeds their mean. This is only
/// a hint that the arrivals are not Poisson; the formal check is
/// [`crate::gof::poisson_test`].
pub fn dispersion_hint(series: &RateSeries, threshold: f64) -> Result<DispersionHint, StatsError> {
    let values = series.values();
    if values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let m = mean(&values);
    if m <= 0.0 {
        return Err(StatsError::ZeroMean);
    }
    let ratio = sample_variance(&values) / m;
    Ok(DispersionHint { ratio, overdispersed: ratio > threshold })
}
