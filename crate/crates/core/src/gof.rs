//! Goodness of fit of inter-arrival times to the exponential law, i.e.
//! testing whether arrivals form a homogeneous Poisson process.
//!
//! The scale is estimated from the data, so the critical values must come
//! from estimated-parameter tables. The defaults are CM 0.22 and AD 1.13
//! (close to the 5% and 10% points of Stephens' tables for the exponential
//! family) and KS 0.01. With the `√n sup |F_n - F|` form used here a KS
//! critical value of 0.01 rejects practically every sample; override
//! `ks_critical` (about 1.09 for 5%) when the KS decision matters.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GofError {
    #[error("gap {index} is not positive ({value})")]
    NonPositiveGap { index: usize, value: f64 },
    #[error("need at least {min} gaps, got {n}")]
    TooFew { n: usize, min: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialFit {
    pub lambda_hat: f64,
    pub n: usize,
}

impl ExponentialFit {
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-self.lambda_hat * x).exp_m1()
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        -(-p).ln_1p() / self.lambda_hat
    }
}

/// Closed-form MLE `λ̂ = n / Σ x`.
pub fn fit_exponential(gaps: &[f64]) -> Result<ExponentialFit, GofError> {
    if gaps.len() < 2 {
        return Err(GofError::TooFew { n: gaps.len(), min: 2 });
    }
    if let Some((index, &value)) = gaps.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
        return Err(GofError::NonPositiveGap { index, value });
    }
    let total: f64 = gaps.iter().sum();
    Ok(ExponentialFit { lambda_hat: gaps.len() as f64 / total, n: gaps.len() })
}

fn transformed_sorted(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut u: Vec<f64> = sample.iter().map(|&x| cdf(x)).collect();
    u.sort_by(f64::total_cmp);
    u
}

/// `√n · max_i max(i/n - u_(i), u_(i) - (i-1)/n)`.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let u = transformed_sorted(sample, cdf);
    let n = u.len() as f64;
    let d = u
        .iter()
        .enumerate()
        .map(|(i, &ui)| {
            let i = i as f64;
            ((i + 1.0) / n - ui).max(ui - i / n)
        })
        .fold(0.0, f64::max);
    n.sqrt() * d
}

/// `1/(12n) + Σ_i (u_(i) - (2i-1)/(2n))²`.
pub fn cm_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let u = transformed_sorted(sample, cdf);
    let n = u.len() as f64;
    let s: f64 = u
        .iter()
        .enumerate()
        .map(|(i, &ui)| {
            let e = ui - (2.0 * i as f64 + 1.0) / (2.0 * n);
            e * e
        })
        .sum();
    1.0 / (12.0 * n) + s
}

/// `-n - (1/n) Σ_i (2i-1) [ln u_(i) + ln(1 - u_(n+1-i))]`, or +∞ when some
/// u lands on 0 or 1.
pub fn ad_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let u = transformed_sorted(sample, cdf);
    if u.iter().any(|&v| v <= 0.0 || v >= 1.0) {
        return f64::INFINITY;
    }
    let n = u.len();
    let s: f64 = (0..n)
        .map(|i| (2.0 * i as f64 + 1.0) * (u[i].ln() + (-u[n - 1 - i]).ln_1p()))
        .sum();
    -(n as f64) - s / n as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GofConfig {
    pub ks_critical: f64,
    pub cm_critical: f64,
    pub ad_critical: f64,
}

impl Default for GofConfig {
    fn default() -> Self {
        GofConfig { ks_critical: 0.01, cm_critical: 0.22, ad_critical: 1.13 }
    }
}

impl GofConfig {
    /// The default KS value is far below any √n-scaled table entry; callers
    /// may want to warn about it on small samples.
    pub fn ks_is_degenerate(&self, n: usize) -> bool {
        self.ks_critical < 0.1 && n < 1000
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValues {
    pub ks: f64,
    pub cm: f64,
    pub ad: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rejections {
    pub ks: bool,
    pub cm: bool,
    pub ad: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub fit: ExponentialFit,
    pub ks: f64,
    pub cm: f64,
    /// +∞ is written as `null` in JSON.
    #[serde(with = "infinite_as_null")]
    pub ad: f64,
    pub critical: CriticalValues,
    pub reject: Rejections,
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

pub fn poisson_test(gaps: &[f64]) -> Result<GofReport, GofError> {
    poisson_test_with(gaps, &GofConfig::default())
}

pub fn poisson_test_with(gaps: &[f64], cfg: &GofConfig) -> Result<GofReport, GofError> {
    let fit = fit_exponential(gaps)?;
    let cdf = |x| fit.cdf(x);
    let (ks, cm, ad) = (ks_statistic(gaps, cdf), cm_statistic(gaps, cdf), ad_statistic(gaps, cdf));
    Ok(GofReport {
        fit,
        ks,
        cm,
        ad,
        critical: CriticalValues { ks: cfg.ks_critical, cm: cfg.cm_critical, ad: cfg.ad_critical },
        reject: Rejections { ks: ks > cfg.ks_critical, cm: cm > cfg.cm_critical, ad: ad > cfg.ad_critical },
    })
}

/// Exponential QQ points: `F⁻¹((i - 0.5)/n)` against the i-th order statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QqData {
    pub theoretical: Vec<f64>,
    pub empirical: Vec<f64>,
}

impl QqData {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theoretical,empirical\n");
        for (t, e) in self.theoretical.iter().zip(&self.empirical) {
            out.push_str(&format!("{t},{e}\n"));
        }
        out
    }
}

pub fn qq_exponential(gaps: &[f64], fit: &ExponentialFit) -> QqData {
    let mut empirical = gaps.to_vec();
    empirical.sort_by(f64::total_cmp);
    let n = empirical.len() as f64;
    let theoretical = (0..empirical.len()).map(|i| fit.quantile((i as f64 + 0.5) / n)).collect();
    QqData { theoretical, empirical }
}
