//! Heavy-tail analysis by peaks over threshold: exceedances over a high
//! empirical quantile are fitted with a generalized Pareto distribution
//!
//! `Ḡ(y) = (1 + ξ y / β)^(-1/ξ)`, with the `exp(-y/β)` limit at ξ = 0,
//!
//! and the shape ξ decides the regime.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{nelder_mead, NmOptions};
use crate::stats::quantile_sorted;

/// Below this |ξ| the exponential limit of the likelihood is used.
pub const XI_ZERO: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TailError {
    #[error("only {n} exceedances above the threshold, need {min}")]
    TooFewExceedances { n: usize, min: usize },
    #[error("values must be finite")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TailConfig {
    pub threshold_quantile: f64,
    pub min_exceedances: usize,
    /// One-sided z for the ξ > 0 gate.
    pub z: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for TailConfig {
    fn default() -> Self {
        TailConfig { threshold_quantile: 0.90, min_exceedances: 50, z: 1.645, restarts: 5, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpdFit {
    pub threshold: f64,
    pub n_exceed: usize,
    pub xi: f64,
    pub beta: f64,
    /// From the inverse observed information; absent when the Hessian is
    /// not positive definite (for instance ξ ≤ -1/2).
    pub se_xi: Option<f64>,
    pub log_likelihood: f64,
    pub converged: bool,
}

/// GPD log-likelihood of exceedances `y`. `-inf` outside the support.
pub fn gpd_log_likelihood(y: &[f64], xi: f64, beta: f64) -> f64 {
    if !(beta > 0.0) || !xi.is_finite() {
        return f64::NEG_INFINITY;
    }
    let n = y.len() as f64;
    if xi.abs() < XI_ZERO {
        return -n * beta.ln() - y.iter().sum::<f64>() / beta;
    }
    let mut s = 0.0;
    for &v in y {
        let z = 1.0 + xi * v / beta;
        if z <= 0.0 {
            return f64::NEG_INFINITY;
        }
        s += z.ln();
    }
    -n * beta.ln() - (1.0 + 1.0 / xi) * s
}

/// Probability-weighted-moment estimates (ξ, β), used as the starting
/// point of the likelihood search.
pub fn gpd_pwm(y: &[f64]) -> (f64, f64) {
    let mut s = y.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let a0 = s.iter().sum::<f64>() / n;
    let a1 = s.iter().enumerate().map(|(i, v)| (1.0 - (i as f64 + 0.65) / n) * v).sum::<f64>() / n;
    let denom = a0 - 2.0 * a1;
    if !(denom > 0.0) {
        return (0.0, a0.max(f64::MIN_POSITIVE));
    }
    let xi = 2.0 - a0 / denom;
    let beta = 2.0 * a0 * a1 / denom;
    (xi.clamp(-0.9, 2.0), beta.max(f64::MIN_POSITIVE))
}

/// Fit above the configured empirical quantile of `values`.
pub fn fit_gpd(values: &[f64], cfg: &TailConfig) -> Result<GpdFit, TailError> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(TailError::NonFinite);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let threshold = if sorted.is_empty() { 0.0 } else { quantile_sorted(&sorted, cfg.threshold_quantile) };
    let y: Vec<f64> = sorted.iter().filter(|&&v| v > threshold).map(|v| v - threshold).collect();
    let mut fit = fit_exceedances(&y, cfg)?;
    fit.threshold = threshold;
    Ok(fit)
}

/// Fit exceedances that are already measured from the threshold.
pub fn fit_exceedances(y: &[f64], cfg: &TailConfig) -> Result<GpdFit, TailError> {
    if y.len() < cfg.min_exceedances {
        return Err(TailError::TooFewExceedances { n: y.len(), min: cfg.min_exceedances });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(TailError::NonFinite);
    }
    let objective = |p: &[f64]| -gpd_log_likelihood(y, p[0], p[1].exp());
    let opts = NmOptions { max_evals: 4000, f_tol: 1e-13, x_tol: 1e-9, step: 0.1 };

    let (xi0, beta0) = gpd_pwm(y);
    let mut start = vec![xi0, beta0.ln()];
    // The moment start can sit outside the support when ξ < 0.
    if !objective(&start).is_finite() {
        start = vec![0.0, (y.iter().sum::<f64>() / y.len() as f64).ln()];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best = nelder_mead(objective, &start, opts);
    for _ in 0..cfg.restarts {
        let jitter = [rng.gen_range(-0.2..0.2), rng.gen_range(-0.3..0.3)];
        let x0 = [best.x[0] + jitter[0], best.x[1] + jitter[1]];
        let x0 = if objective(&x0).is_finite() { x0.to_vec() } else { start.clone() };
        let r = nelder_mead(objective, &x0, opts);
        if r.f < best.f - 1e-12 * best.f.abs().max(1.0) || (!best.converged && r.converged && r.f <= best.f) {
            best = r;
        }
    }
    let (xi, beta) = (best.x[0], best.x[1].exp());
    let log_likelihood = -best.f;
    Ok(GpdFit {
        threshold: 0.0,
        n_exceed: y.len(),
        xi,
        beta,
        se_xi: standard_error_xi(y, xi, beta),
        log_likelihood,
        converged: best.converged && log_likelihood.is_finite(),
    })
}

/// √[(I⁻¹)_ξξ] with I the central-difference Hessian of the negative
/// log-likelihood in (ξ, β).
fn standard_error_xi(y: &[f64], xi: f64, beta: f64) -> Option<f64> {
    let f = |a: f64, b: f64| -gpd_log_likelihood(y, a, b);
    let hx = 1e-4 * xi.abs().max(0.1);
    let hb = 1e-4 * beta;
    let f0 = f(xi, beta);
    let fxx = (f(xi + hx, beta) - 2.0 * f0 + f(xi - hx, beta)) / (hx * hx);
    let fbb = (f(xi, beta + hb) - 2.0 * f0 + f(xi, beta - hb)) / (hb * hb);
    let fxb = (f(xi + hx, beta + hb) - f(xi + hx, beta - hb) - f(xi - hx, beta + hb) + f(xi - hx, beta - hb))
        / (4.0 * hx * hb);
    let det = fxx * fbb - fxb * fxb;
    let var = fbb / det;
    (fxx > 0.0 && det > 0.0 && var.is_finite() && var > 0.0).then(|| var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TailRegime {
    FiniteVariance,
    InfiniteVariance,
    InfiniteMean,
    NotHeavy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailClassification {
    pub heavy: bool,
    pub regime: TailRegime,
}

/// Heavy means a converged fit with ξ̂ significantly above 0 (ξ̂ - z·se > 0);
/// heavy tails are then split at ξ = 1/2 and ξ = 1.
pub fn classify_tail(fit: &GpdFit, z: f64) -> TailClassification {
    classify(fit.xi, fit.se_xi, fit.converged, z)
}

pub fn classify(xi: f64, se_xi: Option<f64>, converged: bool, z: f64) -> TailClassification {
    let heavy = converged && xi > 0.0 && se_xi.is_some_and(|se| xi - z * se > 0.0);
    let regime = if !heavy {
        TailRegime::NotHeavy
    } else if xi <= 0.5 {
        TailRegime::FiniteVariance
    } else if xi < 1.0 {
        TailRegime::InfiniteVariance
    } else {
        TailRegime::InfiniteMean
    };
    TailClassification { heavy, regime }
}
