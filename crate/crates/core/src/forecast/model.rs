//! ARMA and FARIMA fitting by conditional sum of squares.
//!
//! Both families share one innovation recursion on the demeaned series
//! (fractionally differenced first for FARIMA), with presample values and
//! innovations set to zero:
//!
//! `e_t = z_t - Σ φ_i z_{t-i} - Σ θ_j e_{t-j}`.
//!
//! The optimizer works on unconstrained coordinates. AR and MA polynomials
//! are built from partial autocorrelations `tanh(u)` by the Durbin-Levinson
//! recursion, so every point is causal and invertible, and `d = 0.49 tanh(v)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{fracdiff, FracDiffer, ForecastError};
use crate::numeric::{least_squares, mean, LsOptions};

pub const D_BOUND: f64 = 0.49;
/// A d estimate this close to ±D_BOUND sits on the constraint rather than
/// at an interior optimum, and the fit counts as not converged.
pub const BOUNDARY_SLACK: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Family {
    Arma,
    Farima,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Arma => "ARMA",
            Family::Farima => "FARIMA",
        })
    }
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "ARMA" => Ok(Family::Arma),
            "FARIMA" | "ARFIMA" => Ok(Family::Farima),
            _ => Err(format!("unknown model family {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmaModel {
    pub p: usize,
    pub q: usize,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub mean: f64,
    pub sigma2: f64,
    pub aic: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarimaModel {
    pub p: usize,
    pub q: usize,
    pub d: f64,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub mean: f64,
    pub sigma2: f64,
    pub aic: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "UPPERCASE")]
pub enum FittedModel {
    Arma(ArmaModel),
    Farima(FarimaModel),
}

impl FittedModel {
    pub fn family(&self) -> Family {
        match self {
            FittedModel::Arma(_) => Family::Arma,
            FittedModel::Farima(_) => Family::Farima,
        }
    }
    pub fn p(&self) -> usize {
        match self {
            FittedModel::Arma(m) => m.p,
            FittedModel::Farima(m) => m.p,
        }
    }
    pub fn q(&self) -> usize {
        match self {
            FittedModel::Arma(m) => m.q,
            FittedModel::Farima(m) => m.q,
        }
    }
    /// Zero for ARMA.
    pub fn d(&self) -> f64 {
        match self {
            FittedModel::Arma(_) => 0.0,
            FittedModel::Farima(m) => m.d,
        }
    }
    pub fn phi(&self) -> &[f64] {
        match self {
            FittedModel::Arma(m) => &m.phi,
            FittedModel::Farima(m) => &m.phi,
        }
    }
    pub fn theta(&self) -> &[f64] {
        match self {
            FittedModel::Arma(m) => &m.theta,
            FittedModel::Farima(m) => &m.theta,
        }
    }
    pub fn mean(&self) -> f64 {
        match self {
            FittedModel::Arma(m) => m.mean,
            FittedModel::Farima(m) => m.mean,
        }
    }
    pub fn sigma2(&self) -> f64 {
        match self {
            FittedModel::Arma(m) => m.sigma2,
            FittedModel::Farima(m) => m.sigma2,
        }
    }
    pub fn aic(&self) -> f64 {
        match self {
            FittedModel::Arma(m) => m.aic,
            FittedModel::Farima(m) => m.aic,
        }
    }
    pub fn converged(&self) -> bool {
        match self {
            FittedModel::Arma(m) => m.converged,
            FittedModel::Farima(m) => m.converged,
        }
    }
}

/// Optimizer budget for one (p, q) fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    /// Residual evaluations per start, Jacobian columns included.
    pub max_evals: usize,
    /// Jittered restarts tried when the first start does not converge.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { max_evals: 500, restarts: 3, seed: 0 }
    }
}

/// Smallest series length accepted for a (p, q) fit.
pub fn min_length(p: usize, q: usize) -> usize {
    30 + 5 * (p + q)
}

/// Coefficients `φ_1..φ_k` of a causal `1 - Σ φ_j z^j` built from partial
/// autocorrelations in (-1, 1).
pub fn pacf_to_coefficients(r: &[f64]) -> Vec<f64> {
    let mut phi: Vec<f64> = Vec::with_capacity(r.len());
    for (k, &rk) in r.iter().enumerate() {
        let prev = phi.clone();
        for j in 0..k {
            phi[j] = prev[j] - rk * prev[k - 1 - j];
        }
        phi.push(rk);
    }
    phi
}

/// Step-down recursion: true when `1 - Σ φ_j z^j` has all roots strictly
/// outside the unit circle.
pub fn is_causal(phi: &[f64]) -> bool {
    let mut a = phi.to_vec();
    while let Some(&rk) = a.last() {
        if !(rk.abs() < 1.0) {
            return false;
        }
        let k = a.len();
        let denom = 1.0 - rk * rk;
        let prev: Vec<f64> = (0..k - 1).map(|j| (a[j] + rk * a[k - 2 - j]) / denom).collect();
        a = prev;
    }
    true
}

/// `1 + Σ θ_j z^j` invertible.
pub fn is_invertible(theta: &[f64]) -> bool {
    let neg: Vec<f64> = theta.iter().map(|t| -t).collect();
    is_causal(&neg)
}

/// Innovations of the ARMA recursion on an already transformed series.
pub fn arma_innovations(z: &[f64], phi: &[f64], theta: &[f64], out: &mut [f64]) {
    let n = z.len();
    let p = phi.len();
    // AR part has no recursion.
    for t in 0..n.min(p) {
        out[t] = z[t] - phi[..t].iter().enumerate().map(|(i, f)| f * z[t - 1 - i]).sum::<f64>();
    }
    for t in p..n {
        let mut e = z[t];
        for (i, f) in phi.iter().enumerate() {
            e -= f * z[t - 1 - i];
        }
        out[t] = e;
    }
    let q = theta.len();
    if q == 0 {
        return;
    }
    for t in 1..n {
        let mut e = out[t];
        for (j, th) in theta.iter().enumerate().take(t) {
            e -= th * out[t - 1 - j];
        }
        out[t] = e;
    }
}

/// Conditional sum of squares for demeaned `w` at explicit parameters.
/// `d = 0` gives the ARMA value exactly.
pub fn css(w: &[f64], d: f64, phi: &[f64], theta: &[f64]) -> f64 {
    let z = fracdiff(w, d);
    let mut e = vec![0.0; w.len()];
    arma_innovations(&z, phi, theta, &mut e);
    e.iter().map(|v| v * v).sum()
}

struct Decoded {
    d: f64,
    phi: Vec<f64>,
    theta: Vec<f64>,
}

fn decode(x: &[f64], p: usize, q: usize, farima: bool) -> Decoded {
    let off = usize::from(farima);
    let d = if farima { D_BOUND * x[0].tanh() } else { 0.0 };
    let r_ar: Vec<f64> = x[off..off + p].iter().map(|u| u.tanh()).collect();
    let r_ma: Vec<f64> = x[off + p..off + p + q].iter().map(|u| u.tanh()).collect();
    let phi = pacf_to_coefficients(&r_ar);
    let theta = pacf_to_coefficients(&r_ma).into_iter().map(|v| -v).collect();
    Decoded { d, phi, theta }
}

/// Result of one CSS fit in optimizer coordinates.
#[derive(Debug, Clone)]
pub(crate) struct CssFit {
    pub x: Vec<f64>,
    pub rss: f64,
    pub converged: bool,
}

fn run_lm(w: &[f64], p: usize, q: usize, farima: bool, x0: &[f64], max_evals: usize) -> CssFit {
    let n = w.len();
    let differ = farima.then(|| FracDiffer::new(w));
    let mut cached: Option<(f64, Vec<f64>)> = None;
    let residuals = |x: &[f64], out: &mut [f64]| {
        if x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        let m = decode(x, p, q, farima);
        let z: &[f64] = match &differ {
            Some(fd) => {
                if cached.as_ref().map_or(true, |(d, _)| *d != m.d) {
                    cached = Some((m.d, fd.apply(m.d)));
                }
                &cached.as_ref().expect("filled above").1
            }
            None => w,
        };
        arma_innovations(z, &m.phi, &m.theta, out);
        true
    };
    let r = least_squares(residuals, x0, n, LsOptions { max_evals, rel_tol: 1e-7 });
    CssFit { x: r.x, rss: r.cost, converged: r.converged }
}

/// Fit with an optional warm start, falling back to cold starts (zeros,
/// then seeded jitter) when the warm start does not converge.
pub(crate) fn fit_css(
    w: &[f64],
    p: usize,
    q: usize,
    farima: bool,
    opts: &FitOptions,
    warm: Option<&[f64]>,
) -> CssFit {
    let k = p + q + usize::from(farima);
    if let Some(x0) = warm.filter(|x| x.len() == k) {
        let fit = run_lm(w, p, q, farima, x0, opts.max_evals);
        if fit.converged {
            return fit;
        }
    }
    let mut best = run_lm(w, p, q, farima, &vec![0.0; k], opts.max_evals);
    if best.converged {
        return best;
    }
    let seed = opts.seed ^ ((p as u64) << 32 | (q as u64) << 16 | u64::from(farima));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..opts.restarts {
        let x0: Vec<f64> = (0..k).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let fit = run_lm(w, p, q, farima, &x0, opts.max_evals);
        let better = (fit.converged && !best.converged) || (fit.converged == best.converged && fit.rss < best.rss);
        if better {
            best = fit;
        }
        if best.converged {
            break;
        }
    }
    best
}

fn check_input(series: &[f64], p: usize, q: usize) -> Result<f64, ForecastError> {
    let min = min_length(p, q);
    if series.len() < min {
        return Err(ForecastError::TooShort { n: series.len(), min });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(ForecastError::NonFinite);
    }
    let m = mean(series);
    if series.iter().all(|&v| v == series[0]) {
        return Err(ForecastError::ConstantSeries);
    }
    Ok(m)
}

pub(crate) fn fit_model(
    series: &[f64],
    family: Family,
    p: usize,
    q: usize,
    opts: &FitOptions,
    warm: Option<&[f64]>,
) -> Result<(FittedModel, Vec<f64>), ForecastError> {
    let level = check_input(series, p, q)?;
    let w: Vec<f64> = series.iter().map(|v| v - level).collect();
    let farima = family == Family::Farima;
    let fit = fit_css(&w, p, q, farima, opts, warm);
    let m = decode(&fit.x, p, q, farima);
    let n = series.len() as f64;
    let sigma2 = fit.rss / n;
    let k = (p + q + 1 + usize::from(farima)) as f64;
    let aic = n * sigma2.ln() + 2.0 * k;
    let converged = fit.converged
        && aic.is_finite()
        && is_causal(&m.phi)
        && is_invertible(&m.theta)
        && m.d.abs() < D_BOUND - BOUNDARY_SLACK;
    let model = match family {
        Family::Arma => {
            FittedModel::Arma(ArmaModel { p, q, phi: m.phi, theta: m.theta, mean: level, sigma2, aic, converged })
        }
        Family::Farima => FittedModel::Farima(FarimaModel {
            p,
            q,
            d: m.d,
            phi: m.phi,
            theta: m.theta,
            mean: level,
            sigma2,
            aic,
            converged,
        }),
    };
    Ok((model, fit.x))
}

pub fn fit_arma(series: &[f64], p: usize, q: usize) -> Result<ArmaModel, ForecastError> {
    fit_arma_with(series, p, q, &FitOptions::default())
}

pub fn fit_arma_with(series: &[f64], p: usize, q: usize, opts: &FitOptions) -> Result<ArmaModel, ForecastError> {
    match fit_model(series, Family::Arma, p, q, opts, None)?.0 {
        FittedModel::Arma(m) => Ok(m),
        FittedModel::Farima(_) => unreachable!("family is ARMA"),
    }
}

pub fn fit_farima(series: &[f64], p: usize, q: usize) -> Result<FarimaModel, ForecastError> {
    fit_farima_with(series, p, q, &FitOptions::default())
}

pub fn fit_farima_with(series: &[f64], p: usize, q: usize, opts: &FitOptions) -> Result<FarimaModel, ForecastError> {
    match fit_model(series, Family::Farima, p, q, opts, None)?.0 {
        FittedModel::Farima(m) => Ok(m),
        FittedModel::Arma(_) => unreachable!("family is FARIMA"),
    }
}
