//! Gray-box prediction of attack rates.
//!
//! [`select_best`] fits every (p, q) candidate of one family (ARMA, or the
//! long-memory-aware FARIMA) and keeps the lowest AIC. [`rolling_evaluate`]
//! re-selects at every origin t on `X_1..X_t`, predicts `X_{t+h}` and scores
//! the run with [`accuracy`].

mod fracdiff;
mod model;
mod predict;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fracdiff::{fracdiff, fracdiff_weights, FracDiffer};
pub use model::{
    arma_innovations, css, fit_arma, fit_arma_with, fit_farima, fit_farima_with, is_causal, is_invertible,
    min_length, pacf_to_coefficients, ArmaModel, Family, FarimaModel, FitOptions, FittedModel, D_BOUND,
};
pub use predict::{ar_infinity_weights, forecast_h, forecast_path, AR_TRUNCATION};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForecastError {
    #[error("series of length {n} is shorter than the minimum {min}")]
    TooShort { n: usize, min: usize },
    #[error("series is constant")]
    ConstantSeries,
    #[error("series contains non-finite values")]
    NonFinite,
    #[error("no candidate model converged")]
    AllDiverged,
    #[error("accuracy denominator is zero")]
    ZeroDenominator,
    #[error("observed and predicted lengths differ ({observed} vs {predicted})")]
    LengthMismatch { observed: usize, predicted: usize },
    #[error("no steps to evaluate")]
    NoSteps,
    #[error("every one of the {0} steps was skipped")]
    AllSkipped(usize),
    #[error("training prefix {got} is below the floor {min}")]
    TrainingTooShort { got: usize, min: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForecastConfig {
    pub h: usize,
    /// Evaluation starts at t = ⌊n·start_fraction⌋.
    pub start_fraction: f64,
    /// Candidate orders are 0..=max_p by 0..=max_q.
    pub max_p: usize,
    pub max_q: usize,
    /// Keep only the steps whose target lies in the last `window` points.
    pub window: Option<usize>,
    /// Smallest accepted ⌊n·start_fraction⌋.
    pub min_train: usize,
    pub fit: FitOptions,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        ForecastConfig {
            h: 1,
            start_fraction: 0.5,
            max_p: 4,
            max_q: 4,
            window: None,
            min_train: 100,
            fit: FitOptions::default(),
        }
    }
}

impl ForecastConfig {
    pub fn validate(&self) -> Result<(), ForecastError> {
        let bad = |m: &str| Err(ForecastError::InvalidConfig(m.to_string()));
        if self.h == 0 {
            return bad("h must be at least 1");
        }
        if !(self.start_fraction > 0.0 && self.start_fraction < 1.0) {
            return bad("start_fraction must lie in (0, 1)");
        }
        if self.window == Some(0) {
            return bad("window must be positive");
        }
        Ok(())
    }

    pub fn candidates(&self) -> Vec<(usize, usize)> {
        (0..=self.max_p).flat_map(|p| (0..=self.max_q).map(move |q| (p, q))).collect()
    }
}

/// Lowest AIC wins; exact ties go to the smaller p + q, then smaller p.
fn pick_best(models: impl IntoIterator<Item = FittedModel>) -> Option<FittedModel> {
    models.into_iter().filter(FittedModel::converged).min_by(|a, b| {
        a.aic()
            .total_cmp(&b.aic())
            .then((a.p() + a.q()).cmp(&(b.p() + b.q())))
            .then(a.p().cmp(&b.p()))
    })
}

pub fn select_best(series: &[f64], family: Family) -> Result<FittedModel, ForecastError> {
    select_best_with(series, family, &ForecastConfig::default())
}

pub fn select_best_with(series: &[f64], family: Family, cfg: &ForecastConfig) -> Result<FittedModel, ForecastError> {
    Selector::new(family, cfg).select(series)
}

/// Candidate set that remembers each candidate's last solution, so the
/// next (slightly longer) prefix starts from it.
struct Selector<'a> {
    family: Family,
    cfg: &'a ForecastConfig,
    warm: Vec<((usize, usize), Option<Vec<f64>>)>,
}

impl<'a> Selector<'a> {
    fn new(family: Family, cfg: &'a ForecastConfig) -> Self {
        Selector { family, cfg, warm: cfg.candidates().into_iter().map(|c| (c, None)).collect() }
    }

    fn select(&mut self, series: &[f64]) -> Result<FittedModel, ForecastError> {
        if series.iter().any(|v| !v.is_finite()) {
            return Err(ForecastError::NonFinite);
        }
        if series.len() >= min_length(0, 0) && series.iter().all(|&v| v == series[0]) {
            return Err(ForecastError::ConstantSeries);
        }
        let (family, opts) = (self.family, &self.cfg.fit);
        let fits: Vec<FittedModel> = self
            .warm
            .par_iter_mut()
            .filter(|((p, q), _)| series.len() >= min_length(*p, *q))
            .filter_map(|((p, q), warm)| {
                let (model, x) = model::fit_model(series, family, *p, *q, opts, warm.as_deref()).ok()?;
                *warm = model.converged().then_some(x);
                Some(model)
            })
            .collect();
        pick_best(fits).ok_or(ForecastError::AllDiverged)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub pmad: f64,
    pub pmad_prime: f64,
    pub oa: f64,
    pub ua: f64,
    pub steps: usize,
}

/// PMAD = Σ|e| / ΣX; PMAD' = Σ e / Σ X over the steps with e = X - Y > 0
/// (0 when there are none); OA = 1 - PMAD and UA = 1 - PMAD'.
pub fn accuracy(observed: &[f64], predicted: &[f64]) -> Result<AccuracyReport, ForecastError> {
    if observed.len() != predicted.len() {
        return Err(ForecastError::LengthMismatch { observed: observed.len(), predicted: predicted.len() });
    }
    if observed.is_empty() {
        return Err(ForecastError::NoSteps);
    }
    let (mut abs_err, mut total, mut under_err, mut under_total) = (0.0, 0.0, 0.0, 0.0);
    for (&x, &y) in observed.iter().zip(predicted) {
        let e = x - y;
        abs_err += e.abs();
        total += x;
        if e > 0.0 {
            under_err += e;
            under_total += x;
        }
    }
    if !(total > 0.0) {
        return Err(ForecastError::ZeroDenominator);
    }
    let pmad = abs_err / total;
    let pmad_prime = if under_err > 0.0 {
        if !(under_total > 0.0) {
            return Err(ForecastError::ZeroDenominator);
        }
        under_err / under_total
    } else {
        0.0
    };
    Ok(AccuracyReport { pmad, pmad_prime, oa: 1.0 - pmad, ua: 1.0 - pmad_prime, steps: observed.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastStep {
    /// Forecast origin, 1-based: the model sees X_1..X_t.
    pub t: usize,
    pub p: usize,
    pub q: usize,
    pub d: f64,
    pub predicted: f64,
    pub observed: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedStep {
    pub t: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastRun {
    pub family: Family,
    pub h: usize,
    pub start_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub window: Option<usize>,
    pub steps: Vec<ForecastStep>,
    pub skipped: Vec<SkippedStep>,
    pub metrics: AccuracyReport,
}

impl ForecastRun {
    /// Per-step table `t,p,q,d,Y,X,e`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,p,q,d,Y,X,e\n");
        for s in &self.steps {
            out.push_str(&format!("{},{},{},{},{},{},{}\n", s.t, s.p, s.q, s.d, s.predicted, s.observed, s.error));
        }
        out
    }
}

/// First and last forecast origin (1-based) for a series of length `n`.
pub fn origin_range(n: usize, cfg: &ForecastConfig) -> Option<(usize, usize)> {
    let mut first = (n as f64 * cfg.start_fraction).floor() as usize;
    if let Some(k) = cfg.window {
        first = first.max((n + 1).saturating_sub(k + cfg.h));
    }
    let last = n.checked_sub(cfg.h)?;
    (first >= 1 && first <= last).then_some((first, last))
}

pub fn rolling_evaluate(series: &[f64], family: Family, cfg: &ForecastConfig) -> Result<ForecastRun, ForecastError> {
    cfg.validate()?;
    let n = series.len();
    let train = (n as f64 * cfg.start_fraction).floor() as usize;
    if train < cfg.min_train {
        return Err(ForecastError::TrainingTooShort { got: train, min: cfg.min_train });
    }
    let (first, last) = origin_range(n, cfg).ok_or(ForecastError::NoSteps)?;
    let mut selector = Selector::new(family, cfg);
    let mut steps = Vec::new();
    let mut skipped = Vec::new();
    for t in first..=last {
        let prefix = &series[..t];
        let observed = series[t + cfg.h - 1];
        let chosen = match selector.select(prefix) {
            Ok(m) => Some(((m.p(), m.q(), m.d()), forecast_h(&m, prefix, cfg.h))),
            // A constant history is its own forecast.
            Err(ForecastError::ConstantSeries) => Some(((0, 0, 0.0), prefix[0].max(0.0))),
            Err(e) => {
                skipped.push(SkippedStep { t, reason: e.to_string() });
                None
            }
        };
        if let Some(((p, q, d), predicted)) = chosen {
            steps.push(ForecastStep { t, p, q, d, predicted, observed, error: observed - predicted });
        }
    }
    if steps.is_empty() {
        return Err(ForecastError::AllSkipped(skipped.len()));
    }
    let obs: Vec<f64> = steps.iter().map(|s| s.observed).collect();
    let pred: Vec<f64> = steps.iter().map(|s| s.predicted).collect();
    let metrics = accuracy(&obs, &pred)?;
    Ok(ForecastRun { family, h: cfg.h, start_fraction: cfg.start_fraction, window: cfg.window, steps, skipped, metrics })
}
