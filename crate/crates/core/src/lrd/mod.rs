//! Long-range dependence identification.
//!
//! Six Hurst estimators ([`hurst_rs`], [`hurst_agv`], [`hurst_peng`],
//! [`hurst_per`], [`hurst_box`], [`hurst_wave`]) each reduce to a straight
//! line fitted on a log-log (or log2-octave) plot; the slope maps to H by a
//! method-specific formula. [`hurst_all`] averages the six values, screens
//! the average against the LRD band and, for candidates, runs the
//! [`spurious_screen`] for change points and smooth trends.
//!
//! Per-method values outside [0, 1] are kept as they are: they signal an
//! unsuitable estimator or a non-stationary series.

mod blocks;
mod spectral;
mod spurious;
mod wavelet;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use blocks::{hurst_agv as hurst_agv_with, hurst_peng as hurst_peng_with, hurst_rs as hurst_rs_with};
pub use spectral::{hurst_box as hurst_box_with, hurst_per as hurst_per_with, Periodogram};
pub use spurious::{spurious_screen, spurious_screen_with, ChangepointScreen, SpuriousConfig, SpuriousScreen, TrendScreen};
pub use wavelet::{detail_energies, hurst_wave as hurst_wave_with};

use crate::numeric::fit_line;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LrdError {
    #[error("{method}: series of length {n} is shorter than the minimum {min}")]
    TooShort { method: HurstMethod, n: usize, min: usize },
    #[error("series is constant")]
    ZeroVariance,
    #[error("{method}: only {points} usable regression points")]
    DegenerateRegression { method: HurstMethod, points: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum HurstMethod {
    Rs,
    Agv,
    Peng,
    Per,
    Box,
    Wave,
}

impl HurstMethod {
    pub const ALL: [HurstMethod; 6] =
        [HurstMethod::Rs, HurstMethod::Agv, HurstMethod::Peng, HurstMethod::Per, HurstMethod::Box, HurstMethod::Wave];
}

impl fmt::Display for HurstMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            HurstMethod::Rs => "RS",
            HurstMethod::Agv => "AGV",
            HurstMethod::Peng => "PENG",
            HurstMethod::Per => "PER",
            HurstMethod::Box => "BOX",
            HurstMethod::Wave => "WAVE",
        };
        f.write_str(s)
    }
}

/// Tuning knobs for the estimators. Defaults are what the report uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HurstConfig {
    /// Smallest block for RS/AGV/PENG.
    pub min_block: usize,
    /// Largest block is `n / max_block_divisor`.
    pub max_block_divisor: usize,
    /// Number of log-spaced block sizes.
    pub block_count: usize,
    /// Minimum series length for RS/AGV/PENG/PER/BOX.
    pub min_len: usize,
    /// Share of Fourier frequencies (lowest first) used by PER.
    pub low_freq_fraction: f64,
    pub min_low_freq_points: usize,
    /// Share of Fourier frequencies (lowest first) spread over the boxes.
    pub box_freq_fraction: f64,
    pub box_count: usize,
    pub min_len_wave: usize,
    /// Octaves with fewer coefficients are left out of the wavelet fit.
    pub wave_min_coeffs: usize,
    /// First octave entering the wavelet fit.
    pub wave_first_octave: usize,
    /// Closed band for the average H that makes a series an LRD candidate.
    pub lrd_band: (f64, f64),
    /// Below this many successful methods the average is flagged.
    pub min_methods: usize,
}

impl Default for HurstConfig {
    fn default() -> Self {
        HurstConfig {
            min_block: 8,
            max_block_divisor: 4,
            block_count: 20,
            min_len: 64,
            low_freq_fraction: 0.1,
            min_low_freq_points: 10,
            box_freq_fraction: 1.0,
            box_count: 60,
            min_len_wave: 256,
            wave_min_coeffs: 32,
            wave_first_octave: 1,
            lrd_band: (0.6, 1.0),
            min_methods: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstEstimate {
    pub method: HurstMethod,
    pub h_value: f64,
    /// (log x, log y) pairs entering the line fit.
    pub regression_points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
}

impl HurstEstimate {
    /// LRD exponent β = 2 - 2H of ρ(h) ~ h^{-β}.
    pub fn beta(&self) -> f64 {
        2.0 - 2.0 * self.h_value
    }
}

pub(crate) fn finish(method: HurstMethod, pts: Vec<(f64, f64)>, to_h: impl Fn(f64) -> f64) -> Result<HurstEstimate, LrdError> {
    if pts.len() < 4 {
        return Err(LrdError::DegenerateRegression { method, points: pts.len() });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
    let line = fit_line(&xs, &ys).ok_or(LrdError::DegenerateRegression { method, points: pts.len() })?;
    Ok(HurstEstimate { method, h_value: to_h(line.slope), regression_points: pts, slope: line.slope, intercept: line.intercept })
}

pub fn hurst_rs(x: &[f64]) -> Result<HurstEstimate, LrdError> {
    blocks::hurst_rs(x, &HurstConfig::default())
}
pub fn hurst_agv(x: &[f64]) -> Result<HurstEstimate, LrdError> {
    blocks::hurst_agv(x, &HurstConfig::default())
}
pub fn hurst_peng(x: &[f64]) -> Result<HurstEstimate, LrdError> {
    blocks::hurst_peng(x, &HurstConfig::default())
}
pub fn hurst_per(x: &[f64]) -> Result<HurstEstimate, LrdError> {
    spectral::hurst_per(x, &HurstConfig::default())
}
pub fn hurst_box(x: &[f64]) -> Result<HurstEstimate, LrdError> {
    spectral::hurst_box(x, &HurstConfig::default())
}
pub fn hurst_wave(x: &[f64]) -> Result<HurstEstimate, LrdError> {
    wavelet::hurst_wave(x, &HurstConfig::default())
}

pub fn estimate(method: HurstMethod, x: &[f64], cfg: &HurstConfig) -> Result<HurstEstimate, LrdError> {
    match method {
        HurstMethod::Rs => blocks::hurst_rs(x, cfg),
        HurstMethod::Agv => blocks::hurst_agv(x, cfg),
        HurstMethod::Peng => blocks::hurst_peng(x, cfg),
        HurstMethod::Per => spectral::hurst_per(x, cfg),
        HurstMethod::Box => spectral::hurst_box(x, cfg),
        HurstMethod::Wave => wavelet::hurst_wave(x, cfg),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Lrd,
    SpuriousLrd,
    NotLrd,
}

impl Verdict {
    pub fn decide(lrd_candidate: bool, spurious: bool) -> Verdict {
        match (lrd_candidate, spurious) {
            (true, false) => Verdict::Lrd,
            (true, true) => Verdict::SpuriousLrd,
            (false, _) => Verdict::NotLrd,
        }
    }
}

/// One method's outcome inside a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: HurstMethod,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub estimate: Option<HurstEstimate>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub unavailable: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstReport {
    pub methods: Vec<MethodOutcome>,
    /// Mean of the available per-method values.
    pub h_bar: Option<f64>,
    pub methods_available: usize,
    /// Fewer than `min_methods` estimators produced a value.
    pub degraded: bool,
    pub lrd_candidate: bool,
    pub spurious: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub screen: Option<SpuriousScreen>,
    pub verdict: Verdict,
}

impl HurstReport {
    pub fn value(&self, method: HurstMethod) -> Option<f64> {
        self.methods.iter().find(|m| m.method == method)?.estimate.as_ref().map(|e| e.h_value)
    }
}

/// Run every estimator; the outcomes are in [`HurstMethod::ALL`] order.
pub fn estimate_all(x: &[f64], cfg: &HurstConfig) -> Vec<MethodOutcome> {
    HurstMethod::ALL
        .iter()
        .map(|&method| match estimate(method, x, cfg) {
            Ok(e) => MethodOutcome { method, estimate: Some(e), unavailable: None },
            Err(err) => MethodOutcome { method, estimate: None, unavailable: Some(err.to_string()) },
        })
        .collect()
}

pub(crate) fn average_h(outcomes: &[MethodOutcome]) -> Option<f64> {
    let vals: Vec<f64> = outcomes.iter().filter_map(|o| o.estimate.as_ref().map(|e| e.h_value)).collect();
    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
}

/// Average H over the six methods, or `None` when every method fails.
pub fn h_bar(x: &[f64], cfg: &HurstConfig) -> Option<f64> {
    average_h(&estimate_all(x, cfg))
}

pub fn hurst_all(x: &[f64]) -> HurstReport {
    hurst_all_with(x, &HurstConfig::default(), &SpuriousConfig::default())
}

pub fn hurst_all_with(x: &[f64], cfg: &HurstConfig, screen_cfg: &SpuriousConfig) -> HurstReport {
    let methods = estimate_all(x, cfg);
    let h_bar = average_h(&methods);
    let methods_available = methods.iter().filter(|m| m.estimate.is_some()).count();
    let lrd_candidate = h_bar.is_some_and(|h| h >= cfg.lrd_band.0 && h <= cfg.lrd_band.1);
    let screen = lrd_candidate.then(|| spurious_screen_with(x, cfg, screen_cfg));
    let spurious = screen.as_ref().is_some_and(|s| s.spurious);
    HurstReport {
        methods,
        h_bar,
        methods_available,
        degraded: methods_available < cfg.min_methods,
        lrd_candidate,
        spurious,
        screen,
        verdict: Verdict::decide(lrd_candidate, spurious),
    }
}
