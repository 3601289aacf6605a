//! Periodogram-based estimators.

use std::f64::consts::PI;

use super::{finish, HurstConfig, HurstEstimate, HurstMethod, LrdError};
use crate::numeric::{fft_real, mean};

/// Periodogram ordinates at the Fourier frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct Periodogram {
    pub n: usize,
    /// λ_k = 2πk/n for k = 1..=⌊n/2⌋.
    pub freq: Vec<f64>,
    /// I(λ_k) = |Σ_j x_j e^{ijλ_k}|² / (2πn).
    pub power: Vec<f64>,
    /// I(λ_k) for every k = 1..n-1, used by the energy identity.
    full: Vec<f64>,
}

impl Periodogram {
    pub fn new(x: &[f64]) -> Periodogram {
        let n = x.len();
        let m = mean(x);
        let centered: Vec<f64> = x.iter().map(|v| v - m).collect();
        let spec = fft_real(&centered, n);
        let scale = 1.0 / (2.0 * PI * n as f64);
        let full: Vec<f64> = spec.iter().skip(1).map(|c| c.norm_sqr() * scale).collect();
        let half = n / 2;
        Periodogram {
            n,
            freq: (1..=half).map(|k| 2.0 * PI * k as f64 / n as f64).collect(),
            power: full[..half].to_vec(),
            full,
        }
    }

    /// `Σ_{k=1}^{n-1} I(λ_k) · 2π/n`, which equals the mean squared deviation
    /// `(1/n) Σ (x_t - x̄)²` exactly (Parseval).
    pub fn total_energy(&self) -> f64 {
        self.full.iter().sum::<f64>() * 2.0 * PI / self.n as f64
    }
}

fn low_frequency_count(n_freq: usize, cfg: &HurstConfig) -> usize {
    ((n_freq as f64 * cfg.low_freq_fraction).floor() as usize).max(cfg.min_low_freq_points).min(n_freq)
}

fn prepare(x: &[f64], cfg: &HurstConfig, method: HurstMethod) -> Result<Periodogram, LrdError> {
    if x.len() < cfg.min_len {
        return Err(LrdError::TooShort { method, n: x.len(), min: cfg.min_len });
    }
    let p = Periodogram::new(x);
    if p.power.iter().all(|&v| v <= 0.0) {
        return Err(LrdError::ZeroVariance);
    }
    Ok(p)
}

pub fn hurst_per(x: &[f64], cfg: &HurstConfig) -> Result<HurstEstimate, LrdError> {
    let p = prepare(x, cfg, HurstMethod::Per)?;
    let count = low_frequency_count(p.freq.len(), cfg);
    let pts: Vec<(f64, f64)> = p.freq[..count]
        .iter()
        .zip(&p.power[..count])
        .filter(|(_, &i)| i > 0.0)
        .map(|(&f, &i)| (f.ln(), i.ln()))
        .collect();
    // I(λ) ~ λ^{1-2H}
    finish(HurstMethod::Per, pts, |slope| (1.0 - slope) / 2.0)
}

/// Boxed periodogram: the low-frequency band is cut into equal-width boxes on
/// the log-frequency axis and each non-empty box contributes one point (mean
/// log-frequency, mean log-power), so the many high-frequency ordinates do
/// not dominate the fit.
pub fn hurst_box(x: &[f64], cfg: &HurstConfig) -> Result<HurstEstimate, LrdError> {
    let p = prepare(x, cfg, HurstMethod::Box)?;
    let count = ((p.freq.len() as f64 * cfg.box_freq_fraction).floor() as usize)
        .max(cfg.min_low_freq_points)
        .min(p.freq.len());
    let lf: Vec<f64> = p.freq[..count].iter().map(|f| f.ln()).collect();
    let (lo, hi) = (lf[0], lf[count - 1]);
    let width = (hi - lo) / cfg.box_count as f64;
    let mut sums = vec![(0.0, 0.0, 0usize); cfg.box_count];
    for (i, &l) in lf.iter().enumerate() {
        let power = p.power[i];
        if power <= 0.0 {
            continue;
        }
        let b = if width > 0.0 { (((l - lo) / width) as usize).min(cfg.box_count - 1) } else { 0 };
        sums[b].0 += l;
        sums[b].1 += power.ln();
        sums[b].2 += 1;
    }
    let pts: Vec<(f64, f64)> = sums.iter().filter(|s| s.2 > 0).map(|&(a, b, c)| (a / c as f64, b / c as f64)).collect();
    finish(HurstMethod::Box, pts, |slope| (1.0 - slope) / 2.0)
}
