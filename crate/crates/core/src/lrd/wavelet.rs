//! Wavelet estimator: log2 of the mean detail energy per octave grows
//! linearly with slope 2H - 1 for fGn-type input.

use super::{finish, HurstConfig, HurstEstimate, HurstMethod, LrdError};
use crate::numeric::sample_variance;

/// Daubechies 4-tap scaling filter (two vanishing moments).
fn d4_lowpass() -> [f64; 4] {
    let s3 = 3f64.sqrt();
    let norm = 4.0 * 2f64.sqrt();
    [(1.0 + s3) / norm, (3.0 + s3) / norm, (3.0 - s3) / norm, (1.0 - s3) / norm]
}

/// One level of the periodic D4 transform. Odd-length input loses its last
/// sample.
fn dwt_step(a: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let h = d4_lowpass();
    let g = [h[3], -h[2], h[1], -h[0]];
    let n = a.len() & !1;
    let half = n / 2;
    let mut approx = Vec::with_capacity(half);
    let mut detail = Vec::with_capacity(half);
    for k in 0..half {
        let (mut s, mut d) = (0.0, 0.0);
        for l in 0..4 {
            let v = a[(2 * k + l) % n];
            s += h[l] * v;
            d += g[l] * v;
        }
        approx.push(s);
        detail.push(d);
    }
    (approx, detail)
}

/// Mean squared detail coefficient at each octave j = 1, 2, ... while the
/// level keeps at least `min_coeffs` coefficients.
pub fn detail_energies(x: &[f64], min_coeffs: usize) -> Vec<(usize, f64, usize)> {
    let mut out = Vec::new();
    let mut a = x.to_vec();
    let mut j = 1;
    while a.len() / 2 >= min_coeffs {
        let (next, d) = dwt_step(&a);
        let e = d.iter().map(|v| v * v).sum::<f64>() / d.len() as f64;
        out.push((j, e, d.len()));
        a = next;
        j += 1;
    }
    out
}

pub fn hurst_wave(x: &[f64], cfg: &HurstConfig) -> Result<HurstEstimate, LrdError> {
    if x.len() < cfg.min_len_wave {
        return Err(LrdError::TooShort { method: HurstMethod::Wave, n: x.len(), min: cfg.min_len_wave });
    }
    if sample_variance(x) <= 0.0 {
        return Err(LrdError::ZeroVariance);
    }
    let pts: Vec<(f64, f64)> = detail_energies(x, cfg.wave_min_coeffs)
        .into_iter()
        .filter(|&(j, e, _)| e > 0.0 && j >= cfg.wave_first_octave)
        .map(|(j, e, _)| (j as f64, e.log2()))
        .collect();
    finish(HurstMethod::Wave, pts, |slope| (slope + 1.0) / 2.0)
}
