//! h-step point forecasts with future innovations set to zero.

use super::{fracdiff_weights, model::arma_innovations, FittedModel};
use crate::numeric::convolve_prefix;

/// Cap on the AR(∞) expansion used for FARIMA forecasts.
pub const AR_TRUNCATION: usize = 1000;

/// Weights `π_1..π_len` of `φ(B)(1-B)^d / ψ(B) = Σ π_j B^j` (π_0 = 1 is
/// dropped), so that `w_t = -Σ π_j w_{t-j} + e_t`.
pub fn ar_infinity_weights(d: f64, phi: &[f64], theta: &[f64], len: usize) -> Vec<f64> {
    let mut ar_poly = vec![1.0];
    ar_poly.extend(phi.iter().map(|f| -f));
    let numer = convolve_prefix(&ar_poly, &fracdiff_weights(d, len + 1), len + 1);
    let mut pi = vec![0.0; len + 1];
    for j in 0..=len {
        let mut v = numer[j];
        for (k, th) in theta.iter().enumerate() {
            if j > k {
                v -= th * pi[j - 1 - k];
            }
        }
        pi[j] = v;
    }
    pi.remove(0);
    pi
}

/// Forecasts for horizons 1..=h from the end of `history`, floored at 0.
pub fn forecast_path(model: &FittedModel, history: &[f64], h: usize) -> Vec<f64> {
    let level = model.mean();
    let w: Vec<f64> = history.iter().map(|v| v - level).collect();
    let raw = match model {
        FittedModel::Arma(m) => arma_path(&w, &m.phi, &m.theta, h),
        FittedModel::Farima(m) => farima_path(&w, m.d, &m.phi, &m.theta, h),
    };
    raw.into_iter().map(|v| (v + level).max(0.0)).collect()
}

/// Forecast of `X_{t+h}` where `history` ends at `X_t`.
pub fn forecast_h(model: &FittedModel, history: &[f64], h: usize) -> f64 {
    assert!(h >= 1, "horizon must be at least 1");
    *forecast_path(model, history, h).last().expect("h >= 1")
}

fn arma_path(w: &[f64], phi: &[f64], theta: &[f64], h: usize) -> Vec<f64> {
    let n = w.len();
    let mut e = vec![0.0; n];
    arma_innovations(w, phi, theta, &mut e);
    let mut ext = w.to_vec();
    e.resize(n + h, 0.0);
    for t in n..n + h {
        let mut v = 0.0;
        for (i, f) in phi.iter().enumerate() {
            if t > i {
                v += f * ext[t - 1 - i];
            }
        }
        for (j, th) in theta.iter().enumerate() {
            if t > j {
                v += th * e[t - 1 - j];
            }
        }
        ext.push(v);
    }
    ext.split_off(n)
}

fn farima_path(w: &[f64], d: f64, phi: &[f64], theta: &[f64], h: usize) -> Vec<f64> {
    let n = w.len();
    let len = n.min(AR_TRUNCATION);
    let pi = ar_infinity_weights(d, phi, theta, len);
    let mut ext = w.to_vec();
    for t in n..n + h {
        let v: f64 = pi.iter().enumerate().take(t).map(|(j, p)| -p * ext[t - 1 - j]).sum();
        ext.push(v);
    }
    ext.split_off(n)
}
