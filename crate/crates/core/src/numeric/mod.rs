//! Small numerical building blocks shared across the analysis modules.

mod lm;
mod nelder_mead;

pub use lm::{least_squares, LsOptions, LsResult};
pub use nelder_mead::{nelder_mead, NmOptions, NmResult};

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Ordinary least-squares line through `(x, y)` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    debug_assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    if sxx <= 0.0 || !sxy.is_finite() {
        return None;
    }
    let slope = sxy / sxx;
    Some(LineFit { slope, intercept: my - slope * mx })
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance with the n-1 denominator.
pub fn sample_variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64
}

/// Roughly `count` distinct integers spaced evenly in log scale over
/// `[lo, hi]`.
pub fn log_spaced_sizes(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    if hi < lo || count == 0 {
        return Vec::new();
    }
    if count == 1 || hi == lo {
        return vec![lo];
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut out: Vec<usize> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp().round() as usize)
        .map(|m| m.clamp(lo, hi))
        .collect();
    out.dedup();
    out
}

/// Least-squares polynomial in `t` of the given degree; returns the
/// coefficients (constant first) or `None` if the system is singular.
pub fn polyfit(t: &[f64], y: &[f64], degree: usize) -> Option<Vec<f64>> {
    let n = t.len();
    let k = degree + 1;
    if n < k {
        return None;
    }
    let design = nalgebra::DMatrix::from_fn(n, k, |i, j| t[i].powi(j as i32));
    let rhs = nalgebra::DVector::from_column_slice(y);
    let svd = design.svd(true, true);
    let coef = svd.solve(&rhs, 1e-12).ok()?;
    Some(coef.iter().copied().collect())
}

pub fn polyval(coef: &[f64], t: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

/// Forward transform of a real sequence, zero-padded to `len`.
pub fn fft_real(x: &[f64], len: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(len, Complex64::new(0.0, 0.0));
    let fft = planner_forward(len);
    fft.process(&mut buf);
    buf
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn planner_forward(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

fn planner_inverse(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(len))
}

/// Convolution against a fixed sequence `b`, whose transform is computed
/// once; each [`apply`](FixedConvolver::apply) costs two FFTs.
pub struct FixedConvolver {
    spectrum: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    out_len: usize,
}

impl FixedConvolver {
    /// Prepares for outputs of length `out_len`; the other operand is
    /// truncated to `out_len` terms as well.
    pub fn new(b: &[f64], out_len: usize) -> Self {
        let len = (2 * out_len).max(2).next_power_of_two();
        FixedConvolver {
            spectrum: fft_real(&b[..b.len().min(out_len)], len),
            forward: planner_forward(len),
            inverse: planner_inverse(len),
            out_len,
        }
    }

    pub fn apply(&self, a: &[f64]) -> Vec<f64> {
        let len = self.spectrum.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for (z, &v) in buf.iter_mut().zip(&a[..a.len().min(self.out_len)]) {
            z.re = v;
        }
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.forward.get_inplace_scratch_len().max(self.inverse.get_inplace_scratch_len())];
        self.forward.process_with_scratch(&mut buf, &mut scratch);
        buf.iter_mut().zip(&self.spectrum).for_each(|(x, y)| *x *= y);
        self.inverse.process_with_scratch(&mut buf, &mut scratch);
        let scale = 1.0 / len as f64;
        buf.iter().take(self.out_len).map(|c| c.re * scale).collect()
    }
}

/// First `out_len` terms of the linear convolution of `a` and `b`.
pub fn convolve_prefix(a: &[f64], b: &[f64], out_len: usize) -> Vec<f64> {
    let direct_cost = out_len.saturating_mul(a.len().min(b.len()).min(out_len));
    if direct_cost <= 1 << 17 {
        let mut out = vec![0.0; out_len];
        for (t, o) in out.iter_mut().enumerate() {
            // j runs over a[lo..=hi] with t - j inside b.
            let hi = t.min(a.len().saturating_sub(1));
            let lo = (t + 1).saturating_sub(b.len());
            if a.is_empty() || lo > hi {
                continue;
            }
            *o = a[lo..=hi].iter().zip(b[t - hi..=t - lo].iter().rev()).map(|(x, y)| x * y).sum();
        }
        return out;
    }
    let len = (a.len().min(out_len) + b.len().min(out_len)).next_power_of_two();
    let fa = fft_real(&a[..a.len().min(out_len)], len);
    let fb = fft_real(&b[..b.len().min(out_len)], len);
    let mut prod: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    planner_inverse(len).process(&mut prod);
    prod.iter().take(out_len).map(|c| c.re / len as f64).collect()
}
