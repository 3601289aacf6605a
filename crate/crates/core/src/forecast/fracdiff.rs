use crate::numeric::{convolve_prefix, FixedConvolver};

/// Coefficients π_0..π_{len-1} of the binomial expansion of (1 - B)^d.
pub fn fracdiff_weights(d: f64, len: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(len);
    let mut prev = 1.0;
    for j in 0..len {
        if j > 0 {
            prev *= (j as f64 - 1.0 - d) / j as f64;
        }
        w.push(prev);
    }
    w
}

/// Apply (1 - B)^d to a series, truncating the expansion at the first
/// observation: `y_t = Σ_{j=0}^{t} π_j x_{t-j}`.
pub fn fracdiff(series: &[f64], d: f64) -> Vec<f64> {
    if d == 0.0 {
        return series.to_vec();
    }
    let w = fracdiff_weights(d, series.len());
    convolve_prefix(&w, series, series.len())
}

/// Repeated fractional differencing of one series at varying d.
pub struct FracDiffer {
    series: Vec<f64>,
    conv: Option<FixedConvolver>,
}

impl FracDiffer {
    /// Series shorter than this are differenced directly.
    const FFT_FROM: usize = 128;

    pub fn new(series: &[f64]) -> Self {
        let conv = (series.len() >= Self::FFT_FROM).then(|| FixedConvolver::new(series, series.len()));
        FracDiffer { series: series.to_vec(), conv }
    }

    pub fn apply(&self, d: f64) -> Vec<f64> {
        match &self.conv {
            _ if d == 0.0 => self.series.clone(),
            Some(c) => c.apply(&fracdiff_weights(d, self.series.len())),
            None => fracdiff(&self.series, d),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_zero_is_identity() {
        let x = [1.0, -2.0, 3.5];
        assert_eq!(fracdiff(&x, 0.0), x.to_vec());
        assert_eq!(fracdiff_weights(0.0, 4), vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn d_one_is_first_difference() {
        assert_eq!(fracdiff_weights(1.0, 4), vec![1.0, -1.0, 0.0, 0.0]);
        assert_eq!(fracdiff(&[1.0, 4.0, 9.0, 16.0], 1.0), vec![1.0, 3.0, 5.0, 7.0]);
    }

    #[test]
    fn cached_transform_matches_direct() {
        let x: Vec<f64> = (0..300).map(|i| ((i * 17) % 23) as f64 - 11.0).collect();
        let fd = FracDiffer::new(&x);
        for d in [-0.3, 0.0, 0.2, 0.45] {
            let (a, b) = (fd.apply(d), fracdiff(&x, d));
            assert!(a.iter().zip(&b).all(|(u, v)| (u - v).abs() < 1e-9), "d = {d}");
        }
    }

    #[test]
    fn weights_for_point_four() {
        // π1 = -d, π2 = π1 (1 - d)/2, π3 = π2 (2 - d)/3
        let w = fracdiff_weights(0.4, 4);
        let expect = [1.0, -0.4, -0.12, -0.064];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
    }
}
