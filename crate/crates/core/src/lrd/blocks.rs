//! Time-domain estimators working on non-overlapping blocks: rescaled range,
//! aggregated variance and Peng's residual-variance method.

use super::{finish, HurstConfig, HurstEstimate, HurstMethod, LrdError};
use crate::numeric::{log_spaced_sizes, mean, sample_variance};

fn block_sizes(n: usize, cfg: &HurstConfig, method: HurstMethod) -> Result<Vec<usize>, LrdError> {
    if n < cfg.min_len {
        return Err(LrdError::TooShort { method, n, min: cfg.min_len });
    }
    let hi = (n / cfg.max_block_divisor).max(cfg.min_block);
    Ok(log_spaced_sizes(cfg.min_block, hi, cfg.block_count))
}

fn check_variance(x: &[f64]) -> Result<(), LrdError> {
    if sample_variance(x) <= 0.0 {
        return Err(LrdError::ZeroVariance);
    }
    Ok(())
}

/// Rescaled range of one block: range of the bridge `Y_t - (t/m) Y_m`
/// (including t = 0) over the population standard deviation.
fn rescaled_range(block: &[f64]) -> Option<f64> {
    let m = block.len() as f64;
    let mu = block.iter().sum::<f64>() / m;
    let (mut y, mut lo, mut hi, mut ss) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &v in block {
        y += v - mu;
        lo = lo.min(y);
        hi = hi.max(y);
        ss += (v - mu) * (v - mu);
    }
    let s = (ss / m).sqrt();
    (s > 0.0).then(|| (hi - lo) / s)
}

pub fn hurst_rs(x: &[f64], cfg: &HurstConfig) -> Result<HurstEstimate, LrdError> {
    let sizes = block_sizes(x.len(), cfg, HurstMethod::Rs)?;
    check_variance(x)?;
    let mut pts = Vec::new();
    for m in sizes {
        let vals: Vec<f64> = x.chunks_exact(m).filter_map(rescaled_range).collect();
        if !vals.is_empty() {
            pts.push(((m as f64).ln(), mean(&vals).ln()));
        }
    }
    finish(HurstMethod::Rs, pts, |slope| slope)
}

pub fn hurst_agv(x: &[f64], cfg: &HurstConfig) -> Result<HurstEstimate, LrdError> {
    let sizes = block_sizes(x.len(), cfg, HurstMethod::Agv)?;
    check_variance(x)?;
    let mut pts = Vec::new();
    for m in sizes {
        let means: Vec<f64> = x.chunks_exact(m).map(mean).collect();
        if means.len() < 2 {
            continue;
        }
        let v = sample_variance(&means);
        if v > 0.0 {
            pts.push(((m as f64).ln(), v.ln()));
        }
    }
    // Var(block mean) ~ m^{2H-2}
    finish(HurstMethod::Agv, pts, |slope| 1.0 + slope / 2.0)
}

/// Residual variance of a least-squares line through the partial sums of
/// one block.
fn peng_residual_variance(block: &[f64]) -> f64 {
    let m = block.len() as f64;
    let mut y = 0.0;
    let partial: Vec<f64> = block
        .iter()
        .map(|v| {
            y += v;
            y
        })
        .collect();
    // i = 1..m has mean (m+1)/2 and centered sum of squares m(m^2-1)/12.
    let i_mean = (m + 1.0) / 2.0;
    let sxx = m * (m * m - 1.0) / 12.0;
    let y_mean = partial.iter().sum::<f64>() / m;
    let sxy: f64 = partial.iter().enumerate().map(|(i, &p)| (i as f64 + 1.0 - i_mean) * (p - y_mean)).sum();
    let slope = sxy / sxx;
    partial
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let r = p - y_mean - slope * (i as f64 + 1.0 - i_mean);
            r * r
        })
        .sum::<f64>()
        / m
}

pub fn hurst_peng(x: &[f64], cfg: &HurstConfig) -> Result<HurstEstimate, LrdError> {
    let sizes = block_sizes(x.len(), cfg, HurstMethod::Peng)?;
    check_variance(x)?;
    let mut pts = Vec::new();
    for m in sizes {
        let vals: Vec<f64> = x.chunks_exact(m).map(peng_residual_variance).collect();
        let avg = mean(&vals);
        if avg > 0.0 {
            pts.push(((m as f64).ln(), avg.ln()));
        }
    }
    // averaged residual variance ~ m^{2H}
    finish(HurstMethod::Peng, pts, |slope| slope / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rescaled_range_by_hand() {
        // mean 2, deviations [-1, 1, -1, 1] -> bridge [0,-1,0,-1,0], range 1, sd 1
        assert_eq!(rescaled_range(&[1.0, 3.0, 1.0, 3.0]), Some(1.0));
        assert_eq!(rescaled_range(&[2.0; 4]), None);
    }

    #[test]
    fn peng_of_straight_partial_sums_is_zero() {
        assert!(peng_residual_variance(&[3.0; 16]) < 1e-20);
    }
}
