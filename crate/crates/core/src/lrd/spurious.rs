//! Screening for spurious LRD: long memory that is really a short-memory
//! series plus shifts in the mean, or plus a smooth trend.
//!
//! Both screens work the same way: detect the non-stationary component,
//! remove it, and re-estimate the average H. A detection only counts as
//! spurious LRD when the adjusted series falls below the LRD band, because
//! genuinely long-memory series also trigger both detectors.
//!
//! Change points come from binary segmentation with the CUSUM statistic
//! `max_k |S_k - (k/L) S_L| / √L` against the penalty `c σ̂ √(2 ln n)`, where
//! σ̂ is a difference-based scale estimate that ignores level shifts.
//! Trends are least-squares polynomials in t/n of degree at most 2, judged
//! by an F statistic against the constant-mean model.

use serde::{Deserialize, Serialize};

use super::{h_bar, HurstConfig};
use crate::numeric::{mean, polyfit, polyval};
use crate::stats::quantile_sorted;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpuriousConfig {
    /// Multiplier c in the CUSUM penalty.
    pub cusum_factor: f64,
    /// Smallest segment is `n / min_segment_divisor` (and at least 16).
    pub min_segment_divisor: usize,
    pub max_changepoints: usize,
    pub trend_degree: usize,
    /// F statistic above which the trend counts as present.
    pub trend_f_threshold: f64,
    /// Adjusted average H below this marks the LRD as spurious.
    pub h_threshold: f64,
}

impl Default for SpuriousConfig {
    fn default() -> Self {
        SpuriousConfig {
            cusum_factor: 2.0,
            min_segment_divisor: 16,
            max_changepoints: 4,
            trend_degree: 2,
            trend_f_threshold: 10.0,
            h_threshold: 0.6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangepointScreen {
    pub detected: bool,
    /// Indices where a new segment starts.
    pub locations: Vec<usize>,
    pub statistic: f64,
    pub penalty: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub h_after: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendScreen {
    pub detected: bool,
    pub coefficients: Vec<f64>,
    pub f_statistic: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub h_after: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpuriousScreen {
    pub changepoint: ChangepointScreen,
    pub trend: TrendScreen,
    pub changepoint_detected: bool,
    pub trend_detected: bool,
    /// Smallest re-estimated average H over the adjustments that ran.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub h_after_adjustment: Option<f64>,
    pub spurious: bool,
}

pub fn spurious_screen(x: &[f64]) -> SpuriousScreen {
    spurious_screen_with(x, &HurstConfig::default(), &SpuriousConfig::default())
}

pub fn spurious_screen_with(x: &[f64], hcfg: &HurstConfig, cfg: &SpuriousConfig) -> SpuriousScreen {
    let changepoint = changepoint_screen(x, hcfg, cfg);
    let trend = trend_screen(x, hcfg, cfg);
    let below = |h: Option<f64>| h.is_some_and(|h| h < cfg.h_threshold);
    let spurious = (changepoint.detected && below(changepoint.h_after)) || (trend.detected && below(trend.h_after));
    let h_after_adjustment = [changepoint.h_after, trend.h_after].into_iter().flatten().reduce(f64::min);
    SpuriousScreen {
        changepoint_detected: changepoint.detected,
        trend_detected: trend.detected,
        changepoint,
        trend,
        h_after_adjustment,
        spurious,
    }
}

/// Scale estimate from first differences (MAD based), insensitive to a few
/// level shifts.
fn difference_scale(x: &[f64]) -> f64 {
    let mut d: Vec<f64> = x.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    if d.is_empty() {
        return 0.0;
    }
    d.sort_by(f64::total_cmp);
    let mad = quantile_sorted(&d, 0.5);
    mad / (0.674_489_750_196_081_7 * std::f64::consts::SQRT_2)
}

/// Best split of `seg` by the CUSUM statistic: (statistic, split offset).
fn best_split(seg: &[f64], min_len: usize) -> Option<(f64, usize)> {
    let len = seg.len();
    if len < 2 * min_len {
        return None;
    }
    let total: f64 = seg.iter().sum();
    let mut s = 0.0;
    let mut best: Option<(f64, usize)> = None;
    for (k, v) in seg.iter().enumerate().take(len - min_len) {
        s += v;
        let k1 = k + 1;
        if k1 < min_len {
            continue;
        }
        let stat = (s - k1 as f64 / len as f64 * total).abs() / (len as f64).sqrt();
        if best.map_or(true, |(b, _)| stat > b) {
            best = Some((stat, k1));
        }
    }
    best
}

fn changepoint_screen(x: &[f64], hcfg: &HurstConfig, cfg: &SpuriousConfig) -> ChangepointScreen {
    let n = x.len();
    let sigma = difference_scale(x);
    let penalty = cfg.cusum_factor * sigma * (2.0 * (n.max(2) as f64).ln()).sqrt();
    let min_len = (n / cfg.min_segment_divisor.max(1)).max(16);

    let mut segments = vec![(0usize, n)];
    let mut locations = Vec::new();
    let mut top_stat = 0.0f64;
    while locations.len() < cfg.max_changepoints {
        let candidate = segments
            .iter()
            .enumerate()
            .filter_map(|(i, &(a, b))| best_split(&x[a..b], min_len).map(|(s, k)| (i, s, a + k)))
            .max_by(|p, q| p.1.total_cmp(&q.1));
        let Some((i, stat, at)) = candidate else { break };
        top_stat = top_stat.max(stat);
        if stat <= penalty {
            break;
        }
        let (a, b) = segments[i];
        segments[i] = (a, at);
        segments.insert(i + 1, (at, b));
        locations.push(at);
    }
    locations.sort_unstable();
    let detected = !locations.is_empty();
    let h_after = detected.then(|| {
        let mut adjusted = x.to_vec();
        for &(a, b) in &segments {
            let m = mean(&x[a..b]);
            adjusted[a..b].iter_mut().for_each(|v| *v -= m);
        }
        h_bar(&adjusted, hcfg)
    });
    ChangepointScreen { detected, locations, statistic: top_stat, penalty, h_after: h_after.flatten() }
}

fn trend_screen(x: &[f64], hcfg: &HurstConfig, cfg: &SpuriousConfig) -> TrendScreen {
    let n = x.len();
    let t: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
    let k = cfg.trend_degree;
    let Some(coefficients) = (n > k + 2).then(|| polyfit(&t, x, k)).flatten() else {
        return TrendScreen { detected: false, coefficients: Vec::new(), f_statistic: 0.0, h_after: None };
    };
    let m = mean(x);
    let ss0: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    let residuals: Vec<f64> = x.iter().zip(&t).map(|(v, &ti)| v - polyval(&coefficients, ti)).collect();
    let ss1: f64 = residuals.iter().map(|r| r * r).sum();
    let f_statistic = if ss1 > 0.0 { ((ss0 - ss1) / k as f64) / (ss1 / (n - k - 1) as f64) } else { f64::INFINITY };
    let detected = f_statistic > cfg.trend_f_threshold;
    let h_after = if detected { h_bar(&residuals, hcfg) } else { None };
    TrendScreen { detected, coefficients, f_statistic, h_after }
}
