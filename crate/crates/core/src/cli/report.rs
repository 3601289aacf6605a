//! The full per-series analysis behind `honeystat report`.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{expand_selectors, AnalysisConfig};
use crate::forecast::{rolling_evaluate, AccuracyReport, Family, ForecastRun};
use crate::gof::{poisson_test_with, GofReport};
use crate::ingest::FlowRecord;
use crate::lrd::{hurst_all_with, HurstReport, Verdict};
use crate::process::{build_rate_series, inter_arrivals, ProcessError, RateSeries, Resolution, Span};
use crate::stats::{summarize, SummaryStats};
use crate::tails::{classify_tail, fit_gpd, GpdFit, TailClassification};

pub const SCHEMA_VERSION: u32 = 1;

/// Either a result or the reason it is missing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome<T> {
    Ok(T),
    Error(String),
}

impl<T> Outcome<T> {
    pub fn from_result<E: std::fmt::Display>(r: Result<T, E>) -> Self {
        match r {
            Ok(v) => Outcome::Ok(v),
            Err(e) => Outcome::Error(e.to_string()),
        }
    }

    pub fn ok(&self) -> Option<&T> {
        match self {
            Outcome::Ok(v) => Some(v),
            Outcome::Error(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailResult {
    pub fit: GpdFit,
    pub classification: TailClassification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastSummary {
    pub family: Family,
    pub h: usize,
    pub start_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub window: Option<usize>,
    pub steps: usize,
    pub skipped: usize,
    pub metrics: AccuracyReport,
}

impl From<&ForecastRun> for ForecastSummary {
    fn from(r: &ForecastRun) -> Self {
        ForecastSummary {
            family: r.family,
            h: r.h,
            start_fraction: r.start_fraction,
            window: r.window,
            steps: r.steps.len(),
            skipped: r.skipped.len(),
            metrics: r.metrics,
        }
    }
}

/// Wall-clock milliseconds per stage. Only present with `--timing`, since
/// it would make otherwise identical runs differ.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SeriesTiming {
    pub hurst_ms: f64,
    pub poisson_ms: f64,
    pub tails_ms: f64,
    pub forecast_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub id: String,
    pub resolution: Resolution,
    pub buckets: usize,
    pub flows: u64,
    pub summary: Outcome<SummaryStats>,
    pub hurst: Outcome<HurstReport>,
    pub poisson: Outcome<GofReport>,
    pub tails: Outcome<TailResult>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub forecast: Option<Outcome<ForecastSummary>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timing: Option<SeriesTiming>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnavailableSeries {
    pub id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub config_hash: String,
    pub seed: u64,
    pub flows: usize,
    pub span: Span,
    pub series: Vec<SeriesReport>,
    /// Requested series that could not be built (for instance no flows).
    pub unavailable: Vec<UnavailableSeries>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub total_ms: Option<f64>,
}

/// Everything computed for one series, including the full forecast run
/// (the report itself keeps only its summary).
pub struct SeriesAnalysis {
    pub report: SeriesReport,
    pub rates: RateSeries,
    pub run: Option<ForecastRun>,
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

pub fn analyze_series(
    flows: &[FlowRecord],
    resolution: Resolution,
    span: Span,
    cfg: &AnalysisConfig,
    timing: bool,
) -> Result<SeriesAnalysis, ProcessError> {
    let rates = build_rate_series(flows, resolution, span)?;
    let x = rates.values();
    let mut t = SeriesTiming::default();

    let clock = Instant::now();
    let hurst = hurst_all_with(&x, &cfg.hurst, &cfg.spurious);
    t.hurst_ms = elapsed_ms(clock);

    let clock = Instant::now();
    let poisson = match inter_arrivals(flows, resolution) {
        Ok(sample) => {
            if cfg.gof.ks_is_degenerate(sample.gaps.len()) {
                log::warn!("{resolution}: KS critical value {} with only {} gaps rejects almost surely", cfg.gof.ks_critical, sample.gaps.len());
            }
            Outcome::from_result(poisson_test_with(&sample.gaps, &cfg.gof))
        }
        Err(e) => Outcome::Error(e.to_string()),
    };
    t.poisson_ms = elapsed_ms(clock);

    let clock = Instant::now();
    let tails = Outcome::from_result(fit_gpd(&x, &cfg.tails).map(|fit| {
        let classification = classify_tail(&fit, cfg.tails.z);
        TailResult { fit, classification }
    }));
    t.tails_ms = elapsed_ms(clock);

    let clock = Instant::now();
    let mut run = None;
    let forecast = cfg.forecast.enabled.then(|| {
        let family = cfg.forecast.family.resolve(hurst.verdict == Verdict::Lrd);
        match rolling_evaluate(&x, family, &cfg.forecast.rolling) {
            Ok(r) => {
                let summary = ForecastSummary::from(&r);
                run = Some(r);
                Outcome::Ok(summary)
            }
            Err(e) => Outcome::Error(e.to_string()),
        }
    });
    t.forecast_ms = elapsed_ms(clock);

    let report = SeriesReport {
        id: resolution.to_string(),
        resolution,
        buckets: rates.counts.len(),
        flows: rates.total(),
        summary: Outcome::from_result(summarize(&x)),
        hurst: Outcome::Ok(hurst),
        poisson,
        tails,
        forecast,
        timing: timing.then_some(t),
    };
    Ok(SeriesAnalysis { report, rates, run })
}

/// Analyse every selected resolution on the grid covering all flows.
/// Series are processed in parallel and emitted sorted by resolution.
pub fn build_report(
    flows: &[FlowRecord],
    cfg: &AnalysisConfig,
    timing: bool,
) -> Result<(Report, Vec<SeriesAnalysis>), ProcessError> {
    let clock = Instant::now();
    let span = Span::covering(flows, cfg.bucket)?;
    let resolutions = expand_selectors(&cfg.resolutions, flows);
    let results: Vec<Result<SeriesAnalysis, ProcessError>> =
        resolutions.par_iter().map(|&r| analyze_series(flows, r, span, cfg, timing)).collect();
    let mut analyses = Vec::new();
    let mut unavailable = Vec::new();
    for (r, res) in resolutions.iter().zip(results) {
        match res {
            Ok(a) => analyses.push(a),
            Err(e) => unavailable.push(UnavailableSeries { id: r.to_string(), error: e.to_string() }),
        }
    }
    let report = Report {
        schema_version: SCHEMA_VERSION,
        tool: ToolInfo { name: env!("CARGO_PKG_NAME").into(), version: env!("CARGO_PKG_VERSION").into() },
        config_hash: cfg.hash(),
        seed: cfg.seed,
        flows: flows.len(),
        span,
        series: analyses.iter().map(|a| a.report.clone()).collect(),
        unavailable,
        total_ms: timing.then(|| elapsed_ms(clock)),
    };
    Ok((report, analyses))
}
