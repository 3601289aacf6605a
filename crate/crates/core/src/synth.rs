//! Seeded ground-truth generators.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64(seed)`, a portable
//! generator whose stream does not depend on platform or word size, so a
//! spec and seed produce the same numbers everywhere.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use std::net::Ipv4Addr;

use crate::forecast::fracdiff;
use crate::ingest::{sort_flows, FlowRecord, Protocol, Termination};
use crate::numeric::{mean, sample_variance};

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("circulant embedding has negative eigenvalues for H = {0}")]
    EmbeddingFailure(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorKind {
    /// iid standard normal.
    WhiteNoise,
    /// Unit-variance fractional Gaussian noise.
    Fgn { hurst: f64 },
    /// (1 - B)^{-d} applied to unit white noise.
    Farima0 { d: f64 },
    /// Stationary AR(1) with unit innovations.
    Ar1 { phi: f64 },
    /// Arrival times of a homogeneous Poisson process.
    PoissonProcess { lambda: f64 },
    /// iid generalized Pareto draws.
    GpdSample { xi: f64, beta: f64 },
    /// Base series plus a step of `shift_sigmas` base standard deviations
    /// from `location_fraction * n` on.
    LevelShift { base: Box<GeneratorKind>, shift_sigmas: f64, location_fraction: f64 },
    /// Base series plus the ramp `slope * t / n`.
    Trend { base: Box<GeneratorKind>, slope: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub kind: GeneratorKind,
    pub n: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, n: usize, seed: u64) -> Self {
        GeneratorSpec { kind, n, seed }
    }
}

impl GeneratorKind {
    /// Whether `generate` yields arrival timestamps instead of a series.
    pub fn yields_arrivals(&self) -> bool {
        matches!(self, GeneratorKind::PoissonProcess { .. })
    }

    fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidSpec(m));
        match self {
            GeneratorKind::WhiteNoise => Ok(()),
            GeneratorKind::Fgn { hurst } if !(*hurst > 0.0 && *hurst < 1.0) => bad(format!("H = {hurst} outside (0, 1)")),
            GeneratorKind::Farima0 { d } if !(*d > -0.5 && *d < 0.5) => bad(format!("d = {d} outside (-0.5, 0.5)")),
            GeneratorKind::Ar1 { phi } if !(phi.abs() < 1.0) => bad(format!("|phi| = {} not below 1", phi.abs())),
            GeneratorKind::PoissonProcess { lambda } if !(*lambda > 0.0) => bad(format!("lambda = {lambda} must be positive")),
            GeneratorKind::GpdSample { xi, beta } if !(*beta > 0.0) || !xi.is_finite() => bad(format!("GPD(xi = {xi}, beta = {beta})")),
            GeneratorKind::LevelShift { base, location_fraction, .. } => {
                if !(0.0..=1.0).contains(location_fraction) {
                    return bad(format!("location_fraction {location_fraction} outside [0, 1]"));
                }
                base.validate_series_base()
            }
            GeneratorKind::Trend { base, .. } => base.validate_series_base(),
            _ => Ok(()),
        }
    }

    fn validate_series_base(&self) -> Result<(), SynthError> {
        if self.yields_arrivals() {
            return Err(SynthError::InvalidSpec("arrival generators cannot be a base series".into()));
        }
        self.validate()
    }
}

/// Generate `spec.n` values (or arrival times for a Poisson process).
pub fn generate(spec: &GeneratorSpec) -> Result<Vec<f64>, SynthError> {
    spec.kind.validate()?;
    if spec.n == 0 {
        return Err(SynthError::InvalidSpec("n must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    generate_with(&spec.kind, spec.n, &mut rng)
}

fn generate_with(kind: &GeneratorKind, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>, SynthError> {
    Ok(match kind {
        GeneratorKind::WhiteNoise => normals(n, rng),
        GeneratorKind::Fgn { hurst } => fgn(*hurst, n, rng)?,
        GeneratorKind::Farima0 { d } => {
            // The truncated filter starts cold; a burn-in lets the long
            // memory build up before the kept stretch.
            let burn = n.max(1024);
            let noise = normals(n + burn, rng);
            fracdiff(&noise, -d).split_off(burn)
        }
        GeneratorKind::Ar1 { phi } => {
            let mut x = Vec::with_capacity(n);
            let mut prev: f64 = rng.sample::<f64, _>(StandardNormal) / (1.0 - phi * phi).sqrt();
            x.push(prev);
            for _ in 1..n {
                prev = phi * prev + rng.sample::<f64, _>(StandardNormal);
                x.push(prev);
            }
            x
        }
        GeneratorKind::PoissonProcess { lambda } => {
            let exp = Exp::new(*lambda).expect("validated");
            let mut t = 0.0;
            (0..n)
                .map(|_| {
                    t += exp.sample(rng);
                    t
                })
                .collect()
        }
        GeneratorKind::GpdSample { xi, beta } => (0..n).map(|_| gpd_quantile(rng.gen::<f64>(), *xi, *beta)).collect(),
        GeneratorKind::LevelShift { base, shift_sigmas, location_fraction } => {
            let mut x = generate_with(base, n, rng)?;
            let step = shift_sigmas * sample_variance(&x).sqrt();
            let at = (location_fraction * n as f64).floor() as usize;
            for v in x.iter_mut().skip(at) {
                *v += step;
            }
            x
        }
        GeneratorKind::Trend { base, slope } => {
            let mut x = generate_with(base, n, rng)?;
            for (t, v) in x.iter_mut().enumerate() {
                *v += slope * t as f64 / n as f64;
            }
            x
        }
    })
}

fn normals(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Inverse CDF of GPD(xi, beta): `beta ((1 - u)^{-xi} - 1) / xi`.
pub fn gpd_quantile(u: f64, xi: f64, beta: f64) -> f64 {
    if xi.abs() < 1e-12 {
        -beta * (1.0 - u).ln()
    } else {
        beta * ((1.0 - u).powf(-xi) - 1.0) / xi
    }
}

/// Autocovariance of unit-variance fGn at lag `k`.
pub fn fgn_autocovariance(hurst: f64, k: usize) -> f64 {
    let k = k as f64;
    let h2 = 2.0 * hurst;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

/// Circulant-embedding (Davies–Harte) draw of `n` fGn values.
fn fgn(hurst: f64, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>, SynthError> {
    let mut half = n.next_power_of_two().max(2);
    // Negative eigenvalues cannot occur for fGn in theory; the doubling
    // covers numerical trouble at extreme H.
    for _ in 0..3 {
        let m = 2 * half;
        let mut row: Vec<Complex64> = (0..m)
            .map(|i| {
                let lag = if i <= half { i } else { m - i };
                Complex64::new(fgn_autocovariance(hurst, lag), 0.0)
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        fft.process(&mut row);
        let top = row.iter().map(|c| c.re).fold(0.0, f64::max);
        if row.iter().any(|c| c.re < -1e-9 * top) {
            half *= 2;
            continue;
        }
        let mut z: Vec<Complex64> = row
            .iter()
            .map(|c| {
                let s = (c.re.max(0.0) / m as f64).sqrt();
                Complex64::new(s * rng.sample::<f64, _>(StandardNormal), s * rng.sample::<f64, _>(StandardNormal))
            })
            .collect();
        fft.process(&mut z);
        return Ok(z.iter().take(n).map(|c| c.re).collect());
    }
    Err(SynthError::EmbeddingFailure(hurst))
}

/// Center and scale to unit sample variance in place.
pub fn standardize(x: &mut [f64]) {
    let m = mean(x);
    let s = sample_variance(x).sqrt();
    if s > 0.0 {
        for v in x.iter_mut() {
            *v = (*v - m) / s;
        }
    }
}

/// How a synthetic rate series becomes attack flows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowSynthesis {
    /// Bucket count is `round(max(0, level + scale * x_t))`.
    pub level: f64,
    pub scale: f64,
    pub bucket: f64,
    /// Start of bucket 0, in seconds.
    pub origin: f64,
    /// Victims `victim_base`, `victim_base + 1`, ... take turns.
    pub victims: u32,
    pub victim_base: Ipv4Addr,
    /// Ports take turns after each full round of victims.
    pub ports: Vec<u16>,
    /// Attackers are drawn uniformly from this many addresses above 1.0.0.0.
    pub attackers: u32,
    pub duration: f64,
}

impl Default for FlowSynthesis {
    fn default() -> Self {
        FlowSynthesis {
            level: 20.0,
            scale: 5.0,
            bucket: 3600.0,
            origin: 0.0,
            victims: 3,
            victim_base: Ipv4Addr::new(10, 0, 0, 1),
            ports: vec![445, 139, 80, 3306, 22],
            attackers: 5000,
            duration: 1.0,
        }
    }
}

impl FlowSynthesis {
    fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidSpec(m.to_string()));
        if !(self.bucket > 0.0 && self.bucket.is_finite()) {
            return bad("bucket must be positive");
        }
        if !(self.origin >= 0.0 && self.duration >= 0.0) {
            return bad("origin and duration must be non-negative");
        }
        if self.victims == 0 || self.ports.is_empty() || self.attackers == 0 {
            return bad("victims, ports and attackers must be non-empty");
        }
        Ok(())
    }

    /// Counts per bucket for a real-valued series.
    pub fn counts(&self, series: &[f64]) -> Vec<u64> {
        series.iter().map(|x| (self.level + self.scale * x).max(0.0).round() as u64).collect()
    }
}

/// Flows whose per-bucket counts follow `series`; arrival instants are
/// uniform inside each bucket.
pub fn flows_from_series(series: &[f64], cfg: &FlowSynthesis, seed: u64) -> Result<Vec<FlowRecord>, SynthError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut times = Vec::new();
    for (k, &c) in cfg.counts(series).iter().enumerate() {
        let lo = cfg.origin + k as f64 * cfg.bucket;
        let mut inside: Vec<f64> = (0..c).map(|_| lo + rng.gen::<f64>() * cfg.bucket).collect();
        inside.sort_by(f64::total_cmp);
        times.extend(inside);
    }
    Ok(flows_at(&times, cfg, &mut rng))
}

/// Flows starting at the given instants (for instance Poisson arrivals).
pub fn flows_from_arrivals(times: &[f64], cfg: &FlowSynthesis, seed: u64) -> Result<Vec<FlowRecord>, SynthError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sorted: Vec<f64> = times.iter().map(|t| cfg.origin + t).collect();
    sorted.sort_by(f64::total_cmp);
    Ok(flows_at(&sorted, cfg, &mut rng))
}

fn flows_at(times: &[f64], cfg: &FlowSynthesis, rng: &mut ChaCha8Rng) -> Vec<FlowRecord> {
    let base = u32::from(cfg.victim_base);
    let mut flows: Vec<FlowRecord> = times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            // Microsecond resolution, as in a capture.
            let start = (t * 1e6).round() / 1e6;
            let k = k as u64;
            let victims = u64::from(cfg.victims);
            FlowRecord {
                attacker_ip: Ipv4Addr::from(0x0100_0000 + rng.gen_range(0..cfg.attackers)),
                attacker_port: rng.gen_range(1024..=u16::MAX),
                victim_ip: Ipv4Addr::from(base.wrapping_add((k % victims) as u32)),
                victim_port: cfg.ports[((k / victims) % cfg.ports.len() as u64) as usize],
                protocol: Protocol::Tcp,
                start,
                end: start + cfg.duration,
                packet_count: 3,
                termination: Termination::Fin,
            }
        })
        .collect();
    sort_flows(&mut flows);
    flows
}
