//! Attack processes at the network, victim, port and attacker resolutions,
//! and the two Step-2 statistics built from them: per-bucket attack rates and
//! inter-arrival gaps.

use std::collections::HashSet;
use std::fmt;
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::FlowRecord;

/// Offset added per tied arrival so that gaps stay strictly positive.
pub const TIE_JITTER: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum ProcessError {
    #[error("no flow matches resolution {0}")]
    EmptySelection(Resolution),
    #[error("resolution {resolution} has {arrivals} arrival(s); at least 2 are needed")]
    TooFewArrivals { resolution: Resolution, arrivals: usize },
    #[error("invalid bucket width {0}")]
    InvalidBucket(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Resolution {
    Network,
    Victim { victim_ip: Ipv4Addr },
    Port { victim_ip: Ipv4Addr, victim_port: u16 },
    Attacker { victim_ip: Ipv4Addr },
}

impl Resolution {
    /// Whether a flow belongs to this process before attacker dedup.
    pub fn matches(&self, flow: &FlowRecord) -> bool {
        match *self {
            Resolution::Network => true,
            Resolution::Victim { victim_ip } | Resolution::Attacker { victim_ip } => flow.victim_ip == victim_ip,
            Resolution::Port { victim_ip, victim_port } => flow.victim_ip == victim_ip && flow.victim_port == victim_port,
        }
    }

    /// Flows contributing to this process, sorted by start.
    pub fn select(&self, flows: &[FlowRecord]) -> Vec<FlowRecord> {
        let mut picked: Vec<FlowRecord> = flows.iter().filter(|f| self.matches(f)).cloned().collect();
        picked.sort_by(|a, b| a.start.total_cmp(&b.start));
        match *self {
            Resolution::Attacker { victim_ip } => derive_attacker_level(&picked, victim_ip),
            _ => picked,
        }
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resolution::Network => write!(f, "network"),
            Resolution::Victim { victim_ip } => write!(f, "victim:{victim_ip}"),
            Resolution::Port { victim_ip, victim_port } => write!(f, "port:{victim_ip}:{victim_port}"),
            Resolution::Attacker { victim_ip } => write!(f, "attacker:{victim_ip}"),
        }
    }
}

impl std::str::FromStr for Resolution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let ip = |p: &str| p.parse::<Ipv4Addr>().map_err(|e| format!("{s}: {e}"));
        match parts.as_slice() {
            ["network"] => Ok(Resolution::Network),
            ["victim", v] => Ok(Resolution::Victim { victim_ip: ip(v)? }),
            ["attacker", v] => Ok(Resolution::Attacker { victim_ip: ip(v)? }),
            ["port", v, p] => Ok(Resolution::Port {
                victim_ip: ip(v)?,
                victim_port: p.parse().map_err(|e| format!("{s}: {e}"))?,
            }),
            _ => Err(format!("unrecognised resolution '{s}'")),
        }
    }
}

/// The time grid a rate series is counted on: `buckets` consecutive
/// intervals of `bucket` seconds starting at `origin`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub origin: f64,
    pub bucket: f64,
    pub buckets: usize,
}

impl Span {
    /// Smallest grid covering every flow start, with the origin floored to a
    /// whole bucket boundary (UTC epoch aligned).
    pub fn covering(flows: &[FlowRecord], bucket: f64) -> Result<Span, ProcessError> {
        if !(bucket > 0.0 && bucket.is_finite()) {
            return Err(ProcessError::InvalidBucket(bucket));
        }
        let (lo, hi) = flows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), f| (lo.min(f.start), hi.max(f.start)));
        if !lo.is_finite() {
            return Err(ProcessError::EmptySelection(Resolution::Network));
        }
        let origin = (lo / bucket).floor() * bucket;
        let buckets = ((hi - origin) / bucket).floor() as usize + 1;
        Ok(Span { origin, bucket, buckets })
    }

    pub fn index_of(&self, t: f64) -> Option<usize> {
        if t < self.origin {
            return None;
        }
        let k = ((t - self.origin) / self.bucket).floor() as usize;
        (k < self.buckets).then_some(k)
    }
}

/// Attack counts per bucket for one process instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSeries {
    pub resolution: Resolution,
    pub bucket: f64,
    pub origin: f64,
    pub counts: Vec<u64>,
}

impl RateSeries {
    pub fn values(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn bucket_start(&self, k: usize) -> f64 {
        self.origin + k as f64 * self.bucket
    }

    /// `bucket_index,timestamp,count` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bucket_index,timestamp,count\n");
        for (k, c) in self.counts.iter().enumerate() {
            out.push_str(&format!("{k},{},{c}\n", self.bucket_start(k)));
        }
        out
    }
}

/// Count flow arrivals per bucket of `span` for one resolution.
///
/// Each flow counts once, in the bucket holding its start. Flows outside the
/// span are ignored.
pub fn build_rate_series(flows: &[FlowRecord], resolution: Resolution, span: Span) -> Result<RateSeries, ProcessError> {
    if !(span.bucket > 0.0 && span.bucket.is_finite()) {
        return Err(ProcessError::InvalidBucket(span.bucket));
    }
    let selected = resolution.select(flows);
    let mut counts = vec![0u64; span.buckets];
    let mut any = false;
    for f in &selected {
        if let Some(k) = span.index_of(f.start) {
            counts[k] += 1;
            any = true;
        }
    }
    if !any {
        return Err(ProcessError::EmptySelection(resolution));
    }
    Ok(RateSeries { resolution, bucket: span.bucket, origin: span.origin, counts })
}

/// Keep only the first flow each distinct attacker launched against
/// `victim_ip` over the whole input. Later attacks by the same attacker are
/// dropped. The result is sorted by start.
pub fn derive_attacker_level(flows: &[FlowRecord], victim_ip: Ipv4Addr) -> Vec<FlowRecord> {
    let mut sorted: Vec<&FlowRecord> = flows.iter().filter(|f| f.victim_ip == victim_ip).collect();
    sorted.sort_by(|a, b| a.start.total_cmp(&b.start));
    let mut seen = HashSet::new();
    sorted.into_iter().filter(|f| seen.insert(f.attacker_ip)).cloned().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterArrivalSample {
    pub resolution: Resolution,
    /// Seconds between consecutive arrivals, all strictly positive.
    pub gaps: Vec<f64>,
}

impl InterArrivalSample {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("gap\n");
        for g in &self.gaps {
            out.push_str(&format!("{g}\n"));
        }
        out
    }
}

/// Gaps between consecutive flow starts at one resolution.
///
/// Arrivals sharing a timestamp are spread out: each arrival at or before its
/// predecessor is moved to the predecessor plus [`TIE_JITTER`], so the k-th
/// member of a tie lands k microseconds later.
pub fn inter_arrivals(flows: &[FlowRecord], resolution: Resolution) -> Result<InterArrivalSample, ProcessError> {
    let starts: Vec<f64> = resolution.select(flows).iter().map(|f| f.start).collect();
    inter_arrivals_from_times(&starts, resolution)
}

pub fn inter_arrivals_from_times(times: &[f64], resolution: Resolution) -> Result<InterArrivalSample, ProcessError> {
    if times.len() < 2 {
        return Err(ProcessError::TooFewArrivals { resolution, arrivals: times.len() });
    }
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut adjusted = Vec::with_capacity(sorted.len());
    let mut prev = f64::NEG_INFINITY;
    for &t in &sorted {
        let t = if t <= prev { prev + TIE_JITTER } else { t };
        adjusted.push(t);
        prev = t;
    }
    let gaps = adjusted.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(InterArrivalSample { resolution, gaps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Protocol, Termination};

    pub(crate) fn flow(attacker: u8, victim: u8, port: u16, start: f64) -> FlowRecord {
        FlowRecord {
            attacker_ip: Ipv4Addr::new(1, 1, 1, attacker),
            attacker_port: 40000,
            victim_ip: Ipv4Addr::new(10, 0, 0, victim),
            victim_port: port,
            protocol: Protocol::Tcp,
            start,
            end: start,
            packet_count: 1,
            termination: Termination::Rst,
        }
    }

    const H: f64 = 3600.0;

    #[test]
    fn three_flows_one_bucket() {
        let flows = vec![flow(1, 1, 22, 10.0), flow(2, 1, 22, 20.0), flow(3, 2, 80, 30.0)];
        let span = Span::covering(&flows, H).unwrap();
        let s = build_rate_series(&flows, Resolution::Network, span).unwrap();
        assert_eq!(s.counts, vec![3]);
    }

    #[test]
    fn hand_bucketing() {
        let flows = vec![flow(1, 1, 22, 0.5 * H), flow(2, 1, 22, 1.5 * H), flow(3, 1, 22, 1.6 * H)];
        let span = Span::covering(&flows, H).unwrap();
        let s = build_rate_series(&flows, Resolution::Network, span).unwrap();
        assert_eq!(s.counts, vec![1, 2]);
        assert_eq!(s.origin, 0.0);
    }

    #[test]
    fn origin_is_floored_to_bucket() {
        let flows = vec![flow(1, 1, 22, 5.0 * H + 100.0), flow(1, 1, 22, 7.0 * H + 1.0)];
        let span = Span::covering(&flows, H).unwrap();
        assert_eq!(span.origin, 5.0 * H);
        assert_eq!(span.buckets, 3);
    }

    #[test]
    fn port_filter() {
        let flows = vec![flow(1, 1, 445, 1.0), flow(2, 1, 80, 2.0), flow(3, 1, 445, 3.0), flow(4, 2, 445, 4.0)];
        let span = Span::covering(&flows, H).unwrap();
        let res = Resolution::Port { victim_ip: Ipv4Addr::new(10, 0, 0, 1), victim_port: 445 };
        assert_eq!(build_rate_series(&flows, res, span).unwrap().counts, vec![2]);
    }

    #[test]
    fn empty_selection() {
        let flows = vec![flow(1, 1, 445, 1.0)];
        let span = Span::covering(&flows, H).unwrap();
        let res = Resolution::Victim { victim_ip: Ipv4Addr::new(10, 0, 0, 7) };
        assert_eq!(build_rate_series(&flows, res, span), Err(ProcessError::EmptySelection(res)));
    }

    #[test]
    fn attacker_dedup() {
        let v = Ipv4Addr::new(10, 0, 0, 1);
        let flows = vec![flow(1, 1, 22, 1.0), flow(1, 1, 80, 2.0), flow(1, 1, 22, 3.0), flow(2, 1, 22, 4.0)];
        let kept = derive_attacker_level(&flows, v);
        assert_eq!(kept.iter().map(|f| f.start).collect::<Vec<_>>(), vec![1.0, 4.0]);

        let single = vec![flow(1, 1, 22, 1.0)];
        assert_eq!(derive_attacker_level(&single, v), single);

        let interleaved = vec![flow(1, 1, 22, 1.0), flow(2, 1, 22, 2.0), flow(1, 1, 22, 3.0), flow(2, 1, 22, 4.0)];
        let kept = derive_attacker_level(&interleaved, v);
        assert_eq!(kept.iter().map(|f| (f.attacker_ip.octets()[3], f.start)).collect::<Vec<_>>(), vec![(1, 1.0), (2, 2.0)]);
    }

    #[test]
    fn gaps() {
        let flows = vec![flow(1, 1, 22, 0.0), flow(1, 1, 22, 1.0), flow(1, 1, 22, 3.0)];
        assert_eq!(inter_arrivals(&flows, Resolution::Network).unwrap().gaps, vec![1.0, 2.0]);
    }

    #[test]
    fn tie_jitter() {
        let flows = vec![flow(1, 1, 22, 0.0), flow(2, 1, 22, 0.0), flow(3, 1, 22, 1.0)];
        let g = inter_arrivals(&flows, Resolution::Network).unwrap().gaps;
        assert!((g[0] - 1e-6).abs() < 1e-15);
        assert!((g[1] - (1.0 - 1e-6)).abs() < 1e-12);
        let triple = inter_arrivals_from_times(&[5.0, 5.0, 5.0], Resolution::Network).unwrap().gaps;
        assert!(triple.iter().all(|&g| g > 0.0));
    }

    #[test]
    fn one_flow_is_too_few() {
        let flows = vec![flow(1, 1, 22, 0.0)];
        assert!(matches!(inter_arrivals(&flows, Resolution::Network), Err(ProcessError::TooFewArrivals { .. })));
    }

    #[test]
    fn resolution_ids_round_trip() {
        for r in [
            Resolution::Network,
            Resolution::Victim { victim_ip: Ipv4Addr::new(10, 0, 0, 1) },
            Resolution::Port { victim_ip: Ipv4Addr::new(10, 0, 0, 1), victim_port: 22 },
            Resolution::Attacker { victim_ip: Ipv4Addr::new(10, 0, 0, 3) },
        ] {
            assert_eq!(r.to_string().parse::<Resolution>().unwrap(), r);
        }
    }
}
