//! Step 1 of the pipeline: turn raw captures or exported flow logs into
//! [`FlowRecord`]s, the unit of "one attack".
//!
//! Two inputs are supported:
//!
//! * classic libpcap captures (Ethernet link type, IPv4 TCP/UDP only), parsed
//!   by [`parse_pcap`] and grouped into flows by [`assemble_flows`];
//! * NDJSON flow logs, one [`FlowRecord`] object per line, read by
//!   [`parse_flow_log`] and written back by [`write_flow_log`].

mod assemble;
mod flowlog;
mod pcap;

use std::fmt;
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use assemble::{assemble_flows, AssemblyConfig, AssemblyOutput, AssemblyStats, Service};
pub use flowlog::{parse_flow_log, write_flow_log, FlowLog, LineDiagnostic};
pub use pcap::{parse_pcap, PcapCapture};

#[derive(Debug, Error, PartialEq)]
pub enum IngestError {
    #[error("not a classic pcap file (magic {0:#010x})")]
    BadMagic(u32),
    #[error("corrupt pcap header at byte offset {offset}: {reason}")]
    CorruptHeader { offset: usize, reason: String },
    #[error("unsupported pcap link type {0} (only Ethernet is supported)")]
    UnsupportedLinkType(u32),
    #[error("invalid assembly configuration: {0}")]
    InvalidConfig(String),
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Protocol {
    #[serde(rename = "TCP")]
    Tcp,
    #[serde(rename = "UDP")]
    Udp,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Protocol::Tcp => f.write_str("TCP"),
            Protocol::Udp => f.write_str("UDP"),
        }
    }
}

/// TCP control bits, using the on-the-wire bit positions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct TcpFlags(u8);

impl TcpFlags {
    pub const FIN: TcpFlags = TcpFlags(0x01);
    pub const SYN: TcpFlags = TcpFlags(0x02);
    pub const RST: TcpFlags = TcpFlags(0x04);
    pub const PSH: TcpFlags = TcpFlags(0x08);
    pub const ACK: TcpFlags = TcpFlags(0x10);
    pub const URG: TcpFlags = TcpFlags(0x20);

    pub const fn empty() -> Self {
        TcpFlags(0)
    }

    /// Keeps only the six flags we model; ECE/CWR are dropped.
    pub const fn from_bits_truncate(bits: u8) -> Self {
        TcpFlags(bits & 0x3f)
    }

    pub const fn bits(self) -> u8 {
        self.0
    }

    pub const fn contains(self, other: TcpFlags) -> bool {
        self.0 & other.0 == other.0
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }
}

impl std::ops::BitOr for TcpFlags {
    type Output = TcpFlags;
    fn bitor(self, rhs: TcpFlags) -> TcpFlags {
        TcpFlags(self.0 | rhs.0)
    }
}

/// One IPv4 TCP or UDP packet lifted out of a capture.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketRecord {
    /// Seconds since the epoch, microsecond resolution.
    pub timestamp: f64,
    pub src_ip: Ipv4Addr,
    pub dst_ip: Ipv4Addr,
    pub src_port: u16,
    pub dst_port: u16,
    pub protocol: Protocol,
    pub tcp_flags: TcpFlags,
    pub payload_len: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Termination {
    Fin,
    Rst,
    Timeout,
    Lifetime,
    EndOfCapture,
}

/// One assembled attack flow. Field names double as the NDJSON schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub attacker_ip: Ipv4Addr,
    pub attacker_port: u16,
    pub victim_ip: Ipv4Addr,
    pub victim_port: u16,
    pub protocol: Protocol,
    /// Timestamp of the first packet; this is the attack's arrival time.
    pub start: f64,
    pub end: f64,
    pub packet_count: u64,
    pub termination: Termination,
}

/// The 5-tuple identifying a flow within its active window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlowKey {
    pub attacker_ip: Ipv4Addr,
    pub attacker_port: u16,
    pub victim_ip: Ipv4Addr,
    pub victim_port: u16,
    pub protocol: Protocol,
}

impl FlowRecord {
    pub fn key(&self) -> FlowKey {
        FlowKey {
            attacker_ip: self.attacker_ip,
            attacker_port: self.attacker_port,
            victim_ip: self.victim_ip,
            victim_port: self.victim_port,
            protocol: self.protocol,
        }
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        if !(self.start.is_finite() && self.end.is_finite()) {
            return Err("non-finite timestamp".into());
        }
        if self.start < 0.0 {
            return Err(format!("negative start {}", self.start));
        }
        if self.end < self.start {
            return Err(format!("end {} precedes start {}", self.end, self.start));
        }
        if self.packet_count == 0 {
            return Err("packet_count must be at least 1".into());
        }
        Ok(())
    }
}

/// Sort flows into the canonical output order: by start, then by key.
pub fn sort_flows(flows: &mut [FlowRecord]) {
    flows.sort_by(|a, b| {
        a.start
            .total_cmp(&b.start)
            .then_with(|| a.key().cmp(&b.key()))
            .then_with(|| a.end.total_cmp(&b.end))
    });
}
