#![allow(dead_code)]

use std::net::Ipv4Addr;
use std::path::Path;
use std::process::{Command, Output};

use honeystat::synth::{generate, GeneratorKind, GeneratorSpec};

pub fn series(kind: GeneratorKind, n: usize, seed: u64) -> Vec<f64> {
    generate(&GeneratorSpec::new(kind, n, seed)).unwrap()
}

/// One frame for [`pcap`]: (seconds, microseconds, src, dst, sport, dport,
/// TCP flags or `None` for UDP).
pub struct Frame {
    pub sec: u32,
    pub usec: u32,
    pub src: Ipv4Addr,
    pub dst: Ipv4Addr,
    pub sport: u16,
    pub dport: u16,
    pub tcp_flags: Option<u8>,
}

pub const SYN: u8 = 0x02;
pub const ACK: u8 = 0x10;
pub const FIN: u8 = 0x01;

pub fn tcp(sec: u32, usec: u32, src: [u8; 4], dst: [u8; 4], sport: u16, dport: u16, flags: u8) -> Frame {
    Frame { sec, usec, src: src.into(), dst: dst.into(), sport, dport, tcp_flags: Some(flags) }
}

pub fn udp(sec: u32, usec: u32, src: [u8; 4], dst: [u8; 4], sport: u16, dport: u16) -> Frame {
    Frame { sec, usec, src: src.into(), dst: dst.into(), sport, dport, tcp_flags: None }
}

fn frame_bytes(f: &Frame) -> Vec<u8> {
    let mut b = vec![0x00, 0x11, 0x22, 0x33, 0x44, 0x55, 0x66, 0x77, 0x88, 0x99, 0xaa, 0xbb, 0x08, 0x00];
    let l4_len = if f.tcp_flags.is_some() { 20 } else { 8 };
    let total = (20 + l4_len) as u16;
    b.extend_from_slice(&[0x45, 0x00]);
    b.extend_from_slice(&total.to_be_bytes());
    b.extend_from_slice(&[0x00, 0x01, 0x40, 0x00, 0x40]);
    b.push(if f.tcp_flags.is_some() { 6 } else { 17 });
    b.extend_from_slice(&[0x00, 0x00]);
    b.extend_from_slice(&f.src.octets());
    b.extend_from_slice(&f.dst.octets());
    b.extend_from_slice(&f.sport.to_be_bytes());
    b.extend_from_slice(&f.dport.to_be_bytes());
    match f.tcp_flags {
        Some(flags) => {
            b.extend_from_slice(&[0; 8]);
            b.extend_from_slice(&[0x50, flags, 0x72, 0x10, 0, 0, 0, 0]);
        }
        None => b.extend_from_slice(&[0x00, 0x08, 0x00, 0x00]),
    }
    b
}

/// Classic microsecond pcap with Ethernet framing, header fields written in
/// the requested byte order.
pub fn pcap(frames: &[Frame], big_endian: bool) -> Vec<u8> {
    let u32b = |v: u32| if big_endian { v.to_be_bytes() } else { v.to_le_bytes() };
    let u16b = |v: u16| if big_endian { v.to_be_bytes() } else { v.to_le_bytes() };
    let mut out = Vec::new();
    out.extend_from_slice(&u32b(0xa1b2_c3d4));
    out.extend_from_slice(&u16b(2));
    out.extend_from_slice(&u16b(4));
    out.extend_from_slice(&u32b(0));
    out.extend_from_slice(&u32b(0));
    out.extend_from_slice(&u32b(65535));
    out.extend_from_slice(&u32b(1));
    for f in frames {
        let body = frame_bytes(f);
        out.extend_from_slice(&u32b(f.sec));
        out.extend_from_slice(&u32b(f.usec));
        out.extend_from_slice(&u32b(body.len() as u32));
        out.extend_from_slice(&u32b(body.len() as u32));
        out.extend_from_slice(&body);
    }
    out
}

/// The four-packet capture behind `fixtures/golden4.ndjson`: a TCP
/// SYN/ACK/FIN+ACK exchange and one UDP probe.
pub fn golden_frames() -> Vec<Frame> {
    vec![
        tcp(100, 1, [1, 2, 3, 4], [10, 0, 0, 2], 4000, 445, SYN),
        tcp(100, 500_000, [1, 2, 3, 4], [10, 0, 0, 2], 4000, 445, ACK),
        tcp(101, 250_000, [1, 2, 3, 4], [10, 0, 0, 2], 4000, 445, FIN | ACK),
        udp(102, 0, [5, 6, 7, 8], [10, 0, 0, 3], 53000, 1434),
    ]
}

pub fn honeystat(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_honeystat"))
        .args(args)
        .current_dir(cwd)
        .env_remove("HONEYSTAT_CONFIG")
        .output()
        .expect("binary runs")
}
