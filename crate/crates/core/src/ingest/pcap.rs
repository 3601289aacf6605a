use std::net::Ipv4Addr;

use super::{IngestError, PacketRecord, Protocol, TcpFlags};

const MAGIC_USEC: u32 = 0xa1b2_c3d4;
const MAGIC_USEC_SWAPPED: u32 = 0xd4c3_b2a1;
const GLOBAL_HEADER_LEN: usize = 24;
const RECORD_HEADER_LEN: usize = 16;
const LINKTYPE_ETHERNET: u32 = 1;
const ETHERTYPE_IPV4: u16 = 0x0800;
/// Upper bound on a sane record length when the header's snaplen is zero.
const MAX_RECORD_LEN: u32 = 262_144;

/// Packets extracted from a classic pcap capture.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PcapCapture {
    pub packets: Vec<PacketRecord>,
    /// Records in the file, including skipped ones.
    pub records_seen: usize,
    /// Non-IPv4, non-TCP/UDP, fragmented or malformed frames.
    pub skipped_frames: usize,
    /// 1 when the final record was cut short, else 0.
    pub truncated_trailing: usize,
}

#[derive(Clone, Copy)]
enum Endian {
    Little,
    Big,
}

impl Endian {
    fn u32(self, b: &[u8]) -> u32 {
        let a = [b[0], b[1], b[2], b[3]];
        match self {
            Endian::Little => u32::from_le_bytes(a),
            Endian::Big => u32::from_be_bytes(a),
        }
    }
}

/// Parse a classic (microsecond) pcap capture with Ethernet framing.
///
/// Only IPv4 TCP and UDP packets are returned; everything else is counted in
/// [`PcapCapture::skipped_frames`]. A trailing record cut short by the end of
/// the buffer is dropped and reported through `truncated_trailing`.
pub fn parse_pcap(bytes: &[u8]) -> Result<PcapCapture, IngestError> {
    if bytes.len() < 4 {
        return Err(IngestError::BadMagic(0));
    }
    let magic = u32::from_le_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]);
    let endian = match magic {
        MAGIC_USEC => Endian::Little,
        MAGIC_USEC_SWAPPED => Endian::Big,
        other => return Err(IngestError::BadMagic(other)),
    };
    if bytes.len() < GLOBAL_HEADER_LEN {
        return Err(IngestError::CorruptHeader {
            offset: 0,
            reason: format!("global header needs {GLOBAL_HEADER_LEN} bytes, have {}", bytes.len()),
        });
    }
    let snaplen = endian.u32(&bytes[16..20]);
    let linktype = endian.u32(&bytes[20..24]);
    if linktype != LINKTYPE_ETHERNET {
        return Err(IngestError::UnsupportedLinkType(linktype));
    }
    let max_len = if snaplen == 0 { MAX_RECORD_LEN } else { snaplen.max(MAX_RECORD_LEN) };

    let mut out = PcapCapture::default();
    let mut pos = GLOBAL_HEADER_LEN;
    while pos < bytes.len() {
        let remaining = bytes.len() - pos;
        if remaining < RECORD_HEADER_LEN {
            out.truncated_trailing += 1;
            log::warn!("pcap: {remaining} stray bytes after last record at offset {pos}");
            break;
        }
        let hdr = &bytes[pos..pos + RECORD_HEADER_LEN];
        let ts_sec = endian.u32(&hdr[0..4]);
        let ts_usec = endian.u32(&hdr[4..8]);
        let incl_len = endian.u32(&hdr[8..12]);
        if incl_len > max_len {
            return Err(IngestError::CorruptHeader {
                offset: pos,
                reason: format!("record length {incl_len} exceeds snaplen {max_len}"),
            });
        }
        if ts_usec >= 1_000_000 {
            return Err(IngestError::CorruptHeader {
                offset: pos,
                reason: format!("microsecond field {ts_usec} out of range"),
            });
        }
        let body_start = pos + RECORD_HEADER_LEN;
        let body_end = body_start + incl_len as usize;
        out.records_seen += 1;
        if body_end > bytes.len() {
            out.truncated_trailing += 1;
            log::warn!("pcap: truncated trailing record at offset {pos}");
            break;
        }
        let micros = u64::from(ts_sec) * 1_000_000 + u64::from(ts_usec);
        // Dividing the integer microsecond count keeps the timestamp the
        // correctly rounded f64 of its decimal form.
        let timestamp = micros as f64 / 1e6;
        match decode_ethernet(&bytes[body_start..body_end], timestamp) {
            Some(pkt) => out.packets.push(pkt),
            None => out.skipped_frames += 1,
        }
        pos = body_end;
    }
    Ok(out)
}

fn be16(b: &[u8]) -> u16 {
    u16::from_be_bytes([b[0], b[1]])
}

fn decode_ethernet(frame: &[u8], timestamp: f64) -> Option<PacketRecord> {
    if frame.len() < 14 || be16(&frame[12..14]) != ETHERTYPE_IPV4 {
        return None;
    }
    decode_ipv4(&frame[14..], timestamp)
}

fn decode_ipv4(ip: &[u8], timestamp: f64) -> Option<PacketRecord> {
    if ip.len() < 20 || ip[0] >> 4 != 4 {
        return None;
    }
    let ihl = usize::from(ip[0] & 0x0f) * 4;
    if ihl < 20 || ip.len() < ihl {
        return None;
    }
    let total_len = usize::from(be16(&ip[2..4]));
    let frag_offset = be16(&ip[6..8]) & 0x1fff;
    if frag_offset != 0 {
        return None;
    }
    let src_ip = Ipv4Addr::new(ip[12], ip[13], ip[14], ip[15]);
    let dst_ip = Ipv4Addr::new(ip[16], ip[17], ip[18], ip[19]);
    let l4 = &ip[ihl..];
    // Payload sizes come from the IP header so snaplen truncation does not
    // change them.
    let l4_len = total_len.saturating_sub(ihl);
    match ip[9] {
        6 => {
            if l4.len() < 20 {
                return None;
            }
            let data_offset = usize::from(l4[12] >> 4) * 4;
            Some(PacketRecord {
                timestamp,
                src_ip,
                dst_ip,
                src_port: be16(&l4[0..2]),
                dst_port: be16(&l4[2..4]),
                protocol: Protocol::Tcp,
                tcp_flags: TcpFlags::from_bits_truncate(l4[13]),
                payload_len: l4_len.saturating_sub(data_offset) as u32,
            })
        }
        17 => {
            if l4.len() < 8 {
                return None;
            }
            Some(PacketRecord {
                timestamp,
                src_ip,
                dst_ip,
                src_port: be16(&l4[0..2]),
                dst_port: be16(&l4[2..4]),
                protocol: Protocol::Udp,
                tcp_flags: TcpFlags::empty(),
                payload_len: usize::from(be16(&l4[4..6])).saturating_sub(8) as u32,
            })
        }
        _ => None,
    }
}
