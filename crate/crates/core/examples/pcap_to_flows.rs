//! Turn a classic pcap capture into flow records.
//!
//!     cargo run --example pcap_to_flows -- capture.pcap
//!
//! Without an argument a three-packet capture is built in memory.

use honeystat::ingest::{assemble_flows, parse_pcap, write_flow_log, AssemblyConfig};

fn demo_capture() -> Vec<u8> {
    let mut out = Vec::new();
    for v in [0xa1b2c3d4u32, 0x0002_0004, 0, 0, 65535, 1] {
        match v {
            0x0002_0004 => {
                out.extend_from_slice(&2u16.to_le_bytes());
                out.extend_from_slice(&4u16.to_le_bytes());
            }
            _ => out.extend_from_slice(&v.to_le_bytes()),
        }
    }
    // SYN, ACK, FIN|ACK from 198.51.100.7:4000 to 10.0.0.2:445
    for (sec, usec, flags) in [(100u32, 0u32, 0x02u8), (100, 400_000, 0x10), (101, 0, 0x11)] {
        let mut frame = vec![0u8; 12];
        frame.extend_from_slice(&[0x08, 0x00]);
        let mut ip = vec![0x45, 0, 0, 40, 0, 0, 0, 0, 64, 6, 0, 0, 198, 51, 100, 7, 10, 0, 0, 2];
        ip[2..4].copy_from_slice(&40u16.to_be_bytes());
        frame.extend_from_slice(&ip);
        let mut tcp = vec![0u8; 20];
        tcp[0..2].copy_from_slice(&4000u16.to_be_bytes());
        tcp[2..4].copy_from_slice(&445u16.to_be_bytes());
        tcp[12] = 5 << 4;
        tcp[13] = flags;
        frame.extend_from_slice(&tcp);
        for v in [sec, usec, frame.len() as u32, frame.len() as u32] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&frame);
    }
    out
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bytes = match std::env::args().nth(1) {
        Some(path) => std::fs::read(path)?,
        None => demo_capture(),
    };
    let capture = parse_pcap(&bytes)?;
    eprintln!("{} packets, {} frames skipped", capture.packets.len(), capture.skipped_frames);

    let assembled = assemble_flows(&capture.packets, &AssemblyConfig::default())?;
    eprintln!("{:?}", assembled.stats);
    write_flow_log(&assembled.flows, std::io::stdout().lock())?;
    Ok(())
}
