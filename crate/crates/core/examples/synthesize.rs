//! Synthetic traffic: a long-memory count series written out as flows.
//!
//!     cargo run --example synthesize > flows.ndjson
//!     honeystat report flows.ndjson

use honeystat::ingest::write_flow_log;
use honeystat::synth::{flows_from_series, generate, FlowSynthesis, GeneratorKind, GeneratorSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = GeneratorSpec::new(GeneratorKind::Fgn { hurst: 0.85 }, 1024, 11);
    let x = generate(&spec)?;
    let cfg = FlowSynthesis { level: 30.0, scale: 8.0, ..Default::default() };
    let flows = flows_from_series(&x, &cfg, spec.seed)?;
    eprintln!("{} flows across {} hourly buckets", flows.len(), x.len());
    write_flow_log(&flows, std::io::stdout().lock())?;
    Ok(())
}
