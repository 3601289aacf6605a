//! Count flows per bucket at every resolution.

use honeystat::process::{build_rate_series, Resolution, Span};
use honeystat::synth::{flows_from_series, generate, FlowSynthesis, GeneratorKind, GeneratorSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x = generate(&GeneratorSpec::new(GeneratorKind::Fgn { hurst: 0.8 }, 48, 1))?;
    let flows = flows_from_series(&x, &FlowSynthesis::default(), 1)?;
    let span = Span::covering(&flows, 3600.0)?;
    println!("{} flows over {} hourly buckets", flows.len(), span.buckets);

    let victim = flows[0].victim_ip;
    let port = flows[0].victim_port;
    for r in [
        Resolution::Network,
        Resolution::Victim { victim_ip: victim },
        Resolution::Port { victim_ip: victim, victim_port: port },
        Resolution::Attacker { victim_ip: victim },
    ] {
        let s = build_rate_series(&flows, r, span)?;
        let head: Vec<String> = s.counts.iter().take(12).map(u64::to_string).collect();
        println!("{r:<24} total {:>5}  first 12: {}", s.total(), head.join(" "));
    }
    Ok(())
}
