//! Everything at once: the JSON report the `report` subcommand prints.

use honeystat::cli::{build_report, AnalysisConfig, ResolutionSelector};
use honeystat::synth::{flows_from_series, generate, FlowSynthesis, GeneratorKind, GeneratorSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x = generate(&GeneratorSpec::new(GeneratorKind::Fgn { hurst: 0.8 }, 600, 2))?;
    let flows = flows_from_series(&x, &FlowSynthesis::default(), 2)?;

    let mut cfg = AnalysisConfig { resolutions: vec![ResolutionSelector::Network, ResolutionSelector::AllVictims], ..Default::default() };
    cfg.forecast.rolling.max_p = 2;
    cfg.forecast.rolling.max_q = 2;
    cfg.validate()?;

    let (report, _) = build_report(&flows, &cfg, false)?;
    for s in &report.series {
        let h = s.hurst.ok().and_then(|h| h.h_bar).unwrap_or(f64::NAN);
        let oa = s.forecast.as_ref().and_then(|f| f.ok()).map_or(f64::NAN, |f| f.metrics.oa);
        eprintln!("{:<20} flows {:>6}  h_bar {h:.3}  OA {oa:.3}", s.id, s.flows);
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
