//! Hurst estimates, their average and the spurious-LRD screen.

use honeystat::lrd::hurst_all;
use honeystat::synth::{generate, GeneratorKind, GeneratorSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cases = [
        ("white noise", GeneratorKind::WhiteNoise),
        ("fGn H=0.85", GeneratorKind::Fgn { hurst: 0.85 }),
        (
            "noise + level shift",
            GeneratorKind::LevelShift { base: Box::new(GeneratorKind::WhiteNoise), shift_sigmas: 2.0, location_fraction: 0.5 },
        ),
    ];
    for (name, kind) in cases {
        let x = generate(&GeneratorSpec::new(kind, 2048, 7))?;
        let r = hurst_all(&x);
        println!("{name}");
        for m in &r.methods {
            match &m.estimate {
                Some(e) => println!("  {:<5} {:.3}", m.method, e.h_value),
                None => println!("  {:<5} -", m.method),
            }
        }
        println!("  h_bar {:.3}  spurious {}  verdict {:?}", r.h_bar.unwrap_or(f64::NAN), r.spurious, r.verdict);
    }
    Ok(())
}
