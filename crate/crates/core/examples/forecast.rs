//! Model selection and a rolling-origin forecast backtest.

use honeystat::forecast::{rolling_evaluate, select_best, Family, ForecastConfig};
use honeystat::synth::{generate, GeneratorKind, GeneratorSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let noise = generate(&GeneratorSpec::new(GeneratorKind::Farima0 { d: 0.3 }, 400, 5))?;
    let x: Vec<f64> = noise.iter().map(|v| 50.0 + 10.0 * v).collect();

    for family in [Family::Arma, Family::Farima] {
        let m = select_best(&x, family)?;
        println!("{family:?}: p={} q={} d={:.3} phi={:.3?} theta={:.3?}", m.p(), m.q(), m.d(), m.phi(), m.theta());
    }

    let cfg = ForecastConfig { h: 1, window: Some(100), max_p: 2, max_q: 2, ..Default::default() };
    let run = rolling_evaluate(&x, Family::Farima, &cfg)?;
    let m = run.metrics;
    println!("{} steps, PMAD {:.3}, OA {:.3}, UA {:.3}", m.steps, m.pmad, m.oa, m.ua);
    for s in run.steps.iter().take(5) {
        println!("  t={} predicted {:.2} observed {:.0}", s.t, s.predicted, s.observed);
    }
    Ok(())
}
