//! Peaks-over-threshold GPD fits and tail regimes.

use honeystat::synth::{generate, GeneratorKind, GeneratorSpec};
use honeystat::tails::{classify_tail, fit_gpd, TailConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = TailConfig::default();
    for xi in [-0.2, 0.3, 0.7, 1.2] {
        let y = generate(&GeneratorSpec::new(GeneratorKind::GpdSample { xi, beta: 1.0 }, 5000, 21))?;
        let fit = fit_gpd(&y, &cfg)?;
        let class = classify_tail(&fit, cfg.z);
        let se = fit.se_xi.map_or("-".to_string(), |s| format!("{s:.3}"));
        println!(
            "true xi {xi:>5}: u {:.2}, {} exceedances, xi {:.3} (se {se}), beta {:.3} -> {:?}",
            fit.threshold, fit.n_exceed, fit.xi, fit.beta, class.regime
        );
    }
    Ok(())
}
