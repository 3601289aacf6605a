//! Exponential goodness of fit for inter-arrival times.

use honeystat::gof::poisson_test;
use honeystat::process::{inter_arrivals_from_times, Resolution};
use honeystat::synth::{generate, GeneratorKind, GeneratorSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let poisson = generate(&GeneratorSpec::new(GeneratorKind::PoissonProcess { lambda: 0.2 }, 3000, 3))?;
    let pareto_gaps = generate(&GeneratorSpec::new(GeneratorKind::GpdSample { xi: 0.5, beta: 1.0 }, 3000, 3))?;
    let bursty: Vec<f64> = pareto_gaps.iter().scan(0.0, |t, g| { *t += g; Some(*t) }).collect();

    for (name, times) in [("poisson arrivals", poisson), ("pareto gaps", bursty)] {
        let sample = inter_arrivals_from_times(&times, Resolution::Network)?;
        let r = poisson_test(&sample.gaps)?;
        println!(
            "{name:<17} lambda {:.3}  KS {:.4}  CM {:.3}  AD {:.3}  reject(cm, ad) = ({}, {})",
            r.fit.lambda_hat, r.ks, r.cm, r.ad, r.reject.cm, r.reject.ad
        );
    }
    Ok(())
}
