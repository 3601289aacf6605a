mod common;

use std::net::Ipv4Addr;

use proptest::prelude::*;

use common::{pcap, series, tcp, udp, Frame};
use honeystat::forecast::{
    accuracy, forecast_h, forecast_path, fracdiff, select_best_with, ArmaModel, Family, FitOptions, ForecastConfig,
    FittedModel,
};
use honeystat::gof::poisson_test;
use honeystat::ingest::{assemble_flows, parse_flow_log, parse_pcap, write_flow_log, AssemblyConfig, FlowRecord, Protocol, Termination};
use honeystat::lrd::{estimate, HurstConfig, HurstMethod};
use honeystat::process::{build_rate_series, inter_arrivals, Resolution, Span};
use honeystat::synth::GeneratorKind;
use honeystat::tails::gpd_log_likelihood;

fn flow_strategy() -> impl Strategy<Value = FlowRecord> {
    (1u8..30, 1u8..6, prop::sample::select(vec![22u16, 80, 139, 445]), 0.0f64..50_000.0, 0.0f64..100.0).prop_map(
        |(a, v, port, start, dur)| FlowRecord {
            attacker_ip: Ipv4Addr::new(1, 0, 0, a),
            attacker_port: 40000,
            victim_ip: Ipv4Addr::new(10, 0, 0, v),
            victim_port: port,
            protocol: Protocol::Tcp,
            start,
            end: start + dur,
            packet_count: 2,
            termination: Termination::Timeout,
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gof_statistics_ignore_the_time_unit(gaps in prop::collection::vec(0.01f64..100.0, 10..200), c in 0.001f64..1000.0) {
        let a = poisson_test(&gaps).unwrap();
        let scaled: Vec<f64> = gaps.iter().map(|g| g * c).collect();
        let b = poisson_test(&scaled).unwrap();
        prop_assert!((a.ks - b.ks).abs() <= 1e-9 * a.ks.max(1.0));
        prop_assert!((a.cm - b.cm).abs() <= 1e-9 * a.cm.max(1.0));
        prop_assert!((a.ad - b.ad).abs() <= 1e-7 * a.ad.max(1.0));
        prop_assert!((a.fit.lambda_hat / c - b.fit.lambda_hat).abs() <= 1e-12 * a.fit.lambda_hat / c);
    }

    #[test]
    fn accuracy_complements_and_scale_invariance(
        pairs in prop::collection::vec((0.1f64..500.0, 0.0f64..500.0), 1..100),
        c in 0.01f64..100.0,
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let r = accuracy(&x, &y).unwrap();
        prop_assert_eq!(r.oa, 1.0 - r.pmad);
        prop_assert_eq!(r.ua, 1.0 - r.pmad_prime);
        prop_assert!(r.pmad >= 0.0 && r.pmad_prime >= 0.0);
        let xs: Vec<f64> = x.iter().map(|v| v * c).collect();
        let ys: Vec<f64> = y.iter().map(|v| v * c).collect();
        let s = accuracy(&xs, &ys).unwrap();
        prop_assert!((s.pmad - r.pmad).abs() <= 1e-12 * r.pmad.max(1.0));
    }

    #[test]
    fn network_is_the_sum_of_victims_and_of_ports(flows in prop::collection::vec(flow_strategy(), 1..150), bucket in 60.0f64..7200.0) {
        let span = Span::covering(&flows, bucket).unwrap();
        let net = build_rate_series(&flows, Resolution::Network, span).unwrap();
        prop_assert_eq!(net.total() as usize, flows.len());
        let mut victims = vec![0u64; span.buckets];
        let mut ports = vec![0u64; span.buckets];
        let vs: std::collections::BTreeSet<_> = flows.iter().map(|f| f.victim_ip).collect();
        let ps: std::collections::BTreeSet<_> = flows.iter().map(|f| (f.victim_ip, f.victim_port)).collect();
        for v in vs {
            let s = build_rate_series(&flows, Resolution::Victim { victim_ip: v }, span).unwrap();
            victims.iter_mut().zip(&s.counts).for_each(|(a, b)| *a += b);
        }
        for (v, p) in ps {
            let s = build_rate_series(&flows, Resolution::Port { victim_ip: v, victim_port: p }, span).unwrap();
            ports.iter_mut().zip(&s.counts).for_each(|(a, b)| *a += b);
        }
        prop_assert_eq!(&net.counts, &victims);
        prop_assert_eq!(&net.counts, &ports);
    }

    #[test]
    fn attacker_level_never_exceeds_victim_level(flows in prop::collection::vec(flow_strategy(), 2..150)) {
        let span = Span::covering(&flows, 3600.0).unwrap();
        let v = flows[0].victim_ip;
        let victim = build_rate_series(&flows, Resolution::Victim { victim_ip: v }, span).unwrap();
        let attacker = build_rate_series(&flows, Resolution::Attacker { victim_ip: v }, span).unwrap();
        prop_assert!(attacker.counts.iter().zip(&victim.counts).all(|(a, b)| a <= b));
        let distinct: std::collections::BTreeSet<_> = flows.iter().filter(|f| f.victim_ip == v).map(|f| f.attacker_ip).collect();
        prop_assert_eq!(attacker.total() as usize, distinct.len());
    }

    #[test]
    fn gaps_are_positive_and_sum_to_the_span(flows in prop::collection::vec(flow_strategy(), 2..150)) {
        let s = inter_arrivals(&flows, Resolution::Network).unwrap();
        prop_assert_eq!(s.gaps.len(), flows.len() - 1);
        prop_assert!(s.gaps.iter().all(|&g| g > 0.0));
    }

    #[test]
    fn flow_log_round_trips(flows in prop::collection::vec(flow_strategy(), 0..50)) {
        let mut buf = Vec::new();
        write_flow_log(&flows, &mut buf).unwrap();
        let back = parse_flow_log(buf.as_slice()).unwrap();
        prop_assert!(back.diagnostics.is_empty());
        prop_assert_eq!(back.flows, flows);
    }

    #[test]
    fn fracdiff_round_trip(seed in 0u64..1000, d in prop::sample::select(vec![0.1, 0.3, 0.45])) {
        let x = series(GeneratorKind::WhiteNoise, 1024, seed);
        let back = fracdiff(&fracdiff(&x, d), -d);
        for (a, b) in x[512..].iter().zip(&back[512..]) {
            prop_assert!((a - b).abs() <= 1e-8);
        }
    }

    #[test]
    fn gpd_likelihood_scale_equivariance(
        y in prop::collection::vec(0.0f64..50.0, 5..100),
        xi in -0.4f64..1.5,
        beta in 0.1f64..10.0,
        c in 0.01f64..100.0,
    ) {
        let base = gpd_log_likelihood(&y, xi, beta);
        prop_assume!(base.is_finite());
        let scaled: Vec<f64> = y.iter().map(|v| v * c).collect();
        let moved = gpd_log_likelihood(&scaled, xi, beta * c);
        let expect = base - y.len() as f64 * c.ln();
        prop_assert!((moved - expect).abs() <= 1e-8 * expect.abs().max(1.0));
    }

    #[test]
    fn pure_ar_tower_property(
        phi in prop::collection::vec(-0.4f64..0.4, 1..4),
        history in prop::collection::vec(50.0f64..150.0, 10..40),
        h1 in 1usize..5,
        h2 in 1usize..5,
    ) {
        let m = FittedModel::Arma(ArmaModel {
            p: phi.len(), q: 0, phi, theta: vec![], mean: 100.0, sigma2: 1.0, aic: 0.0, converged: true,
        });
        let mut extended = history.clone();
        extended.extend(forecast_path(&m, &history, h1));
        let direct = forecast_h(&m, &history, h1 + h2);
        let anchored = forecast_h(&m, &extended, h2);
        prop_assert!((direct - anchored).abs() <= 1e-9 * direct.abs().max(1.0));
    }

    #[test]
    fn hurst_values_ignore_affine_rescaling(seed in 0u64..500, a in 0.01f64..100.0, b in -1000.0f64..1000.0) {
        let x = series(GeneratorKind::Fgn { hurst: 0.7 }, 1024, seed);
        let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let cfg = HurstConfig::default();
        for m in HurstMethod::ALL {
            let (hx, hy) = (estimate(m, &x, &cfg).unwrap().h_value, estimate(m, &y, &cfg).unwrap().h_value);
            prop_assert!((hx - hy).abs() <= 1e-6, "{} {} {}", m, hx, hy);
        }
    }

    #[test]
    fn both_byte_orders_parse_alike(
        frames in prop::collection::vec((0u32..5000, 0u32..1_000_000, 1u8..9, 1u16..2000, any::<bool>(), 0u8..64), 0..40),
    ) {
        let frames: Vec<Frame> = frames
            .into_iter()
            .map(|(s, us, a, port, is_tcp, flags)| {
                if is_tcp {
                    tcp(s, us, [1, 1, 1, a], [10, 0, 0, 1], 30000 + port, 445, flags)
                } else {
                    udp(s, us, [1, 1, 1, a], [10, 0, 0, 1], 30000 + port, 1434)
                }
            })
            .collect();
        let le = parse_pcap(&pcap(&frames, false)).unwrap();
        let be = parse_pcap(&pcap(&frames, true)).unwrap();
        prop_assert_eq!(&le, &be);
        prop_assert_eq!(le.packets.len(), frames.len());
        let out = assemble_flows(&le.packets, &AssemblyConfig::default()).unwrap();
        let packets: u64 = out.flows.iter().map(|f| f.packet_count).sum();
        prop_assert_eq!(packets as usize, frames.len());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn selection_returns_converged_feasible_models(seed in 0u64..10_000, phi in -0.7f64..0.7, farima in any::<bool>()) {
        let x = series(GeneratorKind::Ar1 { phi }, 300, seed);
        let cfg = ForecastConfig { max_p: 2, max_q: 2, fit: FitOptions { seed, ..Default::default() }, ..Default::default() };
        let family = if farima { Family::Farima } else { Family::Arma };
        let m = select_best_with(&x, family, &cfg).unwrap();
        prop_assert!(m.converged());
        prop_assert!(honeystat::forecast::is_causal(m.phi()));
        prop_assert!(honeystat::forecast::is_invertible(m.theta()));
        prop_assert!(m.d().abs() < 0.49);
        prop_assert!(m.p() <= 2 && m.q() <= 2);
    }
}
