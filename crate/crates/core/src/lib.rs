//! Statistical analysis of honeypot-captured cyber attacks.
//!
//! The crate follows a five-step pipeline:
//!
//! 1. [`ingest`]: parse pcap captures or NDJSON flow logs and assemble flows;
//! 2. [`process`] and [`stats`]: build attack processes at network, victim,
//!    port and attacker resolution and summarise their rates and gaps;
//! 3. [`lrd`] and [`gof`]: test the Poisson hypothesis and identify
//!    long-range dependence, screening out spurious LRD;
//! 4. [`forecast`]: gray-box prediction of attack rates with LRD-aware
//!    (FARIMA) or LRD-less (ARMA) model families;
//! 5. [`tails`]: peaks-over-threshold heavy-tail analysis used to explore
//!    what causes the identified properties.
//!
//! [`synth`] provides seeded generators with known ground truth and
//! [`cli`] ties everything into the `honeystat` command.

pub mod cli;
pub mod forecast;
pub mod gof;
pub mod ingest;
pub mod lrd;
pub mod numeric;
pub mod process;
pub mod stats;
pub mod synth;
pub mod tails;
