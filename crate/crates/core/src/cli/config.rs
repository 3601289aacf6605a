//! The JSON analysis configuration shared by every subcommand.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CliError;
use crate::forecast::{Family, ForecastConfig};
use crate::gof::GofConfig;
use crate::ingest::{AssemblyConfig, FlowRecord};
use crate::lrd::{HurstConfig, SpuriousConfig};
use crate::process::Resolution;
use crate::tails::TailConfig;

/// Which attack processes to analyse. The plural forms expand to every
/// instance present in the flows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ResolutionSelector {
    Network,
    AllVictims,
    AllPorts,
    AllAttackers,
    Exact(Resolution),
}

impl FromStr for ResolutionSelector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "network" => ResolutionSelector::Network,
            "victims" => ResolutionSelector::AllVictims,
            "ports" => ResolutionSelector::AllPorts,
            "attackers" => ResolutionSelector::AllAttackers,
            other => ResolutionSelector::Exact(other.parse()?),
        })
    }
}

impl TryFrom<String> for ResolutionSelector {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<ResolutionSelector> for String {
    fn from(s: ResolutionSelector) -> String {
        s.to_string()
    }
}

impl fmt::Display for ResolutionSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResolutionSelector::Network => f.write_str("network"),
            ResolutionSelector::AllVictims => f.write_str("victims"),
            ResolutionSelector::AllPorts => f.write_str("ports"),
            ResolutionSelector::AllAttackers => f.write_str("attackers"),
            ResolutionSelector::Exact(r) => write!(f, "{r}"),
        }
    }
}

/// Expand selectors against a flow set; the result is sorted and free of
/// duplicates.
pub fn expand_selectors(selectors: &[ResolutionSelector], flows: &[FlowRecord]) -> Vec<Resolution> {
    let mut out = BTreeSet::new();
    for s in selectors {
        match s {
            ResolutionSelector::Network => {
                out.insert(Resolution::Network);
            }
            ResolutionSelector::AllVictims => {
                out.extend(flows.iter().map(|f| Resolution::Victim { victim_ip: f.victim_ip }));
            }
            ResolutionSelector::AllPorts => {
                out.extend(flows.iter().map(|f| Resolution::Port { victim_ip: f.victim_ip, victim_port: f.victim_port }));
            }
            ResolutionSelector::AllAttackers => {
                out.extend(flows.iter().map(|f| Resolution::Attacker { victim_ip: f.victim_ip }));
            }
            ResolutionSelector::Exact(r) => {
                out.insert(*r);
            }
        }
    }
    out.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyChoice {
    /// FARIMA when the series is identified as LRD, ARMA otherwise.
    Auto,
    Arma,
    Farima,
}

impl FamilyChoice {
    pub fn resolve(self, lrd: bool) -> Family {
        match self {
            FamilyChoice::Arma => Family::Arma,
            FamilyChoice::Farima => Family::Farima,
            FamilyChoice::Auto if lrd => Family::Farima,
            FamilyChoice::Auto => Family::Arma,
        }
    }
}

impl FromStr for FamilyChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(FamilyChoice::Auto),
            "arma" => Ok(FamilyChoice::Arma),
            "farima" | "arfima" => Ok(FamilyChoice::Farima),
            _ => Err(format!("unknown family {s:?} (expected auto, arma or farima)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForecastSection {
    pub enabled: bool,
    pub family: FamilyChoice,
    pub rolling: ForecastConfig,
}

impl Default for ForecastSection {
    fn default() -> Self {
        ForecastSection {
            enabled: true,
            family: FamilyChoice::Auto,
            // Score the last 100 buckets only; a full rolling run over a long
            // series refits every candidate at hundreds of origins.
            rolling: ForecastConfig { window: Some(100), ..Default::default() },
        }
    }
}

/// Where `report` writes plot-ready CSV files. Not part of the config hash.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub plot_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub assembly: AssemblyConfig,
    /// Bucket width in seconds.
    pub bucket: f64,
    pub resolutions: Vec<ResolutionSelector>,
    pub hurst: HurstConfig,
    pub spurious: SpuriousConfig,
    pub gof: GofConfig,
    pub tails: TailConfig,
    pub forecast: ForecastSection,
    /// Seeds every randomized step; overrides the component seeds.
    pub seed: u64,
    pub outputs: OutputConfig,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            assembly: AssemblyConfig::default(),
            bucket: 3600.0,
            resolutions: vec![ResolutionSelector::Network],
            hurst: HurstConfig::default(),
            spurious: SpuriousConfig::default(),
            gof: GofConfig::default(),
            tails: TailConfig::default(),
            forecast: ForecastSection::default(),
            seed: 0,
            outputs: OutputConfig::default(),
        }
    }
}

impl AnalysisConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: AnalysisConfig =
            serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(format!("invalid config: {m}")));
        self.assembly.validate().map_err(|e| CliError::Usage(format!("invalid config: {e}")))?;
        if !(self.bucket > 0.0 && self.bucket.is_finite()) {
            return usage(format!("bucket must be positive, got {}", self.bucket));
        }
        let (lo, hi) = self.hurst.lrd_band;
        if !(lo <= hi) {
            return usage(format!("hurst.lrd_band ({lo}, {hi}) is reversed"));
        }
        if !(self.tails.threshold_quantile > 0.0 && self.tails.threshold_quantile < 1.0) {
            return usage(format!("tails.threshold_quantile {} outside (0, 1)", self.tails.threshold_quantile));
        }
        self.forecast.rolling.validate().map_err(|e| CliError::Usage(format!("invalid config: {e}")))?;
        Ok(())
    }

    /// Copy the top-level seed into the component configurations.
    pub fn apply_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.tails.seed = seed;
        self.forecast.rolling.fit.seed = seed;
    }

    /// SHA-256 over the canonical JSON (sorted keys) of every field except
    /// `outputs`.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let serde_json::Value::Object(map) = &mut value {
            map.remove("outputs");
        }
        let bytes = serde_json::to_vec(&value).expect("value serializes");
        format!("{:x}", Sha256::digest(&bytes))
    }
}
