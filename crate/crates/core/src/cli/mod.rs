//! The `honeystat` command: one subcommand per pipeline step plus `report`
//! (everything at once) and `simulate` (synthetic input).
//!
//! Exit codes: 0 on success, 1 on usage or configuration errors, 2 when the
//! input data cannot be analysed.

mod config;
mod report;

use std::ffi::OsString;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{expand_selectors, AnalysisConfig, FamilyChoice, ForecastSection, OutputConfig, ResolutionSelector};
pub use report::{
    analyze_series, build_report, ForecastSummary, Outcome, Report, SeriesAnalysis, SeriesReport, SeriesTiming,
    TailResult, ToolInfo, UnavailableSeries, SCHEMA_VERSION,
};

use crate::forecast::rolling_evaluate;
use crate::gof::{poisson_test_with, qq_exponential};
use crate::ingest::{assemble_flows, parse_flow_log, parse_pcap, sort_flows, write_flow_log, FlowRecord};
use crate::lrd::{hurst_all_with, HurstReport, Verdict};
use crate::process::{build_rate_series, inter_arrivals, RateSeries, Resolution, Span};
use crate::synth::{flows_from_arrivals, flows_from_series, generate, FlowSynthesis, GeneratorSpec};
use crate::tails::{classify_tail, fit_gpd};

/// Environment variable holding the default config path.
pub const CONFIG_ENV: &str = "HONEYSTAT_CONFIG";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

fn data(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Ndjson,
}

#[derive(Debug, Parser)]
#[command(name = "honeystat", version, about = "Statistical analysis of honeypot-captured attack processes")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON analysis configuration.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the main output here instead of stdout.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Assemble flows from a pcap capture or re-emit an NDJSON flow log.
    Flows {
        /// Input file, `-` for stdin.
        input: PathBuf,
    },
    /// Attack-rate series per resolution.
    Rates {
        /// NDJSON flows or pcap.
        input: PathBuf,
        /// Resolution selectors; defaults to the configured list.
        #[arg(short, long = "resolution")]
        resolutions: Vec<ResolutionSelector>,
    },
    /// Six Hurst estimators, LRD verdict and spurious-LRD screen.
    Hurst(SeriesInput),
    /// Exponential goodness of fit of inter-arrival gaps.
    Poisson {
        /// NDJSON flows, pcap, or a CSV of gaps.
        input: PathBuf,
        /// Resolution whose arrivals are tested when the input is flows.
        #[arg(short, long, default_value = "network")]
        resolution: Resolution,
        /// Also write the QQ plot data here.
        #[arg(long)]
        qq: Option<PathBuf>,
    },
    /// Peaks-over-threshold GPD fit and tail regime.
    Tails(SeriesInput),
    /// Rolling-origin gray-box prediction.
    Predict {
        #[command(flatten)]
        series: SeriesInput,
        #[arg(long)]
        family: Option<FamilyChoice>,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        start_fraction: Option<f64>,
        /// Score only the last K points; 0 scores every step.
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        max_p: Option<usize>,
        #[arg(long)]
        max_q: Option<usize>,
        /// Also write the per-step table here.
        #[arg(long)]
        steps: Option<PathBuf>,
    },
    /// Every analysis for every configured resolution.
    Report {
        /// NDJSON flows or pcap.
        input: PathBuf,
        /// Add wall-clock timings (makes output differ between runs).
        #[arg(long)]
        timing: bool,
    },
    /// Synthetic series (CSV) or flows (NDJSON).
    Simulate {
        /// Simulation spec file; see `SimulationSpec`.
        spec: Option<PathBuf>,
        /// Inline generator, e.g. '{"kind":"fgn","hurst":0.8,"n":1024,"seed":1}'.
        #[arg(long)]
        generator: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct SeriesInput {
    /// Rate CSV (as written by `rates`), a one-column CSV, or rate JSON.
    pub input: PathBuf,
    /// Series id to pick when the input holds several.
    #[arg(long)]
    pub series: Option<String>,
}

/// Input of `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    pub generator: GeneratorSpec,
    #[serde(default)]
    pub flows: FlowSynthesis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailsOutput {
    pub series: String,
    pub fit: crate::tails::GpdFit,
    pub classification: crate::tails::TailClassification,
}

/// Parse arguments and run; returns the process exit code. Errors are
/// printed to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("honeystat: {e}");
            e.exit_code()
        }
    }
}

/// Run a parsed command.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.global.config {
        Some(p) => AnalysisConfig::load(p)?,
        None => AnalysisConfig::default(),
    };
    let seed = cli.global.seed.unwrap_or(cfg.seed);
    cfg.apply_seed(seed);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.global.jobs {
        if j == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| CliError::Usage(e.to_string()))?;
    pool.install(|| dispatch(cli, cfg))
}

fn dispatch(cli: &Cli, mut cfg: AnalysisConfig) -> Result<(), CliError> {
    let g = &cli.global;
    let out = Output::new(g.output.as_deref());
    match &cli.command {
        Command::Flows { input } => {
            let flows = load_flows(input, &cfg)?;
            match g.format.unwrap_or(Format::Ndjson) {
                Format::Ndjson => {
                    let mut buf = Vec::new();
                    write_flow_log(&flows, &mut buf).map_err(data)?;
                    out.write(&buf)
                }
                Format::Json => out.json(&flows),
                Format::Csv => Err(unsupported("flows", Format::Csv)),
            }
        }
        Command::Rates { input, resolutions } => {
            let flows = load_flows(input, &cfg)?;
            let selectors = if resolutions.is_empty() { &cfg.resolutions } else { resolutions };
            let span = Span::covering(&flows, cfg.bucket).map_err(data)?;
            let series: Vec<RateSeries> = expand_selectors(selectors, &flows)
                .into_iter()
                .map(|r| build_rate_series(&flows, r, span).map_err(data))
                .collect::<Result<_, _>>()?;
            match g.format.unwrap_or(Format::Csv) {
                Format::Csv => out.write(rates_csv(&series).as_bytes()),
                Format::Json => out.json(&series),
                Format::Ndjson => Err(unsupported("rates", Format::Ndjson)),
            }
        }
        Command::Hurst(input) => {
            let (_, x) = read_series(input)?;
            let report = hurst_all_with(&x, &cfg.hurst, &cfg.spurious);
            match g.format.unwrap_or(Format::Json) {
                Format::Json => out.json(&report),
                Format::Csv => out.write(regression_csv(&report).as_bytes()),
                Format::Ndjson => Err(unsupported("hurst", Format::Ndjson)),
            }
        }
        Command::Poisson { input, resolution, qq } => {
            let gaps = read_gaps(input, *resolution, &cfg)?;
            if cfg.gof.ks_is_degenerate(gaps.len()) {
                log::warn!(
                    "KS critical value {} with only {} gaps rejects almost surely; set gof.ks_critical to a table value",
                    cfg.gof.ks_critical,
                    gaps.len()
                );
            }
            let report = poisson_test_with(&gaps, &cfg.gof).map_err(data)?;
            let qq_csv = qq_exponential(&gaps, &report.fit).to_csv();
            if let Some(p) = qq {
                write_file(p, qq_csv.as_bytes())?;
            }
            match g.format.unwrap_or(Format::Json) {
                Format::Json => out.json(&report),
                Format::Csv => out.write(qq_csv.as_bytes()),
                Format::Ndjson => Err(unsupported("poisson", Format::Ndjson)),
            }
        }
        Command::Tails(input) => {
            if let Some(f @ (Format::Csv | Format::Ndjson)) = g.format {
                return Err(unsupported("tails", f));
            }
            let (id, x) = read_series(input)?;
            let fit = fit_gpd(&x, &cfg.tails).map_err(|e| CliError::Data(format!("{id}: {e}")))?;
            let classification = classify_tail(&fit, cfg.tails.z);
            match g.format.unwrap_or(Format::Json) {
                _ => out.json(&TailsOutput { series: id, fit, classification }),
            }
        }
        Command::Predict { series, family, horizon, start_fraction, window, max_p, max_q, steps } => {
            let (id, x) = read_series(series)?;
            let rolling = &mut cfg.forecast.rolling;
            if let Some(h) = horizon {
                rolling.h = *h;
            }
            if let Some(p) = start_fraction {
                rolling.start_fraction = *p;
            }
            if let Some(k) = window {
                rolling.window = (*k > 0).then_some(*k);
            }
            if let Some(p) = max_p {
                rolling.max_p = *p;
            }
            if let Some(q) = max_q {
                rolling.max_q = *q;
            }
            rolling.validate().map_err(|e| CliError::Usage(e.to_string()))?;
            let choice = family.unwrap_or(cfg.forecast.family);
            let lrd = choice == FamilyChoice::Auto
                && hurst_all_with(&x, &cfg.hurst, &cfg.spurious).verdict == Verdict::Lrd;
            let run = rolling_evaluate(&x, choice.resolve(lrd), &cfg.forecast.rolling)
                .map_err(|e| CliError::Data(format!("{id}: {e}")))?;
            if let Some(p) = steps {
                write_file(p, run.to_csv().as_bytes())?;
            }
            match g.format.unwrap_or(Format::Json) {
                Format::Json => out.json(&run),
                Format::Csv => out.write(run.to_csv().as_bytes()),
                Format::Ndjson => Err(unsupported("predict", Format::Ndjson)),
            }
        }
        Command::Report { input, timing } => {
            if !matches!(g.format, None | Some(Format::Json)) {
                return Err(unsupported("report", g.format.expect("checked")));
            }
            let flows = load_flows(input, &cfg)?;
            let (report, analyses) = build_report(&flows, &cfg, *timing).map_err(data)?;
            if let Some(dir) = &cfg.outputs.plot_dir {
                write_plot_data(dir, &analyses)?;
            }
            out.json(&report)
        }
        Command::Simulate { spec, generator } => {
            let mut sim = match (spec, generator) {
                (Some(p), None) => serde_json::from_slice::<SimulationSpec>(&read_input(p)?)
                    .map_err(|e| CliError::Usage(format!("invalid simulation spec: {e}")))?,
                (None, Some(json)) => SimulationSpec {
                    generator: serde_json::from_str(json)
                        .map_err(|e| CliError::Usage(format!("invalid generator: {e}")))?,
                    flows: FlowSynthesis::default(),
                },
                _ => return Err(CliError::Usage("give exactly one of SPEC or --generator".into())),
            };
            if let Some(s) = g.seed {
                sim.generator.seed = s;
            }
            let values = generate(&sim.generator).map_err(|e| CliError::Usage(e.to_string()))?;
            let arrivals = sim.generator.kind.yields_arrivals();
            match g.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut s = String::from(if arrivals { "index,time\n" } else { "index,value\n" });
                    for (i, v) in values.iter().enumerate() {
                        s.push_str(&format!("{i},{v}\n"));
                    }
                    out.write(s.as_bytes())
                }
                Format::Ndjson => {
                    let flows = if arrivals {
                        flows_from_arrivals(&values, &sim.flows, sim.generator.seed)
                    } else {
                        flows_from_series(&values, &sim.flows, sim.generator.seed)
                    }
                    .map_err(|e| CliError::Usage(e.to_string()))?;
                    let mut buf = Vec::new();
                    write_flow_log(&flows, &mut buf).map_err(data)?;
                    out.write(&buf)
                }
                Format::Json => out.json(&values),
            }
        }
    }
}

fn unsupported(cmd: &str, f: Format) -> CliError {
    CliError::Usage(format!("{cmd} does not support --format {}", f.to_possible_value().expect("named").get_name()))
}

struct Output<'a> {
    path: Option<&'a Path>,
}

impl<'a> Output<'a> {
    fn new(path: Option<&'a Path>) -> Self {
        Output { path }
    }

    fn write(&self, bytes: &[u8]) -> Result<(), CliError> {
        match self.path {
            Some(p) => write_file(p, bytes),
            None => {
                let mut stdout = std::io::stdout().lock();
                match stdout.write_all(bytes).and_then(|_| stdout.flush()) {
                    // A closed reader (`| head`) is not an error.
                    Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                    r => r.map_err(data),
                }
            }
        }
    }

    fn json<T: Serialize>(&self, value: &T) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(data)?;
        bytes.push(b'\n');
        self.write(&bytes)
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    if path.as_os_str() == "-" {
        std::io::stdin().read_to_end(&mut buf).map_err(data)?;
    } else {
        buf = std::fs::read(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    }
    Ok(buf)
}

fn is_pcap(bytes: &[u8]) -> bool {
    matches!(bytes.get(..4), Some([0xd4, 0xc3, 0xb2, 0xa1]) | Some([0xa1, 0xb2, 0xc3, 0xd4]))
}

/// Flows from a pcap (assembled with the configured rules) or an NDJSON
/// flow log (filtered to the production ports), in canonical order.
pub fn load_flows(path: &Path, cfg: &AnalysisConfig) -> Result<Vec<FlowRecord>, CliError> {
    let bytes = read_input(path)?;
    let label = path.display();
    let mut flows = if is_pcap(&bytes) {
        let capture = parse_pcap(&bytes).map_err(|e| CliError::Data(format!("{label}: {e}")))?;
        if capture.skipped_frames > 0 {
            log::info!("{label}: skipped {} frames", capture.skipped_frames);
        }
        assemble_flows(&capture.packets, &cfg.assembly).map_err(|e| CliError::Usage(e.to_string()))?.flows
    } else {
        let log = parse_flow_log(BufReader::new(bytes.as_slice())).map_err(|e| CliError::Data(format!("{label}: {e}")))?;
        for d in &log.diagnostics {
            log::warn!("{label}:{}: {}", d.line, d.message);
        }
        let ports = &cfg.assembly.production_ports;
        log.flows.into_iter().filter(|f| ports.is_empty() || ports.contains(&f.victim_port)).collect()
    };
    sort_flows(&mut flows);
    Ok(flows)
}

/// All series in one long table when there are several.
fn rates_csv(series: &[RateSeries]) -> String {
    if let [one] = series {
        return one.to_csv();
    }
    let mut out = String::from("series,bucket_index,timestamp,count\n");
    for s in series {
        for (k, c) in s.counts.iter().enumerate() {
            out.push_str(&format!("{},{k},{},{c}\n", s.resolution, s.bucket_start(k)));
        }
    }
    out
}

fn regression_csv(report: &HurstReport) -> String {
    let mut out = String::from("method,log_x,log_y\n");
    for m in &report.methods {
        if let Some(e) = &m.estimate {
            for (x, y) in &e.regression_points {
                out.push_str(&format!("{},{x},{y}\n", m.method));
            }
        }
    }
    out
}

/// Read one numeric series. CSV input uses the `count` column, else
/// `value`, else the only column; a `series` column selects among several
/// series. JSON input is one rate series or an array of them.
pub fn read_series(input: &SeriesInput) -> Result<(String, Vec<f64>), CliError> {
    let bytes = read_input(&input.input)?;
    let label = input.input.display().to_string();
    let first = bytes.iter().copied().find(|b| !b.is_ascii_whitespace());
    if matches!(first, Some(b'{') | Some(b'[')) {
        let list: Vec<RateSeries> = match serde_json::from_slice::<RateSeries>(&bytes) {
            Ok(one) => vec![one],
            Err(_) => serde_json::from_slice(&bytes).map_err(|e| CliError::Data(format!("{label}: {e}")))?,
        };
        let picked = match &input.series {
            Some(id) => list.into_iter().find(|s| &s.resolution.to_string() == id),
            None if list.len() == 1 => list.into_iter().next(),
            None => return Err(CliError::Usage(format!("{label} holds {} series; pick one with --series", list.len()))),
        };
        let s = picked.ok_or_else(|| CliError::Data(format!("{label}: no series {:?}", input.series)))?;
        return Ok((s.resolution.to_string(), s.values()));
    }
    let mut reader = csv::Reader::from_reader(bytes.as_slice());
    let headers = reader.headers().map_err(|e| CliError::Data(format!("{label}: {e}")))?.clone();
    let col = headers
        .iter()
        .position(|h| h == "count")
        .or_else(|| headers.iter().position(|h| h == "value"))
        .or_else(|| (headers.len() == 1).then_some(0))
        .ok_or_else(|| CliError::Data(format!("{label}: no count or value column")))?;
    let id_col = headers.iter().position(|h| h == "series");
    let mut ids = std::collections::BTreeSet::new();
    let mut x = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Data(format!("{label}: {e}")))?;
        let id = id_col.map(|c| rec[c].to_string());
        if let (Some(want), Some(id)) = (&input.series, &id) {
            if want != id {
                continue;
            }
        }
        if let Some(id) = id {
            ids.insert(id);
        }
        let v: f64 = rec[col]
            .trim()
            .parse()
            .map_err(|e| CliError::Data(format!("{label}: row {}: {e}", i + 2)))?;
        x.push(v);
    }
    if ids.len() > 1 {
        return Err(CliError::Usage(format!("{label} holds {} series; pick one with --series", ids.len())));
    }
    if x.is_empty() {
        return Err(CliError::Data(format!("{label}: no data rows")));
    }
    let id = ids.into_iter().next().or_else(|| input.series.clone()).unwrap_or(label);
    Ok((id, x))
}

fn read_gaps(path: &Path, resolution: Resolution, cfg: &AnalysisConfig) -> Result<Vec<f64>, CliError> {
    let bytes = read_input(path)?;
    let first = bytes.iter().copied().find(|b| !b.is_ascii_whitespace());
    if is_pcap(&bytes) || first == Some(b'{') {
        let flows = load_flows(path, cfg)?;
        return Ok(inter_arrivals(&flows, resolution).map_err(data)?.gaps);
    }
    let input = SeriesInput { input: path.to_path_buf(), series: None };
    let mut reader = csv::Reader::from_reader(bytes.as_slice());
    let headers = reader.headers().map_err(data)?.clone();
    if headers.iter().any(|h| h == "gap") {
        let col = headers.iter().position(|h| h == "gap").expect("found");
        return reader
            .records()
            .map(|r| r.map_err(data).and_then(|r| r[col].trim().parse::<f64>().map_err(data)))
            .collect();
    }
    Ok(read_series(&input)?.1)
}

fn file_stem(r: &Resolution) -> String {
    r.to_string().replace([':', '.'], "_")
}

fn write_plot_data(dir: &Path, analyses: &[SeriesAnalysis]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("cannot create {}: {e}", dir.display())))?;
    for a in analyses {
        let stem = file_stem(&a.report.resolution);
        write_file(&dir.join(format!("{stem}_rates.csv")), a.rates.to_csv().as_bytes())?;
        if let Some(h) = a.report.hurst.ok() {
            write_file(&dir.join(format!("{stem}_hurst.csv")), regression_csv(h).as_bytes())?;
        }
        if let Some(run) = &a.run {
            write_file(&dir.join(format!("{stem}_forecast.csv")), run.to_csv().as_bytes())?;
        }
    }
    Ok(())
}
