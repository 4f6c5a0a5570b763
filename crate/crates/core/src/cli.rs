//! Command-line front end: resolve the run spec, run every (protocol, seed)
//! pair in parallel and write the CSVs plus the manifest.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use rayon::prelude::*;

use crate::engine::{median_first_death, run_scenario, ScenarioSummary};
use crate::error::{ConfigError, Error};
use crate::io::{self, ConfigSources, RunSpec, SeedRange};
use crate::model::Protocol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProtocolArg {
    Multihop,
    Attempt,
    Mattempt,
    All,
}

impl ProtocolArg {
    fn protocols(self) -> Vec<Protocol> {
        match self {
            ProtocolArg::Multihop => vec![Protocol::MultiHop],
            ProtocolArg::Attempt => vec![Protocol::Attempt],
            ProtocolArg::Mattempt => vec![Protocol::MAttempt],
            ProtocolArg::All => Protocol::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "wbasn-sim", version, about = "Round-based WBASN routing simulator")]
pub struct Args {
    /// Protocol to run.
    #[arg(long, value_enum)]
    pub protocol: Option<ProtocolArg>,
    /// Scenario preset (paper-simulation or prototype).
    #[arg(long)]
    pub preset: Option<String>,
    /// `key = value` config file; a manifest from an earlier run works too.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, conflicts_with = "seeds")]
    pub seed: Option<u64>,
    /// Inclusive seed range, e.g. 1..10.
    #[arg(long)]
    pub seeds: Option<SeedRange>,
    #[arg(long)]
    pub rounds: Option<u32>,
    /// Output directory.
    #[arg(long, env = "WBASN_SIM_OUT", default_value = "wbasn-out")]
    pub out: PathBuf,
    /// Override any config key, e.g. `--set p_critical=0.1`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_set)]
    pub set: Vec<(String, String)>,
    /// Do not print the per-protocol summary.
    #[arg(long, short)]
    pub quiet: bool,
}

fn parse_set(s: &str) -> Result<(String, String), ConfigError> {
    io::parse_override(s)
}

impl Args {
    /// Preset, then file, then `--set`, then the dedicated flags.
    pub fn run_spec(&self) -> Result<RunSpec, ConfigError> {
        let mut overrides = self.set.clone();
        if let Some(r) = self.rounds {
            overrides.push(("rounds".into(), r.to_string()));
        }
        if let Some(s) = self.seed {
            overrides.push(("seed".into(), s.to_string()));
            overrides.push(("seeds".into(), s.to_string()));
        }
        if let Some(s) = self.seeds {
            overrides.push(("seeds".into(), s.to_string()));
        }
        let mut spec = io::resolve(&ConfigSources {
            preset: self.preset.as_deref(),
            file: self.config.as_deref(),
            overrides: &overrides,
        })?;
        if let Some(p) = self.protocol {
            spec.protocols = p.protocols();
            spec.config.protocol = spec.protocols[0];
        }
        spec.config.seed = spec.seeds.start;
        Ok(spec)
    }
}

/// What a finished sweep wrote.
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub runs: Vec<(Protocol, u64, ScenarioSummary)>,
    pub metrics_files: Vec<PathBuf>,
    pub summary_file: PathBuf,
    pub manifest_file: PathBuf,
}

/// Run every (protocol, seed) of `spec` and write the results into `out`.
pub fn run_sweep(spec: &RunSpec, out: &Path) -> Result<SweepOutput, Error> {
    fs::create_dir_all(out).map_err(|source| Error::Io {
        path: out.to_path_buf(),
        source,
    })?;
    let results: Vec<Result<(Protocol, u64, ScenarioSummary, PathBuf), Error>> = spec
        .runs()
        .into_par_iter()
        .map(|config| {
            let (protocol, seed) = (config.protocol, config.seed);
            let result = run_scenario(config)?;
            let path = out.join(io::metrics_file_name(protocol, seed));
            io::write_metrics_csv(&result.metrics, &path)?;
            Ok((protocol, seed, result.summary, path))
        })
        .collect();
    let mut runs = Vec::with_capacity(results.len());
    let mut metrics_files = Vec::with_capacity(results.len());
    for r in results {
        let (p, seed, summary, path) = r?;
        runs.push((p, seed, summary));
        metrics_files.push(path);
    }
    let summary_file = out.join("summary.csv");
    io::write_atomic(&summary_file, io::summary_csv(&runs).as_bytes())?;

    let manifest_file = out.join("manifest.txt");
    let mut listed = metrics_files.clone();
    listed.push(summary_file.clone());
    let names: Vec<PathBuf> = listed
        .iter()
        .map(|p| p.file_name().map(PathBuf::from).unwrap_or_default())
        .collect();
    io::write_atomic(&manifest_file, io::manifest_text(spec, &names).as_bytes())?;
    Ok(SweepOutput {
        runs,
        metrics_files,
        summary_file,
        manifest_file,
    })
}

fn report(out: &SweepOutput) {
    for p in Protocol::ALL {
        let group: Vec<ScenarioSummary> = out.runs.iter().filter(|r| r.0 == p).map(|r| r.2.clone()).collect();
        if group.is_empty() {
            continue;
        }
        let fd = median_first_death(&group).filter(|v| v.is_finite());
        let delivered: u64 = group.iter().map(|g| g.totals.delivered()).sum();
        println!(
            "{:<9} runs {:>3}  median first death {:>8}  mean delivered {:.1}",
            p.key(),
            group.len(),
            fd.map_or("none".into(), |v| v.to_string()),
            delivered as f64 / group.len() as f64
        );
    }
    println!("wrote {} run files, {}", out.metrics_files.len(), out.manifest_file.display());
}

/// Parse `args` (including the program name) and run. Exit status 0 on
/// success, 2 for bad flags or config, 1 for I/O failures.
pub fn run_cli<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    let spec = match args.run_spec() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("wbasn-sim: {e}");
            return ExitCode::from(2);
        }
    };
    match run_sweep(&spec, &args.out) {
        Ok(out) => {
            if !args.quiet {
                report(&out);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("wbasn-sim: {e}");
            ExitCode::from(match e {
                Error::Config(_) | Error::Usage(_) => 2,
                Error::Io { .. } => 1,
            })
        }
    }
}
