//! Configure a run from `key = value` text, write its metric CSV and
//! manifest, and read the manifest back.
//!
//!     cargo run --example metrics_csv

use std::path::PathBuf;

use wbasn_sim::cli::run_sweep;
use wbasn_sim::io::{metrics_csv, parse_config_str, read_manifest, RunSpec, SeedRange};
use wbasn_sim::model::{Protocol, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = "\
# a shorter, hotter run
rounds = 400
temp_delta_per_packet = 0.2
p_critical = 0.1
";
    let config = parse_config_str(ScenarioConfig::paper_simulation(1), text)?;
    let result = wbasn_sim::run_scenario(config.clone())?;
    let csv = metrics_csv(&result.metrics);
    for line in csv.lines().take(4) {
        println!("{line}");
    }
    println!("... {} rows", csv.lines().count() - 1);

    let out: PathBuf = std::env::temp_dir().join(format!("wbasn-sim-example-{}", std::process::id()));
    let spec = RunSpec {
        config,
        seeds: SeedRange { start: 1, end: 3 },
        protocols: vec![Protocol::Attempt, Protocol::MAttempt],
    };
    let sweep = run_sweep(&spec, &out)?;
    println!("\nwrote {} metric files to {}", sweep.metrics_files.len(), out.display());
    println!("{}", std::fs::read_to_string(&sweep.summary_file)?);

    let again = read_manifest(&sweep.manifest_file)?;
    println!("manifest reproduces the spec: {}", again == spec);
    std::fs::remove_dir_all(&out)?;
    Ok(())
}
