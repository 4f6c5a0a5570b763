//! Stability period and throughput of the three protocols over a batch of
//! seeds on the paper-simulation preset.
//!
//!     cargo run --release --example compare_protocols -- 10

use rayon::prelude::*;

use wbasn_sim::engine::{median_first_death, run_scenario, ScenarioSummary};
use wbasn_sim::model::{Protocol, ScenarioConfig};

fn main() {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    println!(
        "{:<9} {:>12} {:>12} {:>10} {:>9} {:>8}",
        "protocol", "first death", "delivered", "lost", "peak T", "floods"
    );
    for protocol in Protocol::ALL {
        let runs: Vec<ScenarioSummary> = (1..=seeds)
            .into_par_iter()
            .map(|seed| {
                let mut c = ScenarioConfig::paper_simulation(seed);
                c.protocol = protocol;
                run_scenario(c).expect("preset is valid").summary
            })
            .collect();
        let n = runs.len() as f64;
        let mean = |f: &dyn Fn(&ScenarioSummary) -> f64| runs.iter().map(f).sum::<f64>() / n;
        println!(
            "{:<9} {:>12} {:>12.1} {:>10.1} {:>9.3} {:>8.1}",
            protocol.key(),
            median_first_death(&runs).map_or("-".into(), |m| m.to_string()),
            mean(&|s| s.totals.delivered() as f64),
            mean(&|s| s.totals.lost as f64),
            runs.iter().map(|s| s.peak_temperature).fold(0.0, f64::max),
            mean(&|s| f64::from(s.hello_floods)),
        );
        let mut reasons = std::collections::BTreeMap::new();
        for r in &runs {
            for (k, v) in &r.lost_by_reason {
                *reasons.entry(k.key()).or_insert(0u64) += v;
            }
        }
        if !reasons.is_empty() {
            println!("          losses {reasons:?}");
        }
    }
}
