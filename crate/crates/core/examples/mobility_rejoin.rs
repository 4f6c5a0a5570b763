//! Limb motion breaking parent links, and M-ATTEMPT's join requests
//! repairing them without a network-wide hello flood.
//!
//!     cargo run --example mobility_rejoin

use wbasn_sim::engine::Simulation;
use wbasn_sim::model::{Protocol, ScenarioConfig};
use wbasn_sim::network::Event;

fn main() {
    let mut config = ScenarioConfig::paper_simulation(7);
    config.protocol = Protocol::MAttempt;
    config.rounds = 200;
    let mut sim = Simulation::new(config).expect("valid preset");

    let mut rejected = std::collections::BTreeMap::new();
    while !sim.is_finished() {
        sim.step();
        for e in sim.events() {
            let line = match e {
                Event::HelloFlood => "hello flood".to_string(),
                Event::LinkBroken { child, parent } => format!("{child} lost its link to {parent}"),
                Event::Joined { child, parent } => format!("{child} joined {parent}"),
                Event::JoinRejected { child } => {
                    // no parent in range: the node keeps sending at full power
                    *rejected.entry(child.to_string()).or_insert(0) += 1;
                    continue;
                }
                _ => continue,
            };
            println!("round {:>3}: {line}", sim.round());
        }
    }
    println!("rejected join requests per node: {rejected:?}");

    let net = sim.network();
    println!("\ntree after round {}:", sim.round());
    for n in net.sensors() {
        let parent = n.parent.map_or("none".to_string(), |p| p.to_string());
        println!("  {} {:<12} parent {parent:<5} children {}", n.id, n.class.name(), n.children.len());
    }

    let mut baseline = ScenarioConfig::paper_simulation(7);
    baseline.protocol = Protocol::Attempt;
    baseline.rounds = 200;
    let b = wbasn_sim::run_scenario(baseline).unwrap();
    println!(
        "\nM-ATTEMPT floods {} time(s) and joins {} time(s) in 200 rounds; ATTEMPT re-floods {} times",
        sim.summary().hello_floods,
        sim.summary().joins,
        b.summary.hello_floods
    );
}
