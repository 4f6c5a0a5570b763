//! Drive a simulation one round at a time and inspect the event log.
//!
//!     cargo run --example step_by_step -- attempt 3

use wbasn_sim::engine::Simulation;
use wbasn_sim::model::{Protocol, ScenarioConfig};
use wbasn_sim::network::Event;

fn main() {
    let mut args = std::env::args().skip(1);
    let protocol: Protocol = args.next().map_or(Ok(Protocol::MAttempt), |s| s.parse()).expect("protocol");
    let rounds: u32 = args.next().and_then(|s| s.parse().ok()).unwrap_or(2);

    let mut config = ScenarioConfig::paper_simulation(1);
    config.protocol = protocol;
    let mut sim = Simulation::new(config).unwrap();
    for n in sim.network().sensors() {
        println!(
            "{} {:<12} at ({:.2}, {:.2}) {:.2} m from the sink",
            n.id,
            n.class.name(),
            n.position.x,
            n.position.y,
            n.position.distance(sim.network().node(wbasn_sim::NodeId::SINK).position)
        );
    }

    for _ in 0..rounds {
        let m = sim.step();
        println!("\n== round {} ({} slots, {} cluster heads)", m.round, sim.schedule().slots.len(), m.ch_count);
        for e in sim.events() {
            match e {
                Event::Delivered { packet, kind, hop_trace } => {
                    let t: Vec<String> = hop_trace.iter().map(|n| n.to_string()).collect();
                    println!("  #{packet} {kind:?} delivered {}", t.join("->"));
                }
                Event::Lost { packet, kind, reason, .. } => println!("  #{packet} {kind:?} lost: {}", reason.key()),
                Event::Returned { from, to, .. } => println!("  {to} returned a packet to {from}"),
                Event::Escalated { from, .. } => println!("  {from} escalates to full power"),
                Event::HelloFlood => println!("  hello flood"),
                Event::Joined { child, parent } => println!("  {child} joined {parent}"),
                _ => {}
            }
        }
        println!(
            "  residual {:.6} J, delivered so far {}, lost {}",
            m.total_residual_energy,
            m.cumulative.delivered(),
            m.cumulative.lost
        );
    }
}
