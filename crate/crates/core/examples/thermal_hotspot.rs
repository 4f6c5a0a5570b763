//! A relay overheats, returns packets, and the sender routes around it
//! until the hot-spot mark expires.
//!
//!     cargo run --example thermal_hotspot

use std::collections::BTreeSet;

use wbasn_sim::model::{Node, NodeClass, NodeId, Packet, PacketKind, Point, Protocol, ScenarioConfig};
use wbasn_sim::network::Network;
use wbasn_sim::routing::{assign_parents, dispatch, execute_plan, DeliveryOutcome, RouteTable, RoutingContext};
use wbasn_sim::thermal::{ThermalParams, ThermalState};

fn main() {
    let config = ScenarioConfig::paper_simulation(1);
    // Source S (n3) can reach the sink through relay A (n1) or relay B (n2).
    let nodes = vec![
        Node::new(NodeId::SINK, NodeClass::Sink, Point::new(0.0, 0.0), f64::INFINITY),
        Node::new(NodeId(1), NodeClass::Parent, Point::new(1.4, 0.2), 0.5),
        Node::new(NodeId(2), NodeClass::Parent, Point::new(1.3, -0.5), 0.5),
        Node::new(NodeId(3), NodeClass::SecondChild, Point::new(2.6, 0.0), 0.5),
    ];
    let mut net = Network::new(nodes, &config);
    let table = RouteTable::discover(&net);
    assign_parents(&mut net, &table, None, |_| 500);
    let heads = BTreeSet::new();
    let mut thermal = ThermalState::new(net.len(), ThermalParams::default());

    for protocol in [Protocol::Attempt, Protocol::MAttempt] {
        println!("{protocol}");
        for round in 1..=12u32 {
            if round == 2 {
                // both relays busy with other traffic
                thermal.set_temperature(NodeId(1), 1.0);
                thermal.set_temperature(NodeId(2), 1.0);
            }
            let ctx = RoutingContext { table: &table, cluster_heads: &heads, protocol };
            let mut packet = Packet::new(u64::from(round), PacketKind::Normal, 500, NodeId(3), round);
            let plan = dispatch(&packet, &net, &thermal, &ctx).unwrap();
            let report = execute_plan(plan, &mut packet, &mut net, &mut thermal, &ctx);
            let trace: Vec<String> = packet.hop_trace.iter().map(|n| n.to_string()).collect();
            let outcome = match report.outcome {
                DeliveryOutcome::Delivered => "delivered".to_string(),
                DeliveryOutcome::Lost(r) => format!("lost ({})", r.key()),
            };
            let marks: Vec<String> = thermal
                .hotspot_links()
                .map(|((a, b), left)| format!("{a}->{b}:{left}"))
                .collect();
            println!(
                "  round {round:>2}: {outcome:<15} via {:<18} returns {} T(n1)={:.2} T(n2)={:.2} marks [{}]",
                trace.join("->"),
                report.returns,
                thermal.temperature(NodeId(1)),
                thermal.temperature(NodeId(2)),
                marks.join(" ")
            );
            thermal.cool_all();
        }
        thermal = ThermalState::new(net.len(), ThermalParams::default());
    }
}
