//! Hello flood, candidate routes and the route-selection rule on a small
//! hand-placed body.
//!
//!     cargo run --example route_selection

use std::collections::BTreeSet;

use wbasn_sim::model::{Node, NodeClass, NodeId, Packet, PacketKind, Point, Protocol, ScenarioConfig};
use wbasn_sim::network::Network;
use wbasn_sim::routing::{
    assign_parents, candidate_routes, dispatch, hello_flood, select_route, RoutingContext, TransmissionPlan,
};
use wbasn_sim::thermal::{ThermalParams, ThermalState};

fn main() {
    let config = ScenarioConfig::paper_simulation(1);
    let layout = [
        (NodeClass::Parent, 3.5, 2.5),
        (NodeClass::Parent, 2.5, 3.6),
        (NodeClass::FirstChild, 4.6, 2.9),
        (NodeClass::FirstChild, 3.3, 4.4),
        (NodeClass::SecondChild, 4.4, 4.1),
        (NodeClass::SecondChild, 0.4, 0.3),
    ];
    let mut nodes = vec![Node::new(NodeId::SINK, NodeClass::Sink, config.sink_position(), f64::INFINITY)];
    for (i, &(class, x, y)) in layout.iter().enumerate() {
        nodes.push(Node::new(NodeId(i + 1), class, Point::new(x, y), 0.5));
    }
    let mut net = Network::new(nodes, &config);

    let table = hello_flood(&mut net, config.hello_bits);
    println!("hello flood cost {:.3e} J", net.ledger().control);
    for id in net.ids().skip(1) {
        let n = net.node(id);
        let hops = table.hops_to_sink(id).map_or("unreachable".into(), |h| format!("{h} hops"));
        let neigh: Vec<String> = table.neighbors(id).iter().map(|v| v.to_string()).collect();
        println!("{id} {:<12} {hops:<12} neighbors [{}]", n.class.name(), neigh.join(" "));
    }

    assign_parents(&mut net, &table, Some(config.child_cap), |c| config.payload_bits(c));
    let heads = BTreeSet::new();
    let thermal = ThermalState::new(net.len(), ThermalParams::default());
    for protocol in [Protocol::Attempt, Protocol::MAttempt] {
        let ctx = RoutingContext { table: &table, cluster_heads: &heads, protocol };
        println!("\n{protocol}:");
        for id in net.ids().skip(1) {
            let bits = config.payload_bits(net.node(id).class);
            let candidates = candidate_routes(&net, &thermal, &ctx, id, bits, &BTreeSet::new());
            for r in &candidates {
                let path: Vec<String> = r.path.iter().map(|v| v.to_string()).collect();
                println!("  {id} candidate {} ({} hops, {:.3e} J)", path.join("->"), r.hop_count, r.energy_cost);
            }
            if let Ok(best) = select_route(&candidates) {
                println!("  {id} picks {:?}", best.next_hop());
            }
            let packet = Packet::new(0, PacketKind::Normal, bits, id, 1);
            match dispatch(&packet, &net, &thermal, &ctx).expect("node is alive") {
                TransmissionPlan::Direct => println!("  {id} normal packet goes direct at full power"),
                TransmissionPlan::MultiHop(r) => println!("  {id} normal packet via {} hops", r.hop_count),
                TransmissionPlan::Drop(reason) => println!("  {id} normal packet dropped: {}", reason.key()),
            }
        }
    }
}
