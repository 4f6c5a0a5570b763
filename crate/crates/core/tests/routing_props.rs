use std::collections::{BTreeSet, VecDeque};

use proptest::prelude::*;

use wbasn_sim::model::{Node, NodeClass, NodeId, Packet, PacketKind, Point, Protocol, ScenarioConfig};
use wbasn_sim::network::Network;
use wbasn_sim::routing::{assign_parents, dispatch, select_route, Route, RouteTable, RoutingContext, TransmissionPlan};
use wbasn_sim::thermal::{ThermalParams, ThermalState};

fn network(points: &[(f64, f64)]) -> Network {
    let mut config = ScenarioConfig::paper_simulation(1);
    config.classes.parent.normal_range = 2.0;
    let mut nodes = vec![Node::new(NodeId::SINK, NodeClass::Sink, Point::new(0.0, 0.0), f64::INFINITY)];
    for (i, &(x, y)) in points.iter().enumerate() {
        nodes.push(Node::new(NodeId(i + 1), NodeClass::Parent, Point::new(x, y), 1.0));
    }
    Network::new(nodes, &config)
}

/// Plain BFS over pairwise distances, independent of RouteTable.
fn bfs_hops(net: &Network) -> Vec<Option<u32>> {
    let n = net.len();
    let mut hops = vec![None; n];
    hops[0] = Some(0);
    let mut q = VecDeque::from([0usize]);
    while let Some(u) = q.pop_front() {
        for v in 0..n {
            let d = net.nodes[u].position.distance(net.nodes[v].position);
            if hops[v].is_none() && d <= 2.0 {
                hops[v] = Some(hops[u].unwrap() + 1);
                q.push_back(v);
            }
        }
    }
    hops
}

fn route_strategy() -> impl Strategy<Value = Vec<(Vec<usize>, u8)>> {
    // (path of relay ids, energy bucket): coarse buckets make ties common
    prop::collection::vec((prop::collection::vec(1usize..6, 0..4), 0u8..4), 1..6)
}

fn routes(spec: &[(Vec<usize>, u8)]) -> Vec<Route> {
    spec.iter()
        .map(|(relays, e)| {
            let mut path = vec![NodeId(9)];
            path.extend(relays.iter().map(|&r| NodeId(r)));
            path.push(NodeId::SINK);
            Route {
                hop_count: path.len() - 1,
                path,
                energy_cost: f64::from(*e) * 1e-5,
            }
        })
        .collect()
}

proptest! {
    #[test]
    fn select_route_ignores_candidate_order(spec in route_strategy(), rot in 0usize..6) {
        let rs = routes(&spec);
        let best = select_route(&rs).unwrap().clone();
        let mut shuffled = rs.clone();
        let k = rot % shuffled.len();
        shuffled.rotate_left(k);
        shuffled.reverse();
        prop_assert_eq!(select_route(&shuffled).unwrap(), &best);
        for r in &rs {
            prop_assert!(best.hop_count <= r.hop_count);
            if r.hop_count == best.hop_count {
                prop_assert!(best.energy_cost <= r.energy_cost);
            }
        }
    }

    #[test]
    fn hop_counts_match_plain_bfs(points in prop::collection::vec((0.0f64..5.0, 0.0f64..5.0), 1..8)) {
        let net = network(&points);
        let table = RouteTable::discover(&net);
        let expected = bfs_hops(&net);
        for id in net.ids() {
            prop_assert_eq!(table.hops_to_sink(id), expected[id.index()]);
        }
    }

    #[test]
    fn fresh_normal_route_has_minimum_hops(points in prop::collection::vec((0.0f64..5.0, 0.0f64..5.0), 1..8)) {
        let mut net = network(&points);
        let table = RouteTable::discover(&net);
        assign_parents(&mut net, &table, None, |_| 1000);
        let heads = BTreeSet::new();
        let thermal = ThermalState::new(net.len(), ThermalParams::default());
        let expected = bfs_hops(&net);
        for protocol in [Protocol::MultiHop, Protocol::Attempt] {
            let ctx = RoutingContext { table: &table, cluster_heads: &heads, protocol };
            for id in net.ids().skip(1) {
                let p = Packet::new(1, PacketKind::Normal, 1000, id, 1);
                match (dispatch(&p, &net, &thermal, &ctx).unwrap(), expected[id.index()]) {
                    (TransmissionPlan::MultiHop(r), Some(h)) => {
                        prop_assert_eq!(r.hop_count as u32, h);
                        prop_assert_eq!(r.path.first(), Some(&id));
                        prop_assert_eq!(r.path.last(), Some(&NodeId::SINK));
                    }
                    (TransmissionPlan::Drop(_), None) => {}
                    (plan, h) => prop_assert!(false, "{id}: {plan:?} with hops {h:?}"),
                }
            }
        }
    }
}
