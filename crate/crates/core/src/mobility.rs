//! Limb oscillation, parent-link breakage, and the invitation-phase join
//! protocol.

use std::f64::consts::TAU;

use rand::Rng;

use crate::model::{Node, NodeClass, NodeId, Point, ScenarioConfig};
use crate::network::{DebitKind, Event, Network};
use crate::routing::RouteTable;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Track {
    /// Unit vector.
    pub axis: (f64, f64),
    pub amplitude: f64,
    pub phase: f64,
}

/// Each node swings along a fixed axis:
/// `base + axis · amplitude · sin(2π·t/period + phase)`, clamped to the area.
#[derive(Debug, Clone, PartialEq)]
pub struct MobilityModel {
    pub tracks: Vec<Track>,
    pub period: u32,
    pub area_side: f64,
}

impl MobilityModel {
    pub fn new(nodes: &[Node], config: &ScenarioConfig, rng: &mut impl Rng) -> Self {
        let tracks = nodes
            .iter()
            .map(|n| {
                // always draw both so the stream does not depend on classes
                let angle = rng.random::<f64>() * TAU;
                let phase = rng.random::<f64>() * TAU;
                Track {
                    axis: (angle.cos(), angle.sin()),
                    amplitude: config.class_profile(n.class).map_or(0.0, |p| p.mobility_amplitude),
                    phase,
                }
            })
            .collect();
        Self {
            tracks,
            period: config.mobility_period,
            area_side: config.area_side,
        }
    }

    pub fn position_at(&self, id: NodeId, base: Point, round: u32) -> Point {
        let t = &self.tracks[id.index()];
        if t.amplitude == 0.0 {
            return base;
        }
        let cycle = f64::from(round % self.period) / f64::from(self.period);
        let s = (TAU * cycle + t.phase).sin();
        Point::new(base.x + t.axis.0 * t.amplitude * s, base.y + t.axis.1 * t.amplitude * s)
            .clamp_to_square(self.area_side)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BrokenLink {
    pub child: NodeId,
    pub parent: NodeId,
}

/// Move every node to its position for `round` and report registered
/// parent links that no longer hold (out of range or parent dead).
pub fn step_positions(net: &mut Network, model: &MobilityModel, round: u32) -> Vec<BrokenLink> {
    for node in &mut net.nodes {
        node.position = model.position_at(node.id, node.base_position, round);
    }
    broken_links(net)
}

pub fn broken_links(net: &Network) -> Vec<BrokenLink> {
    net.sensors()
        .filter(|n| n.alive)
        .filter_map(|n| {
            let parent = n.parent?;
            let ok = net.is_alive(parent) && net.in_range(n.id, parent);
            (!ok).then_some(BrokenLink { child: n.id, parent })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JoinOutcome {
    Joined(NodeId),
    Rejected,
}

/// Depth of `id` along parent pointers, if it reaches the sink through live,
/// in-range links without passing `avoid`.
fn tree_depth(net: &Network, id: NodeId, avoid: NodeId) -> Option<u32> {
    let mut cur = id;
    let mut depth = 0;
    while !cur.is_sink() {
        let next = net.node(cur).parent?;
        if next == avoid || !net.is_alive(next) || !net.in_range(cur, next) || depth as usize > net.len() {
            return None;
        }
        depth += 1;
        cur = next;
    }
    Some(depth)
}

/// The child broadcasts a join request; in-range parent-class nodes (and the
/// sink, if in range) are scanned by (hops to sink, distance) and the first
/// one below `child_cap` registers it.
pub fn join_request(
    child: NodeId,
    net: &mut Network,
    table: &mut RouteTable,
    child_cap: usize,
    request_bits: u64,
) -> JoinOutcome {
    net.unregister(child);
    if !net.is_alive(child) {
        return JoinOutcome::Rejected;
    }
    let mut candidates: Vec<(u32, f64, NodeId)> = net
        .ids()
        .filter(|&p| p != child && net.is_alive(p))
        .filter(|&p| p.is_sink() || net.node(p).class == NodeClass::Parent)
        .filter(|&p| net.in_range(child, p))
        .filter_map(|p| Some((tree_depth(net, p, child)?, net.distance(child, p), p)))
        .collect();
    candidates.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));

    let radio = net.radio;
    let request = radio.tx_cost(request_bits, net.normal_range(child));
    if !net.debit(child, request, DebitKind::Control).completed() {
        return JoinOutcome::Rejected;
    }
    for &(_, _, p) in &candidates {
        net.debit(p, radio.rx_cost(request_bits), DebitKind::Control);
    }
    let accepted = candidates
        .iter()
        .find(|&&(_, _, p)| net.is_alive(p) && (p.is_sink() || net.node(p).children.len() < child_cap))
        .copied();
    match accepted {
        Some((depth, dist, parent)) => {
            net.debit(parent, radio.tx_cost(request_bits, dist), DebitKind::Control);
            net.debit(child, radio.rx_cost(request_bits), DebitKind::Control);
            net.register(child, parent);
            table.set_hops(child, Some(depth + 1));
            net.log(Event::Joined { child, parent });
            JoinOutcome::Joined(parent)
        }
        None => {
            net.log(Event::JoinRejected { child });
            JoinOutcome::Rejected
        }
    }
}
