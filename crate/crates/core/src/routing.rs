//! Hop-count discovery, candidate routes, route selection, and per-packet
//! forwarding.
//!
//! Routes are walked along registered parent pointers. Each non-sink node
//! has at most one parent (its next hop); a cluster head sends straight to
//! the sink for the round it is elected.

use std::cmp::Ordering;
use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use crate::energy::{path_energy, EnergyBreakdown};
use crate::model::{NodeClass, NodeId, Packet, Protocol};
use crate::network::{Debit, DebitKind, Event, LossReason, Network};
use crate::thermal::{ForwardOutcome, ThermalState};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouteTable {
    neighbors: Vec<BTreeSet<NodeId>>,
    hops: Vec<Option<u32>>,
}

impl RouteTable {
    pub fn empty(node_count: usize) -> Self {
        Self {
            neighbors: vec![BTreeSet::new(); node_count],
            hops: vec![None; node_count],
        }
    }

    /// Breadth-first hop counts from the sink over the current
    /// normal-range graph of live nodes.
    pub fn discover(net: &Network) -> Self {
        let n = net.len();
        let mut neighbors = vec![BTreeSet::new(); n];
        for a in net.ids() {
            if !net.is_alive(a) {
                continue;
            }
            for b in net.ids().skip(a.index() + 1) {
                if net.is_alive(b) && net.in_range(a, b) {
                    neighbors[a.index()].insert(b);
                    neighbors[b.index()].insert(a);
                }
            }
        }
        let mut hops = vec![None; n];
        hops[0] = Some(0);
        let mut queue = VecDeque::from([NodeId::SINK]);
        while let Some(u) = queue.pop_front() {
            let h = hops[u.index()].expect("queued nodes have a hop count");
            for &v in &neighbors[u.index()] {
                if hops[v.index()].is_none() {
                    hops[v.index()] = Some(h + 1);
                    queue.push_back(v);
                }
            }
        }
        Self { neighbors, hops }
    }

    pub fn hops_to_sink(&self, id: NodeId) -> Option<u32> {
        self.hops[id.index()]
    }

    pub fn set_hops(&mut self, id: NodeId, hops: Option<u32>) {
        self.hops[id.index()] = hops;
    }

    pub fn neighbors(&self, id: NodeId) -> &BTreeSet<NodeId> {
        &self.neighbors[id.index()]
    }
}

/// Every live node broadcasts one hello at its normal range and hears one
/// from each live neighbor.
pub fn hello_flood(net: &mut Network, hello_bits: u64) -> RouteTable {
    let table = RouteTable::discover(net);
    net.log(Event::HelloFlood);
    let radio = net.radio;
    for id in net.ids().collect::<Vec<_>>() {
        if id.is_sink() || !net.is_alive(id) {
            continue;
        }
        let tx = radio.tx_cost(hello_bits, net.normal_range(id));
        if !net.debit(id, tx, DebitKind::Control).completed() {
            continue;
        }
        for _ in table.neighbors(id) {
            if !net.is_alive(id) {
                break;
            }
            net.debit(id, radio.rx_cost(hello_bits), DebitKind::Control);
        }
    }
    table
}

#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub path: Vec<NodeId>,
    pub hop_count: usize,
    pub energy_cost: f64,
}

impl Route {
    /// Cost is one transmit per hop at the actual hop distance plus one
    /// receive per relay, for a payload of `bits`.
    pub fn new(path: Vec<NodeId>, net: &Network, bits: u64) -> Self {
        let distances: Vec<f64> = path.windows(2).map(|w| net.distance(w[0], w[1])).collect();
        let EnergyBreakdown { total, .. } = path_energy(bits, &distances, &net.radio);
        Self {
            hop_count: path.len().saturating_sub(1),
            path,
            energy_cost: total,
        }
    }

    pub fn next_hop(&self) -> Option<NodeId> {
        self.path.get(1).copied()
    }

    fn rank(&self, other: &Route) -> Ordering {
        self.hop_count
            .cmp(&other.hop_count)
            .then(self.energy_cost.total_cmp(&other.energy_cost))
            .then_with(|| self.path.cmp(&other.path))
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("no route to the sink")]
pub struct NoRoute;

/// Fewest hops, then least energy, then lexicographic path order.
pub fn select_route(candidates: &[Route]) -> Result<&Route, NoRoute> {
    candidates.iter().min_by(|a, b| a.rank(b)).ok_or(NoRoute)
}

/// Per-round view the forwarding logic needs besides the network itself.
#[derive(Debug, Clone, Copy)]
pub struct RoutingContext<'a> {
    pub table: &'a RouteTable,
    pub cluster_heads: &'a BTreeSet<NodeId>,
    pub protocol: Protocol,
}

impl RoutingContext<'_> {
    fn effective_hops(&self, id: NodeId) -> Option<u32> {
        if id.is_sink() {
            Some(0)
        } else if self.cluster_heads.contains(&id) {
            Some(1)
        } else {
            self.table.hops_to_sink(id)
        }
    }
}

/// A link is usable when both ends are alive, they are in range (full-power
/// range for a cluster head's hop to the sink) and the link is not marked.
pub fn link_usable(
    net: &Network,
    thermal: &ThermalState,
    cluster_heads: &BTreeSet<NodeId>,
    from: NodeId,
    to: NodeId,
) -> bool {
    if from == to || !net.is_alive(from) || !net.is_alive(to) || thermal.is_marked(from, to) {
        return false;
    }
    let reach = if to.is_sink() && cluster_heads.contains(&from) {
        net.full_power_range
    } else {
        net.link_range(from, to)
    };
    net.distance(from, to) <= reach
}

/// Path from `start` to the sink following parent pointers, or `None` if a
/// link on the way is unusable, a node is detached, or the pointers loop.
pub fn tree_path(
    net: &Network,
    thermal: &ThermalState,
    cluster_heads: &BTreeSet<NodeId>,
    start: NodeId,
) -> Option<Vec<NodeId>> {
    let mut path = vec![start];
    let mut cur = start;
    while !cur.is_sink() {
        let next = if cluster_heads.contains(&cur) {
            NodeId::SINK
        } else {
            net.node(cur).parent?
        };
        if path.contains(&next) || !link_usable(net, thermal, cluster_heads, cur, next) {
            return None;
        }
        path.push(next);
        cur = next;
    }
    Some(path)
}

/// One candidate per usable neighbor strictly closer to the sink, extended
/// by that neighbor's own tree path. A cluster head's only candidate is its
/// direct hop to the sink.
pub fn candidate_routes(
    net: &Network,
    thermal: &ThermalState,
    ctx: &RoutingContext<'_>,
    node: NodeId,
    bits: u64,
    avoid: &BTreeSet<NodeId>,
) -> Vec<Route> {
    if ctx.cluster_heads.contains(&node) {
        return if link_usable(net, thermal, ctx.cluster_heads, node, NodeId::SINK) {
            vec![Route::new(vec![node, NodeId::SINK], net, bits)]
        } else {
            Vec::new()
        };
    }
    let own = ctx.effective_hops(node).unwrap_or(u32::MAX);
    ctx.table
        .neighbors(node)
        .iter()
        .copied()
        .filter(|&v| !avoid.contains(&v))
        .filter(|&v| ctx.effective_hops(v).is_some_and(|h| h < own))
        .filter(|&v| link_usable(net, thermal, ctx.cluster_heads, node, v))
        .filter_map(|v| {
            let rest = tree_path(net, thermal, ctx.cluster_heads, v)?;
            if rest.contains(&node) || rest.iter().any(|r| avoid.contains(r)) {
                return None;
            }
            let mut path = Vec::with_capacity(rest.len() + 1);
            path.push(node);
            path.extend(rest);
            Some(Route::new(path, net, bits))
        })
        .collect()
}

/// Build the initial parent tree from a fresh route table: nodes are
/// processed nearest-first and each takes the first hop of its best
/// candidate route. With a `child_cap`, full parents are skipped.
pub fn assign_parents(net: &mut Network, table: &RouteTable, child_cap: Option<usize>, bits_of: impl Fn(NodeClass) -> u64) {
    net.clear_tree();
    let no_heads = BTreeSet::new();
    // Fresh tree: no marks apply to parent selection.
    let thermal = ThermalState::new(net.len(), Default::default());
    let ctx = RoutingContext {
        table,
        cluster_heads: &no_heads,
        protocol: Protocol::MultiHop,
    };
    let mut order: Vec<NodeId> = net
        .ids()
        .filter(|&id| !id.is_sink() && net.is_alive(id) && table.hops_to_sink(id).is_some())
        .collect();
    order.sort_by_key(|&id| (table.hops_to_sink(id), id));
    for id in order {
        let bits = bits_of(net.node(id).class);
        let mut candidates = candidate_routes(net, &thermal, &ctx, id, bits, &BTreeSet::new());
        if let Some(cap) = child_cap {
            candidates.retain(|r| {
                let first = r.path[1];
                first.is_sink() || net.node(first).children.len() < cap
            });
        }
        if let Ok(best) = select_route(&candidates) {
            let parent = best.path[1];
            net.register(id, parent);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransmissionPlan {
    /// Full-power single hop to the sink.
    Direct,
    MultiHop(Route),
    Drop(LossReason),
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("node {0} is dead and cannot send")]
pub struct DeadSender(pub NodeId);

/// Choose how a freshly generated packet leaves its source.
pub fn dispatch(
    packet: &Packet,
    net: &Network,
    thermal: &ThermalState,
    ctx: &RoutingContext<'_>,
) -> Result<TransmissionPlan, DeadSender> {
    let node = packet.holder();
    if !net.is_alive(node) {
        return Err(DeadSender(node));
    }
    if packet.kind.is_urgent() && ctx.protocol.has_urgent_traffic() {
        return Ok(direct_or_drop(net, node));
    }
    let escalates = ctx.protocol.mobility_support();
    if escalates && !ctx.cluster_heads.contains(&node) {
        match net.node(node).parent {
            // Detached after a rejected join: full power until a join succeeds.
            None => return Ok(direct_or_drop(net, node)),
            Some(_) => {
                if let Some(path) = tree_path(net, thermal, ctx.cluster_heads, node) {
                    return Ok(TransmissionPlan::MultiHop(Route::new(path, net, packet.size_bits)));
                }
            }
        }
    }
    let candidates = candidate_routes(net, thermal, ctx, node, packet.size_bits, &BTreeSet::new());
    Ok(match select_route(&candidates) {
        Ok(route) => TransmissionPlan::MultiHop(route.clone()),
        Err(NoRoute) if escalates => direct_or_drop(net, node),
        Err(NoRoute) if blocked_by_hotspot(thermal, ctx.table, node) => TransmissionPlan::Drop(LossReason::HotSpot),
        Err(NoRoute) => TransmissionPlan::Drop(LossReason::NoRoute),
    })
}

fn blocked_by_hotspot(thermal: &ThermalState, table: &RouteTable, node: NodeId) -> bool {
    table.neighbors(node).iter().any(|&v| thermal.is_marked(node, v))
}

fn direct_or_drop(net: &Network, node: NodeId) -> TransmissionPlan {
    if net.distance(node, NodeId::SINK) <= net.full_power_range {
        TransmissionPlan::Direct
    } else {
        TransmissionPlan::Drop(LossReason::NoRoute)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeliveryOutcome {
    Delivered,
    Lost(LossReason),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeliveryReport {
    pub outcome: DeliveryOutcome,
    /// Joules taken from mortal nodes on behalf of this packet.
    pub energy: f64,
    pub returns: u32,
}

struct Courier<'n, 't, 'c> {
    net: &'n mut Network,
    thermal: &'t mut ThermalState,
    ctx: &'c RoutingContext<'c>,
    energy: f64,
    returns: u32,
}

enum Step {
    Moved,
    Blocked(LossReason),
    Done(DeliveryOutcome),
}

impl Courier<'_, '_, '_> {
    fn pay(&mut self, id: NodeId, amount: f64, kind: DebitKind) -> Debit {
        let before = if id.is_sink() { 0.0 } else { self.net.node(id).energy };
        let d = self.net.debit(id, amount, kind);
        if !id.is_sink() {
            self.energy += before - self.net.node(id).energy;
        }
        d
    }

    fn direct(&mut self, packet: &mut Packet) -> DeliveryOutcome {
        let from = packet.holder();
        if self.net.distance(from, NodeId::SINK) > self.net.full_power_range {
            return DeliveryOutcome::Lost(LossReason::NoRoute);
        }
        let d = self.net.distance(from, NodeId::SINK);
        let tx = self.net.radio.tx_cost(packet.size_bits, d);
        if !self.pay(from, tx, DebitKind::Transmit).completed() {
            return DeliveryOutcome::Lost(LossReason::EnergyExhausted);
        }
        self.net.log(Event::Hop {
            packet: packet.id,
            from,
            to: NodeId::SINK,
        });
        let rx = self.net.radio.rx_cost(packet.size_bits);
        self.pay(NodeId::SINK, rx, DebitKind::Receive);
        packet.hop_trace.push(NodeId::SINK);
        DeliveryOutcome::Delivered
    }

    /// Move the packet one hop along `route` (which starts at the holder).
    fn hop(&mut self, packet: &mut Packet, next: NodeId) -> Step {
        let from = packet.holder();
        if !link_usable(self.net, self.thermal, self.ctx.cluster_heads, from, next) {
            let reason = if !self.net.is_alive(next) {
                LossReason::NodeDeath
            } else if self.thermal.is_marked(from, next) {
                LossReason::HotSpot
            } else {
                LossReason::LinkBroken
            };
            return Step::Blocked(reason);
        }
        if self.ctx.protocol.thermal_aware() {
            match self.thermal.try_forward(from, next) {
                Ok(ForwardOutcome::Accepted) => {}
                Ok(ForwardOutcome::Returned) => {
                    self.returns += 1;
                    self.net.log(Event::Returned {
                        packet: packet.id,
                        from,
                        to: next,
                    });
                    return Step::Blocked(LossReason::HotSpot);
                }
                Err(_) => unreachable!("usable links are never marked"),
            }
        } else if !next.is_sink() {
            self.thermal.accrue(next, crate::thermal::HeatEvent::Receive);
        }
        let tx = self.net.radio.tx_cost(packet.size_bits, self.net.distance(from, next));
        if !self.pay(from, tx, DebitKind::Transmit).completed() {
            return Step::Done(DeliveryOutcome::Lost(LossReason::EnergyExhausted));
        }
        self.net.log(Event::Hop {
            packet: packet.id,
            from,
            to: next,
        });
        let rx = self.net.radio.rx_cost(packet.size_bits);
        match self.pay(next, rx, DebitKind::Receive) {
            Debit::Paid => {
                packet.hop_trace.push(next);
                if next.is_sink() {
                    Step::Done(DeliveryOutcome::Delivered)
                } else {
                    Step::Moved
                }
            }
            // The relay is gone; the packet stays with the sender.
            Debit::PaidAndDied | Debit::Exhausted => Step::Blocked(LossReason::NodeDeath),
        }
    }

    fn fallback(&mut self, packet: &mut Packet, reason: LossReason) -> DeliveryOutcome {
        let holder = packet.holder();
        if self.ctx.protocol.mobility_support() && self.net.is_alive(holder) {
            self.net.log(Event::Escalated {
                packet: packet.id,
                from: holder,
            });
            self.direct(packet)
        } else {
            DeliveryOutcome::Lost(reason)
        }
    }

    fn run(&mut self, plan: TransmissionPlan, packet: &mut Packet) -> DeliveryOutcome {
        let mut route = match plan {
            TransmissionPlan::Drop(reason) => return DeliveryOutcome::Lost(reason),
            TransmissionPlan::Direct => return self.direct(packet),
            TransmissionPlan::MultiHop(route) => route.path,
        };
        let mut pos = 0;
        // Each re-route consumes at least one link, so this bounds the loop.
        let mut budget = self.net.len() * self.net.len() + 1;
        loop {
            if budget == 0 {
                return self.fallback(packet, LossReason::NoRoute);
            }
            budget -= 1;
            let next = route[pos + 1];
            match self.hop(packet, next) {
                Step::Done(outcome) => return outcome,
                Step::Moved => pos += 1,
                Step::Blocked(reason) => {
                    let holder = packet.holder();
                    if !self.net.is_alive(holder) {
                        return DeliveryOutcome::Lost(LossReason::EnergyExhausted);
                    }
                    let visited: BTreeSet<NodeId> = packet.hop_trace.iter().copied().collect();
                    let candidates =
                        candidate_routes(self.net, self.thermal, self.ctx, holder, packet.size_bits, &visited);
                    match select_route(&candidates) {
                        Ok(r) => {
                            route = r.path.clone();
                            pos = 0;
                        }
                        Err(NoRoute) => return self.fallback(packet, reason),
                    }
                }
            }
        }
    }
}

/// Walk `plan` hop by hop, debiting energy and consulting the thermal state.
/// Returned packets are re-routed from the current holder; when nothing is
/// left M-ATTEMPT escalates to a full-power hop and the others drop.
pub fn execute_plan(
    plan: TransmissionPlan,
    packet: &mut Packet,
    net: &mut Network,
    thermal: &mut ThermalState,
    ctx: &RoutingContext<'_>,
) -> DeliveryReport {
    let mut courier = Courier {
        net,
        thermal,
        ctx,
        energy: 0.0,
        returns: 0,
    };
    let outcome = courier.run(plan, packet);
    DeliveryReport {
        outcome,
        energy: courier.energy,
        returns: courier.returns,
    }
}
