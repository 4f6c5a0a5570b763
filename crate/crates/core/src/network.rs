//! Mutable network state shared by the routing, mobility and engine
//! modules: the node table, the energy ledger and the per-round event log.

use crate::model::{Node, NodeClass, NodeId, PacketKind, RadioParams, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LossReason {
    /// No usable route and no fallback.
    NoRoute,
    /// The next hop moved out of range.
    LinkBroken,
    /// Every alternative was blocked by a hot receiver.
    HotSpot,
    /// Source was dead when its slot came up.
    SourceDead,
    /// A relay died while holding the packet.
    NodeDeath,
    /// The holder could not pay for the transmission.
    EnergyExhausted,
}

impl LossReason {
    /// Losses caused by a battery running out rather than by topology.
    pub fn is_energy_related(self) -> bool {
        matches!(
            self,
            LossReason::SourceDead | LossReason::NodeDeath | LossReason::EnergyExhausted
        )
    }

    pub fn key(self) -> &'static str {
        match self {
            LossReason::NoRoute => "no_route",
            LossReason::LinkBroken => "link_broken",
            LossReason::HotSpot => "hot_spot",
            LossReason::SourceDead => "source_dead",
            LossReason::NodeDeath => "node_death",
            LossReason::EnergyExhausted => "energy_exhausted",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    HelloFlood,
    LinkBroken { child: NodeId, parent: NodeId },
    Joined { child: NodeId, parent: NodeId },
    JoinRejected { child: NodeId },
    Generated { packet: u64, kind: PacketKind, source: NodeId },
    Hop { packet: u64, from: NodeId, to: NodeId },
    Returned { packet: u64, from: NodeId, to: NodeId },
    Escalated { packet: u64, from: NodeId },
    Delivered { packet: u64, kind: PacketKind, hop_trace: Vec<NodeId> },
    Lost { packet: u64, kind: PacketKind, reason: LossReason, hop_trace: Vec<NodeId> },
    Died { node: NodeId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DebitKind {
    Transmit,
    Receive,
    Control,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Debit {
    /// Paid in full, node still alive.
    Paid,
    /// Paid in full with nothing left over; the node is now dead.
    PaidAndDied,
    /// The battery ran out part way; the operation did not complete.
    Exhausted,
}

impl Debit {
    pub fn completed(self) -> bool {
        !matches!(self, Debit::Exhausted)
    }
}

/// Every joule taken from a mortal node, by category.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Ledger {
    pub transmit: f64,
    pub receive: f64,
    pub control: f64,
    /// Consumed by the (immortal) sink; not part of the network total.
    pub sink: f64,
}

impl Ledger {
    pub fn total(&self) -> f64 {
        self.transmit + self.receive + self.control
    }
}

#[derive(Debug, Clone)]
pub struct Network {
    pub nodes: Vec<Node>,
    pub radio: RadioParams,
    ranges: [f64; 4],
    pub full_power_range: f64,
    ledger: Ledger,
    events: Vec<Event>,
    record_events: bool,
    died: Vec<NodeId>,
}

impl Network {
    pub fn new(nodes: Vec<Node>, config: &ScenarioConfig) -> Self {
        let ranges = [
            NodeClass::Sink,
            NodeClass::Parent,
            NodeClass::FirstChild,
            NodeClass::SecondChild,
        ]
        .map(|c| config.normal_range(c));
        Self {
            nodes,
            radio: config.radio,
            ranges,
            full_power_range: config.full_power_range,
            ledger: Ledger::default(),
            events: Vec::new(),
            record_events: true,
            died: Vec::new(),
        }
    }

    pub fn set_record_events(&mut self, on: bool) {
        self.record_events = on;
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut Node {
        &mut self.nodes[id.index()]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn sensors(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().skip(1)
    }

    pub fn is_alive(&self, id: NodeId) -> bool {
        self.node(id).alive
    }

    pub fn normal_range(&self, id: NodeId) -> f64 {
        self.ranges[self.node(id).class as usize]
    }

    /// Two nodes can talk at normal power iff both are within each other's range.
    pub fn link_range(&self, a: NodeId, b: NodeId) -> f64 {
        self.normal_range(a).min(self.normal_range(b))
    }

    pub fn distance(&self, a: NodeId, b: NodeId) -> f64 {
        self.node(a).position.distance(self.node(b).position)
    }

    pub fn in_range(&self, a: NodeId, b: NodeId) -> bool {
        self.distance(a, b) <= self.link_range(a, b)
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    pub fn residual_energy(&self) -> f64 {
        self.sensors().map(|n| n.energy).sum()
    }

    pub fn dead_count(&self) -> usize {
        self.sensors().filter(|n| !n.alive).count()
    }

    /// Take `amount` joules from `id`, clamping at zero. A node whose
    /// battery reaches zero is dead.
    pub fn debit(&mut self, id: NodeId, amount: f64, kind: DebitKind) -> Debit {
        debug_assert!(amount >= 0.0);
        if id.is_sink() {
            self.ledger.sink += amount;
            return Debit::Paid;
        }
        let node = &mut self.nodes[id.index()];
        if !node.alive {
            return Debit::Exhausted;
        }
        let taken = amount.min(node.energy);
        let outcome = if amount < node.energy {
            node.energy -= amount;
            Debit::Paid
        } else {
            let exact = amount == node.energy;
            node.energy = 0.0;
            node.alive = false;
            if exact {
                Debit::PaidAndDied
            } else {
                Debit::Exhausted
            }
        };
        match kind {
            DebitKind::Transmit => self.ledger.transmit += taken,
            DebitKind::Receive => self.ledger.receive += taken,
            DebitKind::Control => self.ledger.control += taken,
        }
        if outcome != Debit::Paid {
            self.died.push(id);
            self.log(Event::Died { node: id });
        }
        outcome
    }

    /// Nodes that died since the last call.
    pub fn take_deaths(&mut self) -> Vec<NodeId> {
        std::mem::take(&mut self.died)
    }

    pub fn log(&mut self, event: Event) {
        if self.record_events {
            self.events.push(event);
        }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn clear_events(&mut self) {
        self.events.clear();
    }

    /// Detach `child` from its registered parent, if any.
    pub fn unregister(&mut self, child: NodeId) -> Option<NodeId> {
        let parent = self.node_mut(child).parent.take()?;
        self.node_mut(parent).children.remove(&child);
        Some(parent)
    }

    pub fn register(&mut self, child: NodeId, parent: NodeId) {
        self.unregister(child);
        self.node_mut(child).parent = Some(parent);
        self.node_mut(parent).children.insert(child);
    }

    pub fn clear_tree(&mut self) {
        for n in &mut self.nodes {
            n.parent = None;
            n.children.clear();
        }
    }

    /// Largest registered fan-in over non-sink nodes.
    pub fn max_children(&self) -> usize {
        self.sensors().map(|n| n.children.len()).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Point;

    fn net(energy: f64) -> Network {
        let cfg = ScenarioConfig::paper_simulation(1);
        let nodes = vec![
            Node::new(NodeId::SINK, NodeClass::Sink, Point::new(2.5, 2.5), f64::INFINITY),
            Node::new(NodeId(1), NodeClass::Parent, Point::new(1.0, 2.5), energy),
        ];
        Network::new(nodes, &cfg)
    }

    #[test]
    fn debit_clamps_and_kills() {
        let mut n = net(1.0);
        assert_eq!(n.debit(NodeId(1), 0.25, DebitKind::Transmit), Debit::Paid);
        assert_eq!(n.debit(NodeId(1), 0.75, DebitKind::Receive), Debit::PaidAndDied);
        assert!(!n.is_alive(NodeId(1)));
        assert_eq!(n.node(NodeId(1)).energy, 0.0);
        assert_eq!(n.ledger().total(), 1.0);

        let mut n = net(0.5);
        assert_eq!(n.debit(NodeId(1), 2.0, DebitKind::Transmit), Debit::Exhausted);
        assert_eq!(n.node(NodeId(1)).energy, 0.0);
        assert_eq!(n.ledger().total(), 0.5);
        assert_eq!(n.take_deaths(), vec![NodeId(1)]);
    }

    #[test]
    fn sink_is_immortal() {
        let mut n = net(1.0);
        for _ in 0..10 {
            assert_eq!(n.debit(NodeId::SINK, 1e6, DebitKind::Receive), Debit::Paid);
        }
        assert!(n.is_alive(NodeId::SINK));
        assert_eq!(n.ledger().total(), 0.0);
        assert_eq!(n.ledger().sink, 1e7);
    }

    #[test]
    fn link_range_is_the_smaller_range() {
        let n = net(1.0);
        assert_eq!(n.link_range(NodeId::SINK, NodeId(1)), 3.5);
        assert!(n.in_range(NodeId::SINK, NodeId(1)));
    }
}
