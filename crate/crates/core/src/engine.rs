//! The round loop: mobility and re-joins, route maintenance, cluster-head
//! election, TDMA scheduling, traffic generation, forwarding (urgent traffic
//! first), cooling, and metric collection.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::ConfigError;
use crate::mobility::{self, JoinOutcome, MobilityModel};
use crate::model::{self, NodeId, Packet, PacketKind, ScenarioConfig, Stream};
use crate::network::{Event, LossReason, Network};
use crate::routing::{self, DeliveryOutcome, RouteTable, RoutingContext};
use crate::thermal::{ThermalParams, ThermalState};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TdmaSchedule {
    pub round: u32,
    pub slots: Vec<NodeId>,
}

/// Slots in ascending id order.
pub fn build_tdma(round: u32, eligible: impl IntoIterator<Item = NodeId>) -> TdmaSchedule {
    let slots: BTreeSet<NodeId> = eligible.into_iter().collect();
    TdmaSchedule {
        round,
        slots: slots.into_iter().collect(),
    }
}

/// Epoch-based cluster-head rotation: within each epoch of ⌈1/p⌉ rounds a
/// node may be elected once, with threshold `p / (1 − p·(r mod epoch))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChRotation {
    probability: f64,
    epoch: u32,
    served: Vec<bool>,
}

impl ChRotation {
    pub fn new(node_count: usize, probability: f64) -> Self {
        let epoch = if probability > 0.0 {
            (1.0 / probability).ceil() as u32
        } else {
            0
        };
        Self {
            probability,
            epoch,
            served: vec![false; node_count],
        }
    }

    pub fn threshold(&self, round: u32) -> f64 {
        if self.epoch == 0 {
            return 0.0;
        }
        let k = f64::from((round - 1) % self.epoch);
        let denom = 1.0 - self.probability * k;
        if denom <= self.probability {
            1.0
        } else {
            (self.probability / denom).min(1.0)
        }
    }
}

/// One uniform draw per sensor per round, alive or not, so protocols that
/// kill nodes at different times still see the same election stream.
pub fn elect_cluster_heads(
    net: &Network,
    round: u32,
    rotation: &mut ChRotation,
    rng: &mut impl Rng,
) -> BTreeSet<NodeId> {
    if rotation.epoch > 0 && (round - 1).is_multiple_of(rotation.epoch) {
        rotation.served.iter_mut().for_each(|s| *s = false);
    }
    let threshold = rotation.threshold(round);
    let mut heads = BTreeSet::new();
    for node in net.sensors() {
        let u: f64 = rng.random();
        let i = node.id.index();
        if node.alive && !rotation.served[i] && u < threshold {
            rotation.served[i] = true;
            heads.insert(node.id);
        }
    }
    heads
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub generated: u64,
    pub delivered_normal: u64,
    pub delivered_critical: u64,
    pub delivered_on_demand: u64,
    pub lost: u64,
}

impl Counts {
    pub fn delivered(&self) -> u64 {
        self.delivered_normal + self.delivered_critical + self.delivered_on_demand
    }

    fn add(&mut self, other: &Counts) {
        self.generated += other.generated;
        self.delivered_normal += other.delivered_normal;
        self.delivered_critical += other.delivered_critical;
        self.delivered_on_demand += other.delivered_on_demand;
        self.lost += other.lost;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundMetrics {
    pub round: u32,
    pub dead_count: usize,
    pub this_round: Counts,
    pub cumulative: Counts,
    pub total_residual_energy: f64,
    pub ch_count: usize,
    pub hotspot_events: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSummary {
    pub rounds_run: u32,
    /// Stability period: the round in which the first sensor died.
    pub first_death_round: Option<u32>,
    /// Round in which the last sensor died, if they all did.
    pub last_death_round: Option<u32>,
    pub totals: Counts,
    pub lost_by_reason: BTreeMap<LossReason, u64>,
    pub initial_energy: f64,
    pub final_residual_energy: f64,
    pub total_debits: f64,
    pub peak_temperature: f64,
    pub max_children: usize,
    pub hello_floods: u32,
    pub joins: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub config: ScenarioConfig,
    pub metrics: Vec<RoundMetrics>,
    pub summary: ScenarioSummary,
}

pub struct Simulation {
    config: ScenarioConfig,
    net: Network,
    thermal: ThermalState,
    table: RouteTable,
    mobility: MobilityModel,
    traffic_rng: ChaCha8Rng,
    ch_rng: ChaCha8Rng,
    rotation: ChRotation,
    cluster_heads: BTreeSet<NodeId>,
    schedule: TdmaSchedule,
    round: u32,
    next_packet: u64,
    cumulative: Counts,
    initial_energy: f64,
    first_death: Option<u32>,
    last_death: Option<u32>,
    lost_by_reason: BTreeMap<LossReason, u64>,
    max_children: usize,
    hello_floods: u32,
    joins: u32,
}

impl Simulation {
    pub fn new(config: ScenarioConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let seed = config.seed;
        let nodes = model::place_nodes(&config, &mut model::stream_rng(seed, Stream::Placement))?;
        let mobility = MobilityModel::new(&nodes, &config, &mut model::stream_rng(seed, Stream::Mobility));
        let net = Network::new(nodes, &config);
        Ok(Self::with_network(config, net, mobility))
    }

    /// Start from a hand-built network (node 0 must be the sink).
    pub fn with_network(config: ScenarioConfig, net: Network, mobility: MobilityModel) -> Self {
        let seed = config.seed;
        let n = net.len();
        Self {
            thermal: ThermalState::new(n, ThermalParams::from(&config)),
            table: RouteTable::empty(n),
            mobility,
            traffic_rng: model::stream_rng(seed, Stream::Traffic),
            ch_rng: model::stream_rng(seed, Stream::ClusterHead),
            rotation: ChRotation::new(n, if config.ch_enabled { config.ch_probability } else { 0.0 }),
            cluster_heads: BTreeSet::new(),
            schedule: build_tdma(0, []),
            round: 0,
            next_packet: 0,
            cumulative: Counts::default(),
            initial_energy: net.residual_energy(),
            first_death: None,
            last_death: None,
            lost_by_reason: BTreeMap::new(),
            max_children: 0,
            hello_floods: 0,
            joins: 0,
            net,
            config,
        }
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn thermal(&self) -> &ThermalState {
        &self.thermal
    }

    pub fn route_table(&self) -> &RouteTable {
        &self.table
    }

    pub fn cluster_heads(&self) -> &BTreeSet<NodeId> {
        &self.cluster_heads
    }

    pub fn schedule(&self) -> &TdmaSchedule {
        &self.schedule
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn is_finished(&self) -> bool {
        self.round >= self.config.rounds
    }

    /// Events of the most recent round, in order.
    pub fn events(&self) -> &[Event] {
        self.net.events()
    }

    pub fn set_record_events(&mut self, on: bool) {
        self.net.set_record_events(on);
    }

    /// Advance one round.
    pub fn step(&mut self) -> RoundMetrics {
        self.round += 1;
        self.run_round(self.round)
    }

    fn all_dead(&self) -> bool {
        self.net.sensors().all(|n| !n.alive)
    }

    pub fn run_round(&mut self, round: u32) -> RoundMetrics {
        self.net.clear_events();
        let mut counts = Counts::default();
        let mut hotspot_events = 0;

        if !self.all_dead() {
            self.maintain_topology(round);

            self.cluster_heads = elect_cluster_heads(&self.net, round, &mut self.rotation, &mut self.ch_rng);

            let alive: Vec<NodeId> = self.net.sensors().filter(|n| n.alive).map(|n| n.id).collect();
            self.schedule = build_tdma(round, alive);

            let (urgent, normal) = self.generate_traffic(round);
            counts.generated = (urgent.len() + normal.len()) as u64;
            for packet in urgent.into_iter().chain(normal) {
                let (outcome, returns) = self.deliver(packet);
                hotspot_events += returns;
                match outcome {
                    (DeliveryOutcome::Delivered, PacketKind::Normal) => counts.delivered_normal += 1,
                    (DeliveryOutcome::Delivered, PacketKind::Critical) => counts.delivered_critical += 1,
                    (DeliveryOutcome::Delivered, PacketKind::OnDemand) => counts.delivered_on_demand += 1,
                    (DeliveryOutcome::Lost(reason), _) => {
                        counts.lost += 1;
                        *self.lost_by_reason.entry(reason).or_default() += 1;
                    }
                }
            }
        } else {
            self.cluster_heads.clear();
            self.schedule = build_tdma(round, []);
        }

        self.thermal.cool_all();
        self.record_deaths(round);
        self.max_children = self.max_children.max(self.net.max_children());
        self.cumulative.add(&counts);
        RoundMetrics {
            round,
            dead_count: self.net.dead_count(),
            this_round: counts,
            cumulative: self.cumulative,
            total_residual_energy: self.net.residual_energy(),
            ch_count: self.cluster_heads.len(),
            hotspot_events,
        }
    }

    fn record_deaths(&mut self, round: u32) {
        if !self.net.take_deaths().is_empty() {
            self.first_death.get_or_insert(round);
            if self.all_dead() {
                self.last_death = Some(round);
            }
        }
    }

    fn flood(&mut self) {
        self.table = routing::hello_flood(&mut self.net, self.config.hello_bits);
        self.hello_floods += 1;
        let cap = self.config.protocol.mobility_support().then_some(self.config.child_cap);
        let cfg = &self.config;
        routing::assign_parents(&mut self.net, &self.table, cap, |c| cfg.payload_bits(c));
    }

    /// Mobility moves every body, whatever the protocol. M-ATTEMPT repairs
    /// broken parent links locally with join requests; the other protocols
    /// re-flood hellos whenever an established link breaks.
    fn maintain_topology(&mut self, round: u32) {
        let broken = mobility::step_positions(&mut self.net, &self.mobility, round);
        for b in &broken {
            self.net.log(Event::LinkBroken {
                child: b.child,
                parent: b.parent,
            });
        }
        if round == 1 || self.hello_floods == 0 {
            self.flood();
            return;
        }
        if !self.config.protocol.mobility_support() {
            if !broken.is_empty() {
                self.flood();
            }
            return;
        }
        let mut rejoin: BTreeSet<NodeId> = broken.iter().map(|b| b.child).collect();
        rejoin.extend(self.net.sensors().filter(|n| n.alive && n.parent.is_none()).map(|n| n.id));
        for child in rejoin {
            if !self.net.is_alive(child) {
                continue;
            }
            let outcome = mobility::join_request(
                child,
                &mut self.net,
                &mut self.table,
                self.config.child_cap,
                self.config.hello_bits,
            );
            if let JoinOutcome::Joined(_) = outcome {
                self.joins += 1;
            }
        }
    }

    fn generate_traffic(&mut self, round: u32) -> (Vec<Packet>, Vec<Packet>) {
        let urgent_enabled = self.config.protocol.has_urgent_traffic();
        let mut urgent = Vec::new();
        for id in 1..self.net.len() {
            let id = NodeId(id);
            let critical: f64 = self.traffic_rng.random();
            let polled: f64 = self.traffic_rng.random();
            if !urgent_enabled || !self.net.is_alive(id) {
                continue;
            }
            if critical < self.config.p_critical {
                urgent.push(self.new_packet(PacketKind::Critical, id, round));
            }
            if polled < self.config.p_on_demand {
                urgent.push(self.new_packet(PacketKind::OnDemand, id, round));
            }
        }
        let slots = self.schedule.slots.clone();
        let normal = slots
            .into_iter()
            .map(|id| self.new_packet(PacketKind::Normal, id, round))
            .collect();
        (urgent, normal)
    }

    fn new_packet(&mut self, kind: PacketKind, source: NodeId, round: u32) -> Packet {
        let id = self.next_packet;
        self.next_packet += 1;
        let size = self.config.payload_bits(self.net.node(source).class);
        self.net.log(Event::Generated { packet: id, kind, source });
        Packet::new(id, kind, size, source, round)
    }

    fn deliver(&mut self, mut packet: Packet) -> ((DeliveryOutcome, PacketKind), u32) {
        let kind = packet.kind;
        let ctx = RoutingContext {
            table: &self.table,
            cluster_heads: &self.cluster_heads,
            protocol: self.config.protocol,
        };
        let (outcome, returns) = match routing::dispatch(&packet, &self.net, &self.thermal, &ctx) {
            Err(_) => (DeliveryOutcome::Lost(LossReason::SourceDead), 0),
            Ok(plan) => {
                let report = routing::execute_plan(plan, &mut packet, &mut self.net, &mut self.thermal, &ctx);
                (report.outcome, report.returns)
            }
        };
        let event = match outcome {
            DeliveryOutcome::Delivered => Event::Delivered {
                packet: packet.id,
                kind,
                hop_trace: packet.hop_trace,
            },
            DeliveryOutcome::Lost(reason) => Event::Lost {
                packet: packet.id,
                kind,
                reason,
                hop_trace: packet.hop_trace,
            },
        };
        self.net.log(event);
        ((outcome, kind), returns)
    }

    pub fn summary(&self) -> ScenarioSummary {
        ScenarioSummary {
            rounds_run: self.round,
            first_death_round: self.first_death,
            last_death_round: self.last_death,
            totals: self.cumulative,
            lost_by_reason: self.lost_by_reason.clone(),
            initial_energy: self.initial_energy,
            final_residual_energy: self.net.residual_energy(),
            total_debits: self.net.ledger().total(),
            peak_temperature: self.thermal.peak(),
            max_children: self.max_children,
            hello_floods: self.hello_floods,
            joins: self.joins,
        }
    }
}

/// Run every round of `config` and collect the metric stream.
pub fn run_scenario(config: ScenarioConfig) -> Result<ScenarioResult, ConfigError> {
    let mut sim = Simulation::new(config.clone())?;
    sim.set_record_events(false);
    let mut metrics = Vec::with_capacity(config.rounds as usize);
    while !sim.is_finished() {
        metrics.push(sim.step());
    }
    Ok(ScenarioResult {
        summary: sim.summary(),
        config,
        metrics,
    })
}

/// Median of first-death rounds; runs where nobody died count as outliving
/// every run that had a death.
pub fn median_first_death(summaries: &[ScenarioSummary]) -> Option<f64> {
    let mut v: Vec<f64> = summaries
        .iter()
        .map(|s| s.first_death_round.map_or(f64::INFINITY, f64::from))
        .collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    let med = if v.len() % 2 == 1 { v[m] } else { (v[m - 1] + v[m]) / 2.0 };
    Some(med)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ScenarioConfig;
    use rand::SeedableRng;

    #[test]
    fn tdma_examples() {
        assert_eq!(build_tdma(1, [NodeId(3), NodeId(1), NodeId(2)]).slots, vec![NodeId(1), NodeId(2), NodeId(3)]);
        assert!(build_tdma(1, []).slots.is_empty());
        assert_eq!(build_tdma(1, [NodeId(7)]).slots, vec![NodeId(7)]);
    }

    fn net() -> Network {
        let cfg = ScenarioConfig::paper_simulation(3);
        let nodes = model::place_nodes(&cfg, &mut model::stream_rng(3, Stream::Placement)).unwrap();
        Network::new(nodes, &cfg)
    }

    #[test]
    fn ch_probability_extremes() {
        let net = net();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut none = ChRotation::new(net.len(), 0.0);
        let mut all = ChRotation::new(net.len(), 1.0);
        for round in 1..=50 {
            assert!(elect_cluster_heads(&net, round, &mut none, &mut rng).is_empty());
            assert_eq!(elect_cluster_heads(&net, round, &mut all, &mut rng).len(), 9);
        }
    }

    #[test]
    fn ch_long_run_mean() {
        // Every sensor serves exactly once per 10-round epoch, so the mean
        // over whole epochs is 9 × 0.1.
        let net = net();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut rot = ChRotation::new(net.len(), 0.1);
        let total: usize = (1..=5000).map(|r| elect_cluster_heads(&net, r, &mut rot, &mut rng).len()).sum();
        let mean = total as f64 / 5000.0;
        assert!((0.9..=1.0).contains(&mean), "{mean}");

        // Monte-Carlo tally of the plain threshold scheme, written out directly.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut tally = 0usize;
        for _epoch in 0..500 {
            let mut served = [false; 9];
            for k in 0..10 {
                let t: f64 = if k == 9 { 1.0 } else { 0.1 / (1.0 - 0.1 * k as f64) };
                for s in served.iter_mut() {
                    if !*s && rng.random::<f64>() < t {
                        *s = true;
                        tally += 1;
                    }
                }
            }
        }
        let mc = tally as f64 / 5000.0;
        assert!((mean - mc).abs() < 0.05, "{mean} vs {mc}");
    }

    #[test]
    fn zero_rounds_is_empty() {
        let mut cfg = ScenarioConfig::paper_simulation(1);
        cfg.rounds = 0;
        let r = run_scenario(cfg).unwrap();
        assert!(r.metrics.is_empty());
        assert_eq!(r.summary.first_death_round, None);
    }

    #[test]
    fn first_round_floods_once_and_schedules_everyone() {
        let mut sim = Simulation::new(ScenarioConfig::paper_simulation(5)).unwrap();
        sim.step();
        let floods = sim.events().iter().filter(|e| matches!(e, Event::HelloFlood)).count();
        assert_eq!(floods, 1);
        assert_eq!(sim.schedule().slots, (1..10).map(NodeId).collect::<Vec<_>>());
    }

    #[test]
    fn dead_network_emits_zero_rounds() {
        let mut sim = Simulation::new(ScenarioConfig::paper_simulation(5)).unwrap();
        for n in sim.net.nodes.iter_mut().skip(1) {
            n.energy = 0.0;
            n.alive = false;
        }
        let m = sim.step();
        assert_eq!(m.this_round.delivered(), 0);
        assert_eq!(m.this_round.generated, 0);
        assert_eq!(m.dead_count, 9);
    }

    #[test]
    fn median_treats_survivors_as_longest() {
        let s = |r: Option<u32>| ScenarioSummary {
            rounds_run: 10,
            first_death_round: r,
            last_death_round: None,
            totals: Counts::default(),
            lost_by_reason: BTreeMap::new(),
            initial_energy: 0.0,
            final_residual_energy: 0.0,
            total_debits: 0.0,
            peak_temperature: 0.0,
            max_children: 0,
            hello_floods: 0,
            joins: 0,
        };
        assert_eq!(median_first_death(&[s(Some(3)), s(None), s(Some(5))]), Some(5.0));
        assert_eq!(median_first_death(&[s(Some(3)), s(Some(5))]), Some(4.0));
        assert_eq!(median_first_death(&[]), None);
    }
}
