//! Domain types shared by every other module: node identities and classes,
//! radio constants, packets, scenario configuration and presets, node
//! placement, and the seeded random sub-streams.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::ConfigError;

/// Index of a node within a scenario. Node 0 is always the sink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    pub const SINK: NodeId = NodeId(0);

    pub fn index(self) -> usize {
        self.0
    }

    pub fn is_sink(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_sink() {
            write!(f, "sink")
        } else {
            write!(f, "n{}", self.0)
        }
    }
}

/// Point on the body plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn clamp_to_square(self, side: f64) -> Point {
        Point::new(self.x.clamp(0.0, side), self.y.clamp(0.0, side))
    }
}

/// Sensor class. Higher data-rate classes sit closer to the sink and on less
/// mobile body sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeClass {
    Sink,
    Parent,
    FirstChild,
    SecondChild,
}

impl NodeClass {
    pub fn name(self) -> &'static str {
        match self {
            NodeClass::Sink => "sink",
            NodeClass::Parent => "parent",
            NodeClass::FirstChild => "first_child",
            NodeClass::SecondChild => "second_child",
        }
    }
}

/// Per-class physical parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassProfile {
    /// Joules, used when the energy mode is [`EnergyMode::PerClass`].
    pub initial_energy: f64,
    pub payload_bits: u64,
    /// Peak limb displacement in meters.
    pub mobility_amplitude: f64,
    /// Radio range for ordinary multi-hop traffic, in meters.
    pub normal_range: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassTable {
    pub parent: ClassProfile,
    pub first_child: ClassProfile,
    pub second_child: ClassProfile,
}

impl ClassTable {
    pub fn profile(&self, class: NodeClass) -> Option<&ClassProfile> {
        match class {
            NodeClass::Sink => None,
            NodeClass::Parent => Some(&self.parent),
            NodeClass::FirstChild => Some(&self.first_child),
            NodeClass::SecondChild => Some(&self.second_child),
        }
    }

    /// Prototype body: 10 J / 10 KB parents, 5 J / 1 KB first-level
    /// children, 1 J / 50 B second-level children.
    pub fn prototype() -> Self {
        Self {
            parent: ClassProfile {
                initial_energy: 10.0,
                payload_bits: 80_000,
                mobility_amplitude: 0.0,
                normal_range: 3.5,
            },
            first_child: ClassProfile {
                initial_energy: 5.0,
                payload_bits: 8_000,
                mobility_amplitude: 0.5,
                normal_range: 2.5,
            },
            second_child: ClassProfile {
                initial_energy: 1.0,
                payload_bits: 400,
                mobility_amplitude: 1.0,
                normal_range: 1.5,
            },
        }
    }
}

/// First-order radio model coefficients (free-space exponent 2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioParams {
    /// J/bit spent by transmit or receive electronics.
    pub e_elec: f64,
    /// J/bit/m² spent by the transmit amplifier.
    pub e_amp: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self {
            e_elec: 50e-9,
            e_amp: 100e-12,
        }
    }
}

impl RadioParams {
    pub fn tx_cost(&self, bits: u64, distance: f64) -> f64 {
        bits as f64 * (self.e_elec + self.e_amp * distance * distance)
    }

    pub fn rx_cost(&self, bits: u64) -> f64 {
        bits as f64 * self.e_elec
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PacketKind {
    Normal,
    Critical,
    OnDemand,
}

impl PacketKind {
    pub fn is_urgent(self) -> bool {
        !matches!(self, PacketKind::Normal)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub id: u64,
    pub kind: PacketKind,
    pub size_bits: u64,
    pub source: NodeId,
    pub created_round: u32,
    /// Every node that held the packet, in order, starting at the source.
    pub hop_trace: Vec<NodeId>,
}

impl Packet {
    pub fn new(id: u64, kind: PacketKind, size_bits: u64, source: NodeId, round: u32) -> Self {
        Self {
            id,
            kind,
            size_bits,
            source,
            created_round: round,
            hop_trace: vec![source],
        }
    }

    pub fn holder(&self) -> NodeId {
        *self.hop_trace.last().expect("hop trace starts with the source")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Protocol {
    MultiHop,
    Attempt,
    MAttempt,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::MultiHop, Protocol::Attempt, Protocol::MAttempt];

    pub fn key(self) -> &'static str {
        match self {
            Protocol::MultiHop => "multihop",
            Protocol::Attempt => "attempt",
            Protocol::MAttempt => "mattempt",
        }
    }

    /// Single-hop critical and on-demand traffic exists.
    pub fn has_urgent_traffic(self) -> bool {
        !matches!(self, Protocol::MultiHop)
    }

    pub fn thermal_aware(self) -> bool {
        !matches!(self, Protocol::MultiHop)
    }

    /// Invitation-phase re-join and full-power escalation.
    pub fn mobility_support(self) -> bool {
        matches!(self, Protocol::MAttempt)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Protocol {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "multihop" | "multi-hop" => Ok(Protocol::MultiHop),
            "attempt" => Ok(Protocol::Attempt),
            "mattempt" | "m-attempt" => Ok(Protocol::MAttempt),
            other => Err(ConfigError::InvalidValue {
                key: "protocol".into(),
                value: other.into(),
                expected: "one of multihop, attempt, mattempt".into(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergyMode {
    Uniform(f64),
    PerClass,
}

pub const PRESETS: [&str; 2] = ["paper-simulation", "prototype"];

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub preset: String,
    pub area_side: f64,
    /// Including the sink.
    pub node_count: usize,
    pub rounds: u32,
    pub seed: u64,
    pub protocol: Protocol,
    pub radio: RadioParams,
    pub classes: ClassTable,
    /// Nodes nearest the sink that get the parent class; the next
    /// `first_child_count` become first-level children, the rest second-level.
    pub parent_count: usize,
    pub first_child_count: usize,
    pub full_power_range: f64,
    pub energy_mode: EnergyMode,
    pub ch_enabled: bool,
    pub ch_probability: f64,
    pub temp_threshold: f64,
    pub temp_delta_per_packet: f64,
    pub cooling_per_round: f64,
    pub hotspot_cooldown: u32,
    pub child_cap: usize,
    pub p_critical: f64,
    pub p_on_demand: f64,
    pub mobility_period: u32,
    pub hello_bits: u64,
}

impl ScenarioConfig {
    /// 5 m × 5 m, sink + 9 sensors, 5000 rounds, 0.5 J each.
    pub fn paper_simulation(seed: u64) -> Self {
        let mut classes = ClassTable::prototype();
        // Payloads scaled so a 0.5 J battery lasts a few thousand rounds.
        classes.parent.payload_bits = 2_000;
        classes.first_child.payload_bits = 1_000;
        classes.second_child.payload_bits = 500;
        Self {
            preset: "paper-simulation".into(),
            area_side: 5.0,
            node_count: 10,
            rounds: 5000,
            seed,
            protocol: Protocol::MAttempt,
            radio: RadioParams::default(),
            classes,
            parent_count: 3,
            first_child_count: 3,
            full_power_range: 10.0,
            energy_mode: EnergyMode::Uniform(0.5),
            ch_enabled: true,
            ch_probability: 0.10,
            temp_threshold: 1.0,
            temp_delta_per_packet: 0.1,
            cooling_per_round: 0.05,
            hotspot_cooldown: 5,
            child_cap: 3,
            p_critical: 0.05,
            p_on_demand: 0.01,
            mobility_period: 50,
            hello_bits: 200,
        }
    }

    /// Prototype body with 3 parents, 4 first-level and 3 second-level
    /// children around the sink, per-class batteries and payloads.
    pub fn prototype(seed: u64) -> Self {
        Self {
            preset: "prototype".into(),
            node_count: 11,
            classes: ClassTable::prototype(),
            parent_count: 3,
            first_child_count: 4,
            energy_mode: EnergyMode::PerClass,
            ch_enabled: false,
            ..Self::paper_simulation(seed)
        }
    }

    pub fn class_profile(&self, class: NodeClass) -> Option<&ClassProfile> {
        self.classes.profile(class)
    }

    pub fn initial_energy(&self, class: NodeClass) -> f64 {
        match (class, self.energy_mode) {
            (NodeClass::Sink, _) => f64::INFINITY,
            (_, EnergyMode::Uniform(e)) => e,
            (c, EnergyMode::PerClass) => self.classes.profile(c).map_or(0.0, |p| p.initial_energy),
        }
    }

    pub fn payload_bits(&self, class: NodeClass) -> u64 {
        self.classes.profile(class).map_or(0, |p| p.payload_bits)
    }

    /// Normal radio range; the sink listens everywhere.
    pub fn normal_range(&self, class: NodeClass) -> f64 {
        self.classes.profile(class).map_or(f64::INFINITY, |p| p.normal_range)
    }

    pub fn sink_position(&self) -> Point {
        Point::new(self.area_side / 2.0, self.area_side / 2.0)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn range(key: &str, ok: bool, expected: &str, value: impl fmt::Display) -> Result<(), ConfigError> {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::OutOfRange {
                    key: key.into(),
                    value: value.to_string(),
                    expected: expected.into(),
                })
            }
        }
        let pos = |v: f64| v.is_finite() && v > 0.0;
        let prob = |v: f64| (0.0..=1.0).contains(&v);
        range("node_count", self.node_count >= 2, ">= 2", self.node_count)?;
        range("area_side", pos(self.area_side), "> 0", self.area_side)?;
        range("e_elec", pos(self.radio.e_elec), "> 0", self.radio.e_elec)?;
        range("e_amp", pos(self.radio.e_amp), "> 0", self.radio.e_amp)?;
        range("full_power_range", pos(self.full_power_range), "> 0", self.full_power_range)?;
        range("ch_probability", prob(self.ch_probability), "[0, 1]", self.ch_probability)?;
        range("p_critical", prob(self.p_critical), "[0, 1]", self.p_critical)?;
        range("p_on_demand", prob(self.p_on_demand), "[0, 1]", self.p_on_demand)?;
        range("temp_threshold", pos(self.temp_threshold), "> 0", self.temp_threshold)?;
        range(
            "temp_delta_per_packet",
            pos(self.temp_delta_per_packet),
            "> 0",
            self.temp_delta_per_packet,
        )?;
        range(
            "cooling_per_round",
            self.cooling_per_round.is_finite() && self.cooling_per_round >= 0.0,
            ">= 0",
            self.cooling_per_round,
        )?;
        range("hotspot_cooldown", self.hotspot_cooldown >= 1, ">= 1", self.hotspot_cooldown)?;
        range("child_cap", self.child_cap >= 1, ">= 1", self.child_cap)?;
        range("mobility_period", self.mobility_period >= 1, ">= 1", self.mobility_period)?;
        if let EnergyMode::Uniform(e) = self.energy_mode {
            range("initial_energy", pos(e), "> 0", e)?;
        }
        let sensors = self.node_count - 1;
        range(
            "parent_count",
            self.parent_count + self.first_child_count <= sensors,
            "parent_count + first_child_count <= node_count - 1",
            self.parent_count,
        )?;
        for (name, p) in [
            ("parent", &self.classes.parent),
            ("first_child", &self.classes.first_child),
            ("second_child", &self.classes.second_child),
        ] {
            if self.energy_mode == EnergyMode::PerClass {
                range(&format!("{name}_energy"), pos(p.initial_energy), "> 0", p.initial_energy)?;
            }
            range(&format!("{name}_payload"), p.payload_bits > 0, "> 0", p.payload_bits)?;
            range(&format!("{name}_range"), pos(p.normal_range), "> 0", p.normal_range)?;
            range(
                &format!("{name}_amplitude"),
                p.mobility_amplitude.is_finite() && p.mobility_amplitude >= 0.0,
                ">= 0",
                p.mobility_amplitude,
            )?;
        }
        let amps = &self.classes;
        range(
            "first_child_amplitude",
            amps.parent.mobility_amplitude <= amps.first_child.mobility_amplitude
                && amps.first_child.mobility_amplitude <= amps.second_child.mobility_amplitude,
            "parent <= first_child <= second_child",
            amps.first_child.mobility_amplitude,
        )?;
        Ok(())
    }
}

pub fn make_scenario(preset: &str, seed: u64) -> Result<ScenarioConfig, ConfigError> {
    match preset {
        "paper-simulation" => Ok(ScenarioConfig::paper_simulation(seed)),
        "prototype" => Ok(ScenarioConfig::prototype(seed)),
        other => Err(ConfigError::UnknownPreset {
            name: other.into(),
            valid: PRESETS.join(", "),
        }),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub class: NodeClass,
    pub base_position: Point,
    pub position: Point,
    pub energy: f64,
    pub temperature: f64,
    pub alive: bool,
    pub parent: Option<NodeId>,
    pub children: BTreeSet<NodeId>,
}

impl Node {
    pub fn new(id: NodeId, class: NodeClass, position: Point, energy: f64) -> Self {
        Self {
            id,
            class,
            base_position: position,
            position,
            energy,
            temperature: 0.0,
            alive: energy > 0.0,
            parent: None,
            children: BTreeSet::new(),
        }
    }

    pub fn is_sink(&self) -> bool {
        self.id.is_sink()
    }
}

/// Independent random sub-streams derived from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Placement = 1,
    Traffic = 2,
    Mobility = 3,
    ClusterHead = 4,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Sink at the center, sensors uniform over the square. Classes are handed
/// out by distance to the sink: nearest get the parent class.
pub fn place_nodes(config: &ScenarioConfig, rng: &mut impl Rng) -> Result<Vec<Node>, ConfigError> {
    if config.node_count < 2 {
        return Err(ConfigError::OutOfRange {
            key: "node_count".into(),
            value: config.node_count.to_string(),
            expected: ">= 2".into(),
        });
    }
    let side = config.area_side;
    let sink = config.sink_position();
    let positions: Vec<Point> = (1..config.node_count)
        .map(|_| Point::new(rng.random::<f64>() * side, rng.random::<f64>() * side))
        .collect();

    let mut order: Vec<usize> = (0..positions.len()).collect();
    order.sort_by(|&a, &b| {
        positions[a]
            .distance(sink)
            .total_cmp(&positions[b].distance(sink))
            .then(a.cmp(&b))
    });
    let mut classes = vec![NodeClass::SecondChild; positions.len()];
    for (rank, &i) in order.iter().enumerate() {
        classes[i] = if rank < config.parent_count {
            NodeClass::Parent
        } else if rank < config.parent_count + config.first_child_count {
            NodeClass::FirstChild
        } else {
            NodeClass::SecondChild
        };
    }

    let mut nodes = Vec::with_capacity(config.node_count);
    nodes.push(Node::new(NodeId::SINK, NodeClass::Sink, sink, f64::INFINITY));
    for (i, (pos, class)) in positions.into_iter().zip(classes).enumerate() {
        nodes.push(Node::new(NodeId(i + 1), class, pos, config.initial_energy(class)));
    }
    Ok(nodes)
}
