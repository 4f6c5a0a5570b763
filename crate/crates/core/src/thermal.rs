//! Node temperature bookkeeping and directed hot-spot links.
//!
//! Temperature is a dimensionless counter: every packet a node handles adds
//! a fixed delta, and every round cools it by a fixed amount. A receiver at
//! or above the threshold returns the packet, and the sender marks that
//! directed link as a hot-spot for a number of rounds.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::model::{NodeId, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalParams {
    pub threshold: f64,
    pub delta_per_packet: f64,
    pub cooling_per_round: f64,
    pub hotspot_cooldown: u32,
}

impl Default for ThermalParams {
    fn default() -> Self {
        Self {
            threshold: 1.0,
            delta_per_packet: 0.1,
            cooling_per_round: 0.05,
            hotspot_cooldown: 5,
        }
    }
}

impl From<&ScenarioConfig> for ThermalParams {
    fn from(c: &ScenarioConfig) -> Self {
        Self {
            threshold: c.temp_threshold,
            delta_per_packet: c.temp_delta_per_packet,
            cooling_per_round: c.cooling_per_round,
            hotspot_cooldown: c.hotspot_cooldown,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatEvent {
    Transmit,
    Receive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForwardOutcome {
    Accepted,
    Returned,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("link {from} -> {to} is marked as a hot-spot")]
pub struct MarkedLink {
    pub from: NodeId,
    pub to: NodeId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalState {
    params: ThermalParams,
    temperature: Vec<f64>,
    hotspots: BTreeMap<(NodeId, NodeId), u32>,
    peak: f64,
}

impl ThermalState {
    pub fn new(node_count: usize, params: ThermalParams) -> Self {
        Self {
            params,
            temperature: vec![0.0; node_count],
            hotspots: BTreeMap::new(),
            peak: 0.0,
        }
    }

    pub fn params(&self) -> &ThermalParams {
        &self.params
    }

    pub fn temperature(&self, node: NodeId) -> f64 {
        self.temperature[node.index()]
    }

    pub fn temperatures(&self) -> &[f64] {
        &self.temperature
    }

    pub fn set_temperature(&mut self, node: NodeId, value: f64) {
        self.temperature[node.index()] = value.max(0.0);
        self.peak = self.peak.max(value);
    }

    /// Highest temperature any sensor has reached so far.
    pub fn peak(&self) -> f64 {
        self.peak
    }

    /// The sink is a body-worn base station and never heats up.
    pub fn is_hot(&self, node: NodeId) -> bool {
        !node.is_sink() && self.temperature(node) >= self.params.threshold
    }

    pub fn accrue(&mut self, node: NodeId, _event: HeatEvent) -> f64 {
        if node.is_sink() {
            return 0.0;
        }
        let t = &mut self.temperature[node.index()];
        *t += self.params.delta_per_packet;
        self.peak = self.peak.max(*t);
        *t
    }

    pub fn is_marked(&self, from: NodeId, to: NodeId) -> bool {
        self.hotspots.contains_key(&(from, to))
    }

    pub fn cooldown(&self, from: NodeId, to: NodeId) -> Option<u32> {
        self.hotspots.get(&(from, to)).copied()
    }

    pub fn hotspot_links(&self) -> impl Iterator<Item = ((NodeId, NodeId), u32)> + '_ {
        self.hotspots.iter().map(|(&k, &v)| (k, v))
    }

    /// Hand a packet from `sender` to `receiver`. A hot receiver returns it
    /// and the directed link is marked; otherwise the receiver heats up.
    pub fn try_forward(&mut self, sender: NodeId, receiver: NodeId) -> Result<ForwardOutcome, MarkedLink> {
        if self.is_marked(sender, receiver) {
            return Err(MarkedLink {
                from: sender,
                to: receiver,
            });
        }
        if self.is_hot(receiver) {
            self.hotspots
                .insert((sender, receiver), self.params.hotspot_cooldown);
            return Ok(ForwardOutcome::Returned);
        }
        self.accrue(receiver, HeatEvent::Receive);
        Ok(ForwardOutcome::Accepted)
    }

    /// Once per round, after data transmission.
    pub fn cool_all(&mut self) {
        let c = self.params.cooling_per_round;
        for t in &mut self.temperature {
            *t = (*t - c).max(0.0);
        }
        self.hotspots.retain(|_, left| {
            *left -= 1;
            *left > 0
        });
    }
}
