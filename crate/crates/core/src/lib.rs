//! Round-based simulator for heterogeneous wireless body area sensor
//! networks comparing plain multi-hop routing, ATTEMPT and M-ATTEMPT.
//!
//! The [`engine::Simulation`] drives one seeded scenario round by round;
//! [`engine::run_scenario`] runs it to completion. See the `examples/`
//! directory of this crate for one runnable program per capability.

pub mod cli;
pub mod energy;
pub mod engine;
pub mod error;
pub mod io;
pub mod mobility;
pub mod model;
pub mod network;
pub mod routing;
pub mod thermal;

pub use engine::{run_scenario, RoundMetrics, ScenarioResult, ScenarioSummary, Simulation};
pub use error::{ConfigError, EnergyError, Error};
pub use model::{make_scenario, NodeId, Protocol, RadioParams, ScenarioConfig};
