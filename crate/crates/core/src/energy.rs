//! First-order radio energy accounting.
//!
//! Transmitting `b` bits over `d` meters costs `b·(e_elec + e_amp·d²)`;
//! receiving costs `b·e_elec`. For an equidistant chain of `n` hops the
//! closed form is `2·n·b·e_elec + n·b·e_amp·d² − b·e_elec`, which
//! [`multi_hop_energy_by_summation`] reproduces event by event.

use crate::error::EnergyError;
use crate::model::RadioParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub transmit: f64,
    pub receive: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(transmit: f64, receive: f64) -> Self {
        Self {
            transmit,
            receive,
            total: transmit + receive,
        }
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<f64, EnergyError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(EnergyError::Negative { name, value })
    }
}

pub fn transmit_energy(bits: f64, distance: f64, radio: &RadioParams) -> Result<f64, EnergyError> {
    let b = non_negative("bits", bits)?;
    let d = non_negative("distance", distance)?;
    Ok(b * (radio.e_elec + radio.e_amp * d * d))
}

pub fn receive_energy(bits: f64, radio: &RadioParams) -> Result<f64, EnergyError> {
    Ok(non_negative("bits", bits)? * radio.e_elec)
}

/// Direct transmission to the sink: a single transmit event.
pub fn single_hop_energy(bits: f64, distance: f64, radio: &RadioParams) -> Result<f64, EnergyError> {
    transmit_energy(bits, distance, radio)
}

/// Closed form for `hops` equal-length hops of `distance` meters each.
pub fn multi_hop_energy(hops: u32, bits: f64, distance: f64, radio: &RadioParams) -> Result<f64, EnergyError> {
    if hops < 1 {
        return Err(EnergyError::ZeroHops(hops));
    }
    let b = non_negative("bits", bits)?;
    let d = non_negative("distance", distance)?;
    let n = f64::from(hops);
    if hops == 1 {
        // 2·b·e_elec − b·e_elec, kept exact so the one-hop case is the
        // single-hop cost bit for bit.
        return single_hop_energy(b, d, radio);
    }
    Ok(2.0 * n * b * radio.e_elec + n * b * radio.e_amp * d * d - b * radio.e_elec)
}

/// Sums `hops` transmit events and `hops − 1` relay receive events.
pub fn multi_hop_energy_by_summation(
    hops: u32,
    bits: f64,
    distance: f64,
    radio: &RadioParams,
) -> Result<f64, EnergyError> {
    Ok(multi_hop_breakdown(hops, bits, distance, radio)?.total)
}

pub fn multi_hop_breakdown(
    hops: u32,
    bits: f64,
    distance: f64,
    radio: &RadioParams,
) -> Result<EnergyBreakdown, EnergyError> {
    if hops < 1 {
        return Err(EnergyError::ZeroHops(hops));
    }
    let tx = transmit_energy(bits, distance, radio)?;
    let rx = receive_energy(bits, radio)?;
    let transmit: f64 = (0..hops).map(|_| tx).sum();
    let receive: f64 = (1..hops).map(|_| rx).sum();
    Ok(EnergyBreakdown::new(transmit, receive))
}

/// Heterogeneous-distance version of the summation: one transmit per hop
/// distance and one receive per relay (the sink's reception is not counted).
pub fn path_energy(bits: u64, hop_distances: &[f64], radio: &RadioParams) -> EnergyBreakdown {
    let transmit = hop_distances.iter().map(|&d| radio.tx_cost(bits, d)).sum();
    let relays = hop_distances.len().saturating_sub(1);
    let receive = (0..relays).map(|_| radio.rx_cost(bits)).sum();
    EnergyBreakdown::new(transmit, receive)
}
