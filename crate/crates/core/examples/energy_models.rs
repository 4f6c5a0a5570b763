//! Single-hop vs multi-hop cost under the first-order radio model.
//!
//!     cargo run --example energy_models

use wbasn_sim::energy::{multi_hop_breakdown, multi_hop_energy, path_energy, single_hop_energy};
use wbasn_sim::RadioParams;

fn main() -> Result<(), wbasn_sim::EnergyError> {
    let radio = RadioParams::default();
    let bits = 4000.0;

    println!("{bits} bits, e_elec {} J/bit, e_amp {} J/bit/m^2", radio.e_elec, radio.e_amp);
    println!("{:>8} {:>14} {:>14} {:>14}", "dist m", "1 hop", "2 hops", "4 hops");
    for total in [1.0, 2.0, 5.0, 10.0, 20.0, 50.0] {
        // same end-to-end distance split into equal hops
        let one = single_hop_energy(bits, total, &radio)?;
        let two = multi_hop_energy(2, bits, total / 2.0, &radio)?;
        let four = multi_hop_energy(4, bits, total / 4.0, &radio)?;
        println!("{total:>8.1} {one:>14.6e} {two:>14.6e} {four:>14.6e}");
    }

    let b = multi_hop_breakdown(3, bits, 2.0, &radio)?;
    println!("\n3 hops of 2 m: transmit {:.4e} J + receive {:.4e} J = {:.4e} J", b.transmit, b.receive, b.total);

    let uneven = path_energy(4000, &[0.8, 1.9, 2.6], &radio);
    println!("hops of 0.8/1.9/2.6 m: {:.4e} J", uneven.total);

    // break-even: multi-hop pays an extra receive per relay, so it only wins
    // once the amplifier term dominates
    let crossover = (0..200)
        .map(|i| f64::from(i) * 0.5)
        .find(|&d| multi_hop_energy(2, bits, d / 2.0, &radio).unwrap() < single_hop_energy(bits, d, &radio).unwrap());
    match crossover {
        Some(d) => println!("two hops beat one from about {d} m"),
        None => println!("one hop is always cheaper below 100 m"),
    }
    Ok(())
}
