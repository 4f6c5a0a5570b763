use proptest::prelude::*;

use wbasn_sim::energy::{
    multi_hop_breakdown, multi_hop_energy, multi_hop_energy_by_summation, path_energy, single_hop_energy,
};
use wbasn_sim::RadioParams;

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

proptest! {
    #[test]
    fn closed_form_matches_summation(n in 1u32..200, b in 0.0f64..1e7, d in 0.0f64..50.0) {
        let r = RadioParams::default();
        let closed = multi_hop_energy(n, b, d, &r).unwrap();
        let summed = multi_hop_energy_by_summation(n, b, d, &r).unwrap();
        prop_assert!(rel(closed, summed) <= 1e-12, "{closed} vs {summed}");
    }

    #[test]
    fn one_hop_is_single_hop(b in 0.0f64..1e7, d in 0.0f64..50.0) {
        let r = RadioParams::default();
        prop_assert_eq!(multi_hop_energy(1, b, d, &r).unwrap(), single_hop_energy(b, d, &r).unwrap());
    }

    #[test]
    fn breakdown_counts_events(n in 1u32..100, b in 1u64..100_000, d in 0.0f64..20.0) {
        let r = RadioParams::default();
        let br = multi_hop_breakdown(n, b as f64, d, &r).unwrap();
        prop_assert!(rel(br.transmit, f64::from(n) * r.tx_cost(b, d)) <= 1e-12);
        prop_assert!(rel(br.receive, f64::from(n - 1) * r.rx_cost(b)) <= 1e-12);
        prop_assert_eq!(br.total, br.transmit + br.receive);
    }

    #[test]
    fn equidistant_path_matches_closed_form(n in 1usize..50, b in 1u64..100_000, d in 0.0f64..20.0) {
        let r = RadioParams::default();
        let path = path_energy(b, &vec![d; n], &r);
        let closed = multi_hop_energy(n as u32, b as f64, d, &r).unwrap();
        prop_assert!(rel(path.total, closed) <= 1e-12);
    }

    #[test]
    fn more_hops_never_cheaper_at_equal_spacing(n in 1u32..100, b in 1.0f64..1e6, d in 0.0f64..20.0) {
        let r = RadioParams::default();
        prop_assert!(multi_hop_energy(n + 1, b, d, &r).unwrap() > multi_hop_energy(n, b, d, &r).unwrap());
    }

    #[test]
    fn negative_inputs_are_rejected(b in -1e6f64..-1e-9, d in 0.0f64..10.0) {
        let r = RadioParams::default();
        prop_assert!(single_hop_energy(b, d, &r).is_err());
        prop_assert!(multi_hop_energy(2, d, b, &r).is_err());
    }
}

#[test]
fn zero_hops_is_an_error() {
    assert!(multi_hop_energy(0, 100.0, 1.0, &RadioParams::default()).is_err());
}

// 4000 bits over an equidistant chain: hand-computed values.
#[test]
fn worked_examples() {
    let r = RadioParams::default();
    let two = multi_hop_energy(2, 4000.0, 2.0, &r).unwrap();
    // 2·2·4000·50e-9 + 2·4000·100e-12·4 − 4000·50e-9
    assert!(rel(two, 8.0e-4 + 3.2e-6 - 2.0e-4) < 1e-12);
    let split = path_energy(4000, &[1.0, 3.0], &r);
    assert!(rel(split.transmit, 4000.0 * (100e-9 + 100e-12 * 10.0)) < 1e-12);
    assert!(rel(split.receive, 2.0e-4) < 1e-12);
}
