use std::collections::BTreeSet;

use wbasn_sim::engine::{run_scenario, Simulation};
use wbasn_sim::model::{NodeId, PacketKind, Protocol, ScenarioConfig};
use wbasn_sim::network::{Event, LossReason};

fn config(protocol: Protocol, seed: u64, rounds: u32) -> ScenarioConfig {
    let mut c = ScenarioConfig::paper_simulation(seed);
    c.protocol = protocol;
    c.rounds = rounds;
    c
}

#[test]
fn energy_is_conserved_every_round() {
    for protocol in Protocol::ALL {
        let mut sim = Simulation::new(config(protocol, 3, 5000)).unwrap();
        let initial = sim.network().residual_energy();
        while !sim.is_finished() {
            let m = sim.step();
            let debits = sim.network().ledger().total();
            assert!(
                (initial - m.total_residual_energy - debits).abs() < 1e-9,
                "{protocol} round {}",
                m.round
            );
        }
    }
}

#[test]
fn identical_configs_give_identical_streams() {
    for protocol in Protocol::ALL {
        let a = run_scenario(config(protocol, 5, 800)).unwrap();
        let b = run_scenario(config(protocol, 5, 800)).unwrap();
        assert_eq!(a, b);
    }
    let a = run_scenario(config(Protocol::MAttempt, 5, 800)).unwrap();
    let b = run_scenario(config(Protocol::MAttempt, 6, 800)).unwrap();
    assert_ne!(a.metrics, b.metrics);
}

#[test]
fn urgent_traffic_settles_before_normal_traffic() {
    for protocol in [Protocol::Attempt, Protocol::MAttempt] {
        let mut sim = Simulation::new(config(protocol, 2, 600)).unwrap();
        let mut urgent_seen = 0;
        while !sim.is_finished() {
            sim.step();
            let mut normal_started = false;
            for e in sim.events() {
                let kind = match e {
                    Event::Delivered { kind, .. } | Event::Lost { kind, .. } => *kind,
                    _ => continue,
                };
                if kind == PacketKind::Normal {
                    normal_started = true;
                } else {
                    urgent_seen += 1;
                    assert!(!normal_started, "{protocol} round {}: urgent after normal", sim.round());
                }
            }
        }
        assert!(urgent_seen > 0);
    }
}

#[test]
fn dead_nodes_stay_silent() {
    for protocol in Protocol::ALL {
        let mut sim = Simulation::new(config(protocol, 4, 5000)).unwrap();
        let mut dead: BTreeSet<NodeId> = BTreeSet::new();
        let mut deaths = 0;
        while !sim.is_finished() {
            sim.step();
            for e in sim.events() {
                match e {
                    Event::Hop { from, to, .. } => {
                        assert!(!dead.contains(from) && !dead.contains(to), "{protocol}: dead node on a hop");
                    }
                    Event::Generated { source, .. } => assert!(!dead.contains(source)),
                    _ => {}
                }
            }
            for id in &sim.schedule().slots {
                assert!(!dead.contains(id));
            }
            let now: BTreeSet<NodeId> = sim.network().sensors().filter(|n| !n.alive).map(|n| n.id).collect();
            assert!(now.is_superset(&dead), "a node came back to life");
            deaths += sim.events().iter().filter(|e| matches!(e, Event::Died { .. })).count();
            dead = now;
        }
        assert_eq!(deaths, dead.len());
        assert!(!dead.is_empty(), "{protocol}: expected deaths in 5000 rounds");
    }
}

#[test]
fn metric_stream_is_consistent() {
    let r = run_scenario(config(Protocol::MAttempt, 1, 5000)).unwrap();
    assert_eq!(r.metrics.len(), 5000);
    let mut prev_dead = 0;
    for (i, m) in r.metrics.iter().enumerate() {
        assert_eq!(m.round as usize, i + 1);
        assert!(m.dead_count >= prev_dead);
        prev_dead = m.dead_count;
        let c = m.this_round;
        assert_eq!(c.generated, c.delivered() + c.lost);
    }
    let last = r.metrics.last().unwrap();
    assert_eq!(last.cumulative, r.summary.totals);
    let first = r.metrics.iter().find(|m| m.dead_count > 0).map(|m| m.round);
    assert_eq!(first, r.summary.first_death_round);
}

#[test]
fn multihop_has_no_urgent_traffic_or_refusals() {
    let r = run_scenario(config(Protocol::MultiHop, 1, 2000)).unwrap();
    assert_eq!(r.summary.totals.delivered_critical + r.summary.totals.delivered_on_demand, 0);
    assert!(r.metrics.iter().all(|m| m.hotspot_events == 0));
    assert!(!r.summary.lost_by_reason.contains_key(&LossReason::HotSpot));
}

#[test]
fn mattempt_repairs_locally_after_the_first_flood() {
    let r = run_scenario(config(Protocol::MAttempt, 1, 5000)).unwrap();
    assert_eq!(r.summary.hello_floods, 1);
    assert!(r.summary.joins > 0);
    let base = run_scenario(config(Protocol::Attempt, 1, 5000)).unwrap();
    assert!(base.summary.hello_floods > 1);
    assert_eq!(base.summary.joins, 0);
}

#[test]
fn cluster_heads_rotate_only_when_enabled() {
    let on = run_scenario(config(Protocol::MAttempt, 1, 200)).unwrap();
    assert!(on.metrics.iter().any(|m| m.ch_count > 0));
    let mut c = config(Protocol::MAttempt, 1, 200);
    c.ch_enabled = false;
    let off = run_scenario(c).unwrap();
    assert!(off.metrics.iter().all(|m| m.ch_count == 0));
}

#[test]
fn prototype_preset_runs_with_per_class_batteries() {
    for protocol in Protocol::ALL {
        let mut c = ScenarioConfig::prototype(1);
        c.protocol = protocol;
        c.rounds = 300;
        let mut sim = Simulation::new(c).unwrap();
        let initial: Vec<f64> = sim.network().sensors().map(|n| n.energy).collect();
        assert!(initial.contains(&10.0) && initial.contains(&1.0));
        while !sim.is_finished() {
            sim.step();
        }
        let s = sim.summary();
        assert!((s.initial_energy - s.final_residual_energy - s.total_debits).abs() < 1e-9);
        assert!(s.totals.delivered() > 0);
    }
}
