//! Epoch-based cluster-head rotation: election threshold and head counts.
//!
//!     cargo run --example cluster_heads

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wbasn_sim::engine::{elect_cluster_heads, ChRotation};
use wbasn_sim::model::{place_nodes, stream_rng, ScenarioConfig, Stream};
use wbasn_sim::network::Network;

fn main() {
    let config = ScenarioConfig::paper_simulation(3);
    let nodes = place_nodes(&config, &mut stream_rng(config.seed, Stream::Placement)).unwrap();
    let net = Network::new(nodes, &config);

    let mut rotation = ChRotation::new(net.len(), config.ch_probability);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut per_epoch = Vec::new();
    let mut epoch_total = 0;
    for round in 1..=30u32 {
        let heads = elect_cluster_heads(&net, round, &mut rotation, &mut rng);
        let ids: Vec<String> = heads.iter().map(|h| h.to_string()).collect();
        println!("round {round:>2} threshold {:.3} heads [{}]", rotation.threshold(round), ids.join(" "));
        epoch_total += heads.len();
        if round % 10 == 0 {
            per_epoch.push(epoch_total);
            epoch_total = 0;
        }
    }
    println!("heads per 10-round epoch: {per_epoch:?} (each sensor at most once per epoch)");
}
