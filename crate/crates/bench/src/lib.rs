//! Shared fixtures for the benchmarks.

use ggredux_core::synth::{random_connected_graph, SynthConfig};
use ggredux_core::LabeledGraph;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `count` connected graphs with exactly `nodes` nodes.
pub fn graphs_of_size(seed: u64, count: usize, nodes: usize) -> Vec<LabeledGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = SynthConfig::default();
    (0..count).map(|i| random_connected_graph(&mut rng, i.to_string(), nodes, &cfg)).collect()
}

/// Molecule-like graphs: 10 to 30 nodes, sparse.
pub fn molecule_like(seed: u64, count: usize) -> Vec<LabeledGraph> {
    let cfg = SynthConfig {
        min_nodes: 10,
        max_nodes: 30,
        extra_edge_prob: 0.03,
        ..SynthConfig::default()
    };
    ggredux_core::synth::corpus(seed, count, &cfg)
}
