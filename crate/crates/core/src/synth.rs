//! Seeded random labeled graphs for tests, benchmarks and smoke runs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Edge, LabeledGraph};

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub min_nodes: usize,
    pub max_nodes: usize,
    pub node_labels: Vec<String>,
    pub edge_labels: Vec<String>,
    /// Probability of each non-tree node pair becoming an edge.
    pub extra_edge_prob: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            min_nodes: 4,
            max_nodes: 8,
            node_labels: vec!["A".into(), "B".into(), "C".into()],
            edge_labels: vec!["a".into(), "b".into()],
            extra_edge_prob: 0.2,
        }
    }
}

/// Random spanning tree plus independent extra edges, with shuffled node
/// indices. Always connected.
pub fn random_connected_graph<R: Rng + ?Sized>(
    rng: &mut R,
    id: impl Into<String>,
    nodes: usize,
    cfg: &SynthConfig,
) -> LabeledGraph {
    let mut order: Vec<usize> = (0..nodes).collect();
    order.shuffle(rng);
    let labels: Vec<String> = (0..nodes)
        .map(|_| cfg.node_labels[rng.random_range(0..cfg.node_labels.len())].clone())
        .collect();
    let mut adjacent = vec![vec![false; nodes]; nodes];
    let mut edges = Vec::new();
    let edge_label = |rng: &mut R| cfg.edge_labels[rng.random_range(0..cfg.edge_labels.len())].clone();
    for i in 1..nodes {
        let j = rng.random_range(0..i);
        let (u, v) = (order[i], order[j]);
        adjacent[u][v] = true;
        adjacent[v][u] = true;
        edges.push(Edge::new(u, v, edge_label(rng)));
    }
    for u in 0..nodes {
        for v in u + 1..nodes {
            if !adjacent[u][v] && rng.random_bool(cfg.extra_edge_prob) {
                adjacent[u][v] = true;
                adjacent[v][u] = true;
                edges.push(Edge::new(u, v, edge_label(rng)));
            }
        }
    }
    edges.shuffle(rng);
    LabeledGraph::new(id, labels, edges).expect("generator emits valid graphs")
}

/// `count` graphs with sizes uniform in `[min_nodes, max_nodes]`, ids `0..count`.
pub fn corpus(seed: u64, count: usize, cfg: &SynthConfig) -> Vec<LabeledGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n = rng.random_range(cfg.min_nodes..=cfg.max_nodes);
            random_connected_graph(&mut rng, i.to_string(), n, cfg)
        })
        .collect()
}

/// Uniformly random node permutation of `g`, edges shuffled as well.
pub fn shuffle_nodes<R: Rng + ?Sized>(rng: &mut R, g: &LabeledGraph) -> LabeledGraph {
    let mut perm: Vec<usize> = (0..g.node_count()).collect();
    perm.shuffle(rng);
    let p = g.permuted(&perm);
    let mut edges = p.edges().to_vec();
    edges.shuffle(rng);
    let edges = edges
        .into_iter()
        .map(|e| if rng.random_bool(0.5) { Edge::new(e.v, e.u, e.label) } else { e })
        .collect();
    LabeledGraph::new(g.id(), p.node_labels().to_vec(), edges).expect("permutation is valid")
}
