use std::collections::BTreeSet;

use rand::distr::{Distribution, weighted::WeightedIndex};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Edge, LabeledGraph};
use crate::seeding::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkConfig {
    pub walks_per_sample: usize,
    pub restart_p: f64,
    /// Steps per walk.
    pub walk_len: usize,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            walks_per_sample: 150,
            restart_p: 0.15,
            walk_len: 30,
        }
    }
}

/// Picks a node with probability proportional to its degree.
pub fn select_start_node<R: Rng + ?Sized>(g: &LabeledGraph, rng: &mut R) -> Result<usize> {
    let degrees = g.degree_sequence();
    let dist = WeightedIndex::new(&degrees)
        .map_err(|_| Error::Sampling(format!("graph {} has no edges", g.id())))?;
    Ok(dist.sample(rng))
}

/// Edge indices traversed by `walks` random walks from `start`. Each step
/// moves to a uniform neighbor, then jumps back to `start` with
/// probability `restart_p`.
fn walk_edges<R: Rng + ?Sized>(
    g: &LabeledGraph,
    start: usize,
    cfg: &WalkConfig,
    rng: &mut R,
) -> BTreeSet<usize> {
    let mut used = BTreeSet::new();
    for _ in 0..cfg.walks_per_sample {
        let mut at = start;
        for _ in 0..cfg.walk_len {
            let nbrs = g.neighbors(at);
            if nbrs.is_empty() {
                break;
            }
            let (next, e) = nbrs[rng.random_range(0..nbrs.len())];
            used.insert(e);
            at = if rng.random_bool(cfg.restart_p) { start } else { next };
        }
    }
    used
}

/// Edge-induced subgraph over `edges`, nodes renumbered in ascending
/// original order. Also returns the original index of each new node.
fn edge_induced(g: &LabeledGraph, edges: &BTreeSet<usize>, id: String) -> (LabeledGraph, Vec<usize>) {
    let nodes: BTreeSet<usize> = edges
        .iter()
        .flat_map(|&e| [g.edges()[e].u, g.edges()[e].v])
        .collect();
    let mut index = vec![usize::MAX; g.node_count()];
    for (new, &old) in nodes.iter().enumerate() {
        index[old] = new;
    }
    let labels = nodes.iter().map(|&i| g.node_label(i).to_string()).collect();
    let edges = edges
        .iter()
        .map(|&e| {
            let e = &g.edges()[e];
            Edge::new(index[e.u], index[e.v], e.label.clone())
        })
        .collect();
    let graph = LabeledGraph::new(id, labels, edges).expect("edge subset of a valid graph");
    (graph, nodes.into_iter().collect())
}

fn sample_one(big: &LabeledGraph, cfg: &WalkConfig, seed: u64, i: usize) -> Result<(LabeledGraph, Vec<usize>)> {
    let mut rng = stream_rng(seed, i as u64);
    let start = select_start_node(big, &mut rng)?;
    let edges = walk_edges(big, start, cfg, &mut rng);
    Ok(edge_induced(big, &edges, i.to_string()))
}

/// `count` walk samples from `big`. Sample `i` uses its own generator
/// stream, so output is independent of thread scheduling. Sample ids are
/// `0..count`.
pub fn sample_subgraphs(
    big: &LabeledGraph,
    count: usize,
    cfg: &WalkConfig,
    seed: u64,
) -> Result<Vec<LabeledGraph>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    if big.edge_count() == 0 {
        return Err(Error::Sampling(format!("graph {} has no edges", big.id())));
    }
    if !(0.0..=1.0).contains(&cfg.restart_p) {
        return Err(Error::Sampling(format!("restart_p {} outside [0, 1]", cfg.restart_p)));
    }
    (0..count)
        .into_par_iter()
        .map(|i| sample_one(big, cfg, seed, i).map(|(g, _)| g))
        .collect()
}
