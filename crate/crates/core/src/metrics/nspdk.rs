use std::collections::HashMap;

use rayon::prelude::*;

use crate::canonical::canonical_label;
use crate::graph::LabeledGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NspdkConfig {
    /// Largest neighborhood radius.
    pub r_max: usize,
    /// Largest distance between the two roots.
    pub d_max: usize,
}

impl Default for NspdkConfig {
    fn default() -> Self {
        NspdkConfig { r_max: 2, d_max: 4 }
    }
}

/// `(radius, distance, smaller certificate, larger certificate)`.
type Feature = (usize, usize, String, String);

/// Sparse feature counts of one graph together with their squared norm.
#[derive(Debug, Clone, PartialEq)]
pub struct NspdkFeatures {
    counts: HashMap<Feature, f64>,
    norm_sq: f64,
}

impl NspdkFeatures {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Normalized kernel value in [0, 1].
    pub fn kernel(&self, other: &NspdkFeatures) -> f64 {
        let (small, large) = if self.counts.len() <= other.counts.len() {
            (self, other)
        } else {
            (other, self)
        };
        let dot: f64 = small
            .counts
            .iter()
            .filter_map(|(f, a)| large.counts.get(f).map(|b| a * b))
            .sum();
        dot / (self.norm_sq * other.norm_sq).sqrt()
    }
}

/// Certificate of the radius-`r` ball around `root`: the canonical label of
/// the induced subgraph with every node label suffixed by its distance from
/// the root.
fn ball_certificate(g: &LabeledGraph, dist: &[Option<usize>], r: usize) -> String {
    let nodes: Vec<usize> = (0..g.node_count()).filter(|&v| matches!(dist[v], Some(d) if d <= r)).collect();
    let sub = g.induced_subgraph(&nodes);
    let labels = nodes
        .iter()
        .map(|&v| format!("{}@{}", g.node_label(v), dist[v].unwrap_or(0)))
        .collect();
    let edge_labels = sub.edges().iter().map(|e| e.label.clone()).collect();
    let rooted = sub.relabeled(labels, edge_labels).expect("same structure");
    canonical_label(&rooted)
}

pub fn nspdk_features(g: &LabeledGraph, cfg: &NspdkConfig) -> NspdkFeatures {
    let n = g.node_count();
    let reach = cfg.r_max.max(cfg.d_max);
    let dists: Vec<Vec<Option<usize>>> = (0..n).map(|v| g.distances_from(v, Some(reach))).collect();
    let certs: Vec<Vec<String>> = (0..n)
        .map(|v| (0..=cfg.r_max).map(|r| ball_certificate(g, &dists[v], r)).collect())
        .collect();
    let mut counts: HashMap<Feature, f64> = HashMap::new();
    for u in 0..n {
        for v in u..n {
            let Some(d) = dists[u][v].filter(|&d| d <= cfg.d_max) else {
                continue;
            };
            for r in 0..=cfg.r_max {
                let (a, b) = (&certs[u][r], &certs[v][r]);
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                *counts.entry((r, d, lo.clone(), hi.clone())).or_insert(0.0) += 1.0;
            }
        }
    }
    if counts.is_empty() {
        // the graph without nodes still has unit self-similarity
        counts.insert((0, 0, String::new(), String::new()), 1.0);
    }
    let norm_sq = counts.values().map(|c| c * c).sum();
    NspdkFeatures { counts, norm_sq }
}

/// Features for many graphs, computed in parallel, in input order.
pub fn nspdk_features_all(graphs: &[LabeledGraph], cfg: &NspdkConfig) -> Vec<NspdkFeatures> {
    graphs.par_iter().map(|g| nspdk_features(g, cfg)).collect()
}

/// Normalized neighborhood subgraph pairwise distance kernel.
pub fn nspdk_kernel(a: &LabeledGraph, b: &LabeledGraph, cfg: &NspdkConfig) -> f64 {
    nspdk_features(a, cfg).kernel(&nspdk_features(b, cfg))
}
