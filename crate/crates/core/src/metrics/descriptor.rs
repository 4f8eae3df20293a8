use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::orbits::orbit_counts;
use crate::error::{Error, Result};
use crate::graph::LabeledGraph;

/// Number of uniform bins on [0, 1] for clustering coefficients.
pub const CLUSTERING_BINS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DescriptorKind {
    Degree,
    Clustering,
    Orbit,
    NodeLabel,
    EdgeLabel,
    LabelDegree,
}

impl DescriptorKind {
    pub const ALL: [DescriptorKind; 6] = [
        DescriptorKind::Degree,
        DescriptorKind::Clustering,
        DescriptorKind::Orbit,
        DescriptorKind::NodeLabel,
        DescriptorKind::EdgeLabel,
        DescriptorKind::LabelDegree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DescriptorKind::Degree => "degree",
            DescriptorKind::Clustering => "clustering",
            DescriptorKind::Orbit => "orbit",
            DescriptorKind::NodeLabel => "node_label",
            DescriptorKind::EdgeLabel => "edge_label",
            DescriptorKind::LabelDegree => "label_degree",
        }
    }
}

impl fmt::Display for DescriptorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DescriptorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DescriptorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Metric(format!("unknown descriptor kind {s:?}")))
    }
}

/// Histogram support point.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bin {
    Index(usize),
    Label(String),
    LabelDegree(String, usize),
}

/// A normalized histogram. Graphs with nothing to count (no nodes, or no
/// edges for edge-based kinds) give an empty histogram with `empty` set.
#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor {
    pub kind: DescriptorKind,
    pub histogram: BTreeMap<Bin, f64>,
    pub empty: bool,
}

impl Descriptor {
    fn from_counts(kind: DescriptorKind, counts: BTreeMap<Bin, f64>) -> Self {
        let total: f64 = counts.values().sum();
        if total <= 0.0 {
            return Descriptor { kind, histogram: BTreeMap::new(), empty: true };
        }
        let histogram = counts
            .into_iter()
            .filter(|&(_, c)| c > 0.0)
            .map(|(b, c)| (b, c / total))
            .collect();
        Descriptor { kind, histogram, empty: false }
    }

    /// Total variation distance: half the L1 distance over the union of
    /// supports.
    pub fn total_variation(&self, other: &Descriptor) -> f64 {
        let mut l1 = 0.0;
        for (b, &p) in &self.histogram {
            l1 += (p - other.histogram.get(b).copied().unwrap_or(0.0)).abs();
        }
        for (b, &q) in &other.histogram {
            if !self.histogram.contains_key(b) {
                l1 += q;
            }
        }
        0.5 * l1
    }

    pub fn mass(&self) -> f64 {
        self.histogram.values().sum()
    }
}

/// Local clustering coefficient of every node; nodes of degree < 2 get 0.
pub fn clustering_coefficients(g: &LabeledGraph) -> Vec<f64> {
    (0..g.node_count())
        .map(|v| {
            let nbrs: Vec<usize> = g.neighbors(v).iter().map(|&(u, _)| u).collect();
            let k = nbrs.len();
            if k < 2 {
                return 0.0;
            }
            let mut links = 0usize;
            for (i, &a) in nbrs.iter().enumerate() {
                for &b in &nbrs[i + 1..] {
                    if g.edge_between(a, b).is_some() {
                        links += 1;
                    }
                }
            }
            2.0 * links as f64 / (k * (k - 1)) as f64
        })
        .collect()
}

pub fn descriptor(g: &LabeledGraph, kind: DescriptorKind) -> Descriptor {
    let mut counts: BTreeMap<Bin, f64> = BTreeMap::new();
    let mut add = |b: Bin, w: f64| *counts.entry(b).or_insert(0.0) += w;
    match kind {
        DescriptorKind::Degree => {
            for d in g.degree_sequence() {
                add(Bin::Index(d), 1.0);
            }
        }
        DescriptorKind::Clustering => {
            for c in clustering_coefficients(g) {
                let bin = ((c * CLUSTERING_BINS as f64) as usize).min(CLUSTERING_BINS - 1);
                add(Bin::Index(bin), 1.0);
            }
        }
        DescriptorKind::Orbit => {
            let per_node = orbit_counts(g);
            let n = per_node.len().max(1) as f64;
            for (orbit, total) in (0..super::ORBIT_COUNT)
                .map(|o| (o, per_node.iter().map(|c| c[o]).sum::<u64>()))
            {
                add(Bin::Index(orbit), total as f64 / n);
            }
        }
        DescriptorKind::NodeLabel => {
            for l in g.node_labels() {
                add(Bin::Label(l.clone()), 1.0);
            }
        }
        DescriptorKind::EdgeLabel => {
            for e in g.edges() {
                add(Bin::Label(e.label.clone()), 1.0);
            }
        }
        DescriptorKind::LabelDegree => {
            for (v, l) in g.node_labels().iter().enumerate() {
                add(Bin::LabelDegree(l.clone(), g.degree(v)), 1.0);
            }
        }
    }
    Descriptor::from_counts(kind, counts)
}
