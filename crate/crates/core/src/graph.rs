//! Labeled undirected graphs and the line-oriented transaction format.
//!
//! A transaction file holds many graphs:
//!
//! ```text
//! t # 0
//! v 0 X
//! v 1 Y
//! e 0 1 a
//! ```
//!
//! Node lines precede edge lines within a graph, node indices are 0-based
//! and declared in order, and labels are non-empty whitespace-free text.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub label: String,
}

impl Edge {
    pub fn new(u: usize, v: usize, label: impl Into<String>) -> Self {
        Edge {
            u,
            v,
            label: label.into(),
        }
    }

    /// The endpoint opposite to `node`.
    pub fn other(&self, node: usize) -> usize {
        if self.u == node {
            self.v
        } else {
            self.u
        }
    }
}

/// Undirected graph with one discrete label per node and per edge.
///
/// Immutable once built; every constructor enforces the absence of
/// self-loops and duplicate edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    id: String,
    labels: Vec<String>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl LabeledGraph {
    pub fn new(
        id: impl Into<String>,
        labels: Vec<String>,
        edges: Vec<Edge>,
    ) -> Result<Self> {
        let id = id.into();
        let invalid = |message: String| Error::Validation {
            graph: id.clone(),
            message,
        };
        if let Some(i) = labels.iter().position(|l| l.is_empty()) {
            return Err(invalid(format!("node {i} has an empty label")));
        }
        let mut adjacency = vec![Vec::new(); labels.len()];
        let mut seen = HashSet::with_capacity(edges.len());
        for (k, e) in edges.iter().enumerate() {
            if e.u >= labels.len() || e.v >= labels.len() {
                return Err(invalid(format!(
                    "edge {} {} references a missing node",
                    e.u, e.v
                )));
            }
            if e.u == e.v {
                return Err(invalid(format!("self-loop on node {}", e.u)));
            }
            if e.label.is_empty() {
                return Err(invalid(format!("edge {} {} has an empty label", e.u, e.v)));
            }
            if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(invalid(format!("duplicate edge {} {}", e.u, e.v)));
            }
            adjacency[e.u].push((e.v, k));
            adjacency[e.v].push((e.u, k));
        }
        Ok(LabeledGraph {
            id,
            labels,
            edges,
            adjacency,
        })
    }

    /// Convenience constructor from string slices, mostly for tests.
    pub fn from_parts(
        id: impl Into<String>,
        labels: &[&str],
        edges: &[(usize, usize, &str)],
    ) -> Result<Self> {
        LabeledGraph::new(
            id,
            labels.iter().map(|s| s.to_string()).collect(),
            edges.iter().map(|&(u, v, l)| Edge::new(u, v, l)).collect(),
        )
    }

    pub fn empty(id: impl Into<String>) -> Self {
        LabeledGraph {
            id: id.into(),
            labels: Vec::new(),
            edges: Vec::new(),
            adjacency: Vec::new(),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn node_label(&self, node: usize) -> &str {
        &self.labels[node]
    }

    pub fn node_labels(&self) -> &[String] {
        &self.labels
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// `(neighbor, edge index)` pairs in edge insertion order.
    pub fn neighbors(&self, node: usize) -> &[(usize, usize)] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<&Edge> {
        self.adjacency[u]
            .iter()
            .find(|&&(w, _)| w == v)
            .map(|&(_, k)| &self.edges[k])
    }

    /// Number of neighbors of every node; sums to twice the edge count.
    pub fn degree_sequence(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    /// Connected components as sorted node lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for root in 0..n {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut comp = vec![root];
            let mut queue = VecDeque::from([root]);
            while let Some(x) = queue.pop_front() {
                for &(y, _) in &self.adjacency[x] {
                    if !seen[y] {
                        seen[y] = true;
                        comp.push(y);
                        queue.push_back(y);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.node_count() > 0 && self.components().len() == 1
    }

    /// Breadth-first hop distances from `source`; `None` for unreachable nodes.
    pub fn distances_from(&self, source: usize, limit: Option<usize>) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.node_count()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(x) = queue.pop_front() {
            let d = dist[x].unwrap();
            if limit.is_some_and(|l| d >= l) {
                continue;
            }
            for &(y, _) in &self.adjacency[x] {
                if dist[y].is_none() {
                    dist[y] = Some(d + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// Subgraph induced by `nodes`, reindexed in the given order.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> LabeledGraph {
        let mut index = vec![usize::MAX; self.node_count()];
        for (new, &old) in nodes.iter().enumerate() {
            index[old] = new;
        }
        let labels = nodes.iter().map(|&i| self.labels[i].clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| index[e.u] != usize::MAX && index[e.v] != usize::MAX)
            .map(|e| Edge::new(index[e.u], index[e.v], e.label.clone()))
            .collect();
        LabeledGraph::new(self.id.clone(), labels, edges)
            .expect("induced subgraph of a valid graph is valid")
    }

    /// Renumbers nodes so that old node `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> LabeledGraph {
        assert_eq!(perm.len(), self.node_count(), "permutation length");
        let mut labels = vec![String::new(); self.node_count()];
        for (old, &new) in perm.iter().enumerate() {
            labels[new] = self.labels[old].clone();
        }
        let edges = self
            .edges
            .iter()
            .map(|e| Edge::new(perm[e.u], perm[e.v], e.label.clone()))
            .collect();
        LabeledGraph::new(self.id.clone(), labels, edges).expect("permutation of a valid graph")
    }

    /// Same structure with node and edge labels replaced.
    pub fn relabeled(&self, node_labels: Vec<String>, edge_labels: Vec<String>) -> Result<Self> {
        assert_eq!(node_labels.len(), self.node_count());
        assert_eq!(edge_labels.len(), self.edge_count());
        let edges = self
            .edges
            .iter()
            .zip(edge_labels)
            .map(|(e, l)| Edge::new(e.u, e.v, l))
            .collect();
        LabeledGraph::new(self.id.clone(), node_labels, edges)
    }
}

/// Distinct node and edge labels of a corpus, in byte order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelAlphabets {
    pub node_labels: BTreeSet<String>,
    pub edge_labels: BTreeSet<String>,
}

impl LabelAlphabets {
    pub fn from_graphs<'a>(graphs: impl IntoIterator<Item = &'a LabeledGraph>) -> Self {
        let mut out = LabelAlphabets::default();
        for g in graphs {
            out.node_labels.extend(g.labels.iter().cloned());
            out.edge_labels.extend(g.edges.iter().map(|e| e.label.clone()));
        }
        out
    }
}

fn is_token(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(char::is_whitespace)
}

struct PendingGraph {
    id: String,
    labels: Vec<String>,
    edges: Vec<Edge>,
    seen_edge: bool,
}

impl PendingGraph {
    fn finish(self) -> Result<LabeledGraph> {
        LabeledGraph::new(self.id, self.labels, self.edges)
    }
}

/// Parses graphs from transaction-format text.
pub fn parse_graphs(text: &str) -> Result<Vec<LabeledGraph>> {
    let mut graphs = Vec::new();
    let mut current: Option<PendingGraph> = None;
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let tokens: Vec<&str> = line.split_ascii_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        match tokens[0] {
            "t" => {
                if tokens.len() != 3 || tokens[1] != "#" {
                    return Err(Error::parse(lineno, "expected `t # <graph_id>`"));
                }
                if let Some(g) = current.take() {
                    graphs.push(g.finish()?);
                }
                current = Some(PendingGraph {
                    id: tokens[2].to_string(),
                    labels: Vec::new(),
                    edges: Vec::new(),
                    seen_edge: false,
                });
            }
            "v" => {
                let g = current
                    .as_mut()
                    .ok_or_else(|| Error::parse(lineno, "node line before any `t` line"))?;
                if tokens.len() != 3 {
                    return Err(Error::parse(lineno, "expected `v <index> <label>`"));
                }
                if g.seen_edge {
                    return Err(Error::parse(lineno, "node line after an edge line"));
                }
                let index: usize = tokens[1]
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("bad node index `{}`", tokens[1])))?;
                if index != g.labels.len() {
                    return Err(Error::parse(
                        lineno,
                        format!("expected node index {}, found {index}", g.labels.len()),
                    ));
                }
                g.labels.push(tokens[2].to_string());
            }
            "e" => {
                let g = current
                    .as_mut()
                    .ok_or_else(|| Error::parse(lineno, "edge line before any `t` line"))?;
                if tokens.len() != 4 {
                    return Err(Error::parse(lineno, "expected `e <u> <v> <label>`"));
                }
                let mut ends = [0usize; 2];
                for (slot, tok) in ends.iter_mut().zip(&tokens[1..3]) {
                    *slot = tok
                        .parse()
                        .map_err(|_| Error::parse(lineno, format!("bad node index `{tok}`")))?;
                    if *slot >= g.labels.len() {
                        return Err(Error::parse(lineno, format!("undeclared node {slot}")));
                    }
                }
                g.seen_edge = true;
                g.edges.push(Edge::new(ends[0], ends[1], tokens[3]));
            }
            other => {
                return Err(Error::parse(lineno, format!("unknown record type `{other}`")));
            }
        }
    }
    if let Some(g) = current.take() {
        graphs.push(g.finish()?);
    }
    Ok(graphs)
}

pub fn parse_graph_file(path: impl AsRef<Path>) -> Result<Vec<LabeledGraph>> {
    parse_graphs(&fs::read_to_string(path)?)
}

/// Renders graphs in transaction format, rejecting labels or ids that the
/// format cannot carry.
pub fn format_graphs(graphs: &[LabeledGraph]) -> Result<String> {
    let mut out = String::new();
    for g in graphs {
        let invalid = |message: String| Error::Validation {
            graph: g.id.clone(),
            message,
        };
        if !is_token(&g.id) {
            return Err(invalid("graph id must be non-empty and whitespace-free".into()));
        }
        writeln!(out, "t # {}", g.id).unwrap();
        for (i, label) in g.labels.iter().enumerate() {
            if !is_token(label) {
                return Err(invalid(format!("node {i}: labels must be whitespace-free")));
            }
            writeln!(out, "v {i} {label}").unwrap();
        }
        for e in &g.edges {
            if !is_token(&e.label) {
                return Err(invalid(format!(
                    "edge {} {}: labels must be whitespace-free",
                    e.u, e.v
                )));
            }
            writeln!(out, "e {} {} {}", e.u, e.v, e.label).unwrap();
        }
    }
    Ok(out)
}

pub fn write_graph_file(graphs: &[LabeledGraph], path: impl AsRef<Path>) -> Result<()> {
    let text = format_graphs(graphs)?;
    fs::write(path, text)?;
    Ok(())
}
