use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet};

use super::{check_canonicalizable, edge_order_key, DfsCode, Quintuple};
use crate::error::{Error, Result};
use crate::graph::LabeledGraph;

/// Order in which a DFS visit explores the neighbors of a node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NeighborOrder {
    /// Increasing node index.
    Ascending,
    /// Decreasing node index.
    Descending,
    /// Increasing `priority[node]`, ties broken by node index.
    Priority(Vec<usize>),
}

impl NeighborOrder {
    fn sort(&self, nodes: &mut [(usize, usize)]) {
        match self {
            NeighborOrder::Ascending => nodes.sort_by_key(|&(w, _)| w),
            NeighborOrder::Descending => nodes.sort_by_key(|&(w, _)| std::cmp::Reverse(w)),
            NeighborOrder::Priority(p) => nodes.sort_by_key(|&(w, _)| (p[w], w)),
        }
    }
}

/// DFS code of the visit rooted at `start` that explores neighbors in
/// `order`. Backward edges of a node are emitted right after the forward
/// edge that discovered it, by increasing target timestamp.
pub fn enumerate_dfs_code(g: &LabeledGraph, start: usize, order: &NeighborOrder) -> Result<DfsCode> {
    check_canonicalizable(g)?;
    if start >= g.node_count() {
        return Err(Error::Canonical(format!("start node {start} out of range")));
    }
    let mut visit = Visit {
        g,
        order,
        ts: vec![None; g.node_count()],
        used: vec![false; g.edge_count()],
        code: Vec::with_capacity(g.edge_count()),
    };
    visit.ts[start] = Some(0);
    visit.descend(start);
    Ok(DfsCode(visit.code))
}

struct Visit<'a> {
    g: &'a LabeledGraph,
    order: &'a NeighborOrder,
    ts: Vec<Option<usize>>,
    used: Vec<bool>,
    code: Vec<Quintuple>,
}

impl Visit<'_> {
    fn quintuple(&self, a: usize, b: usize, edge: usize) -> Quintuple {
        Quintuple::new(
            self.ts[a].unwrap(),
            self.ts[b].unwrap(),
            self.g.node_label(a),
            &self.g.edges()[edge].label,
            self.g.node_label(b),
        )
    }

    fn descend(&mut self, node: usize) {
        let mut nbrs = self.g.neighbors(node).to_vec();
        self.order.sort(&mut nbrs);
        for (w, e) in nbrs {
            if self.ts[w].is_some() {
                continue;
            }
            let next = self.code.iter().filter(|q| q.is_forward()).count() + 1;
            self.ts[w] = Some(next);
            self.used[e] = true;
            let q = self.quintuple(node, w, e);
            self.code.push(q);

            let mut back: Vec<(usize, usize, usize)> = self
                .g
                .neighbors(w)
                .iter()
                .filter(|&&(x, e2)| !self.used[e2] && self.ts[x].is_some())
                .map(|&(x, e2)| (self.ts[x].unwrap(), x, e2))
                .collect();
            back.sort_unstable();
            for (_, x, e2) in back {
                self.used[e2] = true;
                let q = self.quintuple(w, x, e2);
                self.code.push(q);
            }
            self.descend(w);
        }
    }
}

/// Entry in rank space: label strings replaced by their rank in the graph's
/// sorted label sets, which preserves byte order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct RankedEntry {
    from: usize,
    to: usize,
    from_label: u32,
    edge_label: u32,
    to_label: u32,
}

impl RankedEntry {
    fn cmp_gspan(&self, other: &Self) -> Ordering {
        edge_order_key(self.from, self.to)
            .cmp(&edge_order_key(other.from, other.to))
            .then(self.from_label.cmp(&other.from_label))
            .then(self.edge_label.cmp(&other.edge_label))
            .then(self.to_label.cmp(&other.to_label))
    }
}

struct Ranked<'a> {
    g: &'a LabeledGraph,
    node_rank: Vec<u32>,
    edge_rank: Vec<u32>,
    /// Twin class of every node: nodes whose transposition is an automorphism.
    twin_class: Vec<usize>,
    class_members: Vec<Vec<usize>>,
}

impl<'a> Ranked<'a> {
    fn new(g: &'a LabeledGraph) -> Self {
        let node_set: BTreeSet<&str> = g.node_labels().iter().map(String::as_str).collect();
        let edge_set: BTreeSet<&str> = g.edges().iter().map(|e| e.label.as_str()).collect();
        let node_index: HashMap<&str, u32> =
            node_set.iter().enumerate().map(|(i, &l)| (l, i as u32)).collect();
        let edge_index: HashMap<&str, u32> =
            edge_set.iter().enumerate().map(|(i, &l)| (l, i as u32)).collect();
        let node_rank: Vec<u32> = g.node_labels().iter().map(|l| node_index[l.as_str()]).collect();
        let edge_rank: Vec<u32> = g.edges().iter().map(|e| edge_index[e.label.as_str()]).collect();
        let (twin_class, class_members) = twin_classes(g, &node_rank, &edge_rank);
        Ranked {
            g,
            node_rank,
            edge_rank,
            twin_class,
            class_members,
        }
    }

    fn entry(&self, from_ts: usize, to_ts: usize, a: usize, b: usize, e: usize) -> RankedEntry {
        RankedEntry {
            from: from_ts,
            to: to_ts,
            from_label: self.node_rank[a],
            edge_label: self.edge_rank[e],
            to_label: self.node_rank[b],
        }
    }

    /// A new node may be discovered only if no smaller unvisited twin exists:
    /// swapping twins fixes every visited node, so both choices lead to the
    /// same codes.
    fn may_discover(&self, w: usize, visited: &[bool]) -> bool {
        self.class_members[self.twin_class[w]]
            .iter()
            .take_while(|&&m| m < w)
            .all(|&m| visited[m])
    }
}

/// Groups nodes into classes where every transposition of two members is a
/// label-preserving automorphism.
fn twin_classes(g: &LabeledGraph, node_rank: &[u32], edge_rank: &[u32]) -> (Vec<usize>, Vec<Vec<usize>>) {
    let n = g.node_count();
    let signature = |x: usize| -> Vec<(usize, u32)> {
        let mut s: Vec<(usize, u32)> = g.neighbors(x).iter().map(|&(w, e)| (w, edge_rank[e])).collect();
        s.sort_unstable();
        s
    };
    let sigs: Vec<Vec<(usize, u32)>> = (0..n).map(signature).collect();
    let is_twin = |a: usize, b: usize| -> bool {
        if node_rank[a] != node_rank[b] || sigs[a].len() != sigs[b].len() {
            return false;
        }
        let strip = |s: &[(usize, u32)], skip: usize| -> Vec<(usize, u32)> {
            s.iter().copied().filter(|&(w, _)| w != skip).collect()
        };
        strip(&sigs[a], b) == strip(&sigs[b], a)
    };
    let mut groups: HashMap<(u32, usize), Vec<usize>> = HashMap::new();
    for x in 0..n {
        groups.entry((node_rank[x], sigs[x].len())).or_default().push(x);
    }
    let mut class = vec![usize::MAX; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut keys: Vec<_> = groups.keys().copied().collect();
    keys.sort_unstable();
    for key in keys {
        let group = &groups[&key];
        for (i, &x) in group.iter().enumerate() {
            if class[x] != usize::MAX {
                continue;
            }
            let id = members.len();
            class[x] = id;
            let mut m = vec![x];
            for &y in &group[i + 1..] {
                if class[y] == usize::MAX && is_twin(x, y) {
                    class[y] = id;
                    m.push(y);
                }
            }
            members.push(m);
        }
    }
    (class, members)
}

#[derive(Clone)]
struct Candidate {
    node_of_ts: Vec<usize>,
    ts_of_node: Vec<usize>,
    visited: Vec<bool>,
    used: Vec<bool>,
    /// Timestamps on the rightmost path, root first.
    path: Vec<usize>,
}

const UNSEEN: usize = usize::MAX;

#[derive(Clone, Copy)]
enum Move {
    Backward { edge: usize },
    Forward { edge: usize, depth: usize, node: usize },
}

impl Candidate {
    fn root(n: usize, m: usize, a: usize, b: usize, edge: usize) -> Self {
        let mut c = Candidate {
            node_of_ts: vec![a, b],
            ts_of_node: vec![UNSEEN; n],
            visited: vec![false; n],
            used: vec![false; m],
            path: vec![0, 1],
        };
        c.ts_of_node[a] = 0;
        c.ts_of_node[b] = 1;
        c.visited[a] = true;
        c.visited[b] = true;
        c.used[edge] = true;
        c
    }

    fn apply(&self, mv: Move) -> Candidate {
        let mut c = self.clone();
        match mv {
            Move::Backward { edge } => c.used[edge] = true,
            Move::Forward { edge, depth, node } => {
                let ts = c.node_of_ts.len();
                c.used[edge] = true;
                c.visited[node] = true;
                c.ts_of_node[node] = ts;
                c.node_of_ts.push(node);
                c.path.truncate(depth + 1);
                c.path.push(ts);
            }
        }
        c
    }

    /// Visited set plus rightmost-path nodes determine every future entry.
    fn key(&self) -> (Vec<bool>, Vec<usize>) {
        (
            self.visited.clone(),
            self.path.iter().map(|&t| self.node_of_ts[t]).collect(),
        )
    }

    /// Rightmost-path extensions. Backward edges from the rightmost vertex
    /// always sort before any forward edge, and forward edges from deeper
    /// path vertices before shallower ones, so only the first non-empty
    /// group can contain the minimum.
    fn extensions(&self, r: &Ranked<'_>, out: &mut Vec<(RankedEntry, Move)>) {
        let g = r.g;
        let rm_ts = *self.path.last().unwrap();
        let rm = self.node_of_ts[rm_ts];
        let before = out.len();
        for &(w, e) in g.neighbors(rm) {
            if !self.used[e] && self.visited[w] {
                let entry = r.entry(rm_ts, self.ts_of_node[w], rm, w, e);
                out.push((entry, Move::Backward { edge: e }));
            }
        }
        if out.len() > before {
            return;
        }
        let next_ts = self.node_of_ts.len();
        for depth in (0..self.path.len()).rev() {
            let p_ts = self.path[depth];
            let p = self.node_of_ts[p_ts];
            for &(w, e) in g.neighbors(p) {
                if !self.visited[w] && r.may_discover(w, &self.visited) {
                    let entry = r.entry(p_ts, next_ts, p, w, e);
                    out.push((entry, Move::Forward { edge: e, depth, node: w }));
                }
            }
            if out.len() > before {
                return;
            }
        }
    }
}

/// Minimum DFS code: all candidate visits are grown in lockstep by
/// rightmost-path extension, keeping only those whose next entry is minimal.
pub fn min_dfs_code(g: &LabeledGraph) -> Result<DfsCode> {
    check_canonicalizable(g)?;
    let r = Ranked::new(g);
    let (n, m) = (g.node_count(), g.edge_count());

    let mut best: Option<RankedEntry> = None;
    let mut roots: Vec<(usize, usize, usize)> = Vec::new();
    let none_visited = vec![false; n];
    for (k, e) in g.edges().iter().enumerate() {
        for (a, b) in [(e.u, e.v), (e.v, e.u)] {
            if !r.may_discover(a, &none_visited) {
                continue;
            }
            let mut after_a = none_visited.clone();
            after_a[a] = true;
            if !r.may_discover(b, &after_a) {
                continue;
            }
            let entry = r.entry(0, 1, a, b, k);
            match best.map(|b| entry.cmp_gspan(&b)) {
                None | Some(Ordering::Less) => {
                    best = Some(entry);
                    roots.clear();
                    roots.push((a, b, k));
                }
                Some(Ordering::Equal) => roots.push((a, b, k)),
                Some(Ordering::Greater) => {}
            }
        }
    }
    let mut code = vec![best.expect("graph has edges")];
    let mut candidates: Vec<Candidate> = roots
        .into_iter()
        .map(|(a, b, k)| Candidate::root(n, m, a, b, k))
        .collect();

    let mut moves = Vec::new();
    while code.len() < m {
        let mut step_best: Option<RankedEntry> = None;
        let mut chosen: Vec<(usize, Move)> = Vec::new();
        for (ci, cand) in candidates.iter().enumerate() {
            moves.clear();
            cand.extensions(&r, &mut moves);
            for &(entry, mv) in &moves {
                match step_best.map(|b| entry.cmp_gspan(&b)) {
                    None | Some(Ordering::Less) => {
                        step_best = Some(entry);
                        chosen.clear();
                        chosen.push((ci, mv));
                    }
                    Some(Ordering::Equal) => chosen.push((ci, mv)),
                    Some(Ordering::Greater) => {}
                }
            }
        }
        let entry = step_best.ok_or_else(|| {
            Error::Canonical(format!("graph {} has edges unreachable by the visit", g.id()))
        })?;
        code.push(entry);
        let mut seen = HashSet::new();
        candidates = chosen
            .into_iter()
            .map(|(ci, mv)| candidates[ci].apply(mv))
            .filter(|c| seen.insert(c.key()))
            .collect();
    }

    let node_labels: Vec<&str> = {
        let set: BTreeSet<&str> = g.node_labels().iter().map(String::as_str).collect();
        set.into_iter().collect()
    };
    let edge_labels: Vec<&str> = {
        let set: BTreeSet<&str> = g.edges().iter().map(|e| e.label.as_str()).collect();
        set.into_iter().collect()
    };
    Ok(DfsCode(
        code.into_iter()
            .map(|e| {
                Quintuple::new(
                    e.from,
                    e.to,
                    node_labels[e.from_label as usize],
                    edge_labels[e.edge_label as usize],
                    node_labels[e.to_label as usize],
                )
            })
            .collect(),
    ))
}
