//! Independent brute-force oracles shared by the integration and acceptance
//! suites. Apart from `gradcheck`, which drives the engine under test
//! against finite differences, nothing here calls into the checked code.
#![allow(dead_code)]

pub mod gradcheck;

use std::cmp::Ordering;

use ggredux_core::canonical::{DfsCode, Quintuple};
use ggredux_core::LabeledGraph;

/// Pairwise edge order written directly from the placement rules.
pub fn cmp_pairs(a: (usize, usize), b: (usize, usize)) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    let a_fwd = a.0 < a.1;
    let b_fwd = b.0 < b.1;
    let less = match (a_fwd, b_fwd) {
        (true, true) => a.1 < b.1 || (a.1 == b.1 && a.0 > b.0),
        (false, false) => a.0 < b.0 || (a.0 == b.0 && a.1 < b.1),
        (false, true) => a.0 < b.1,
        (true, false) => a.1 <= b.0,
    };
    if less {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

pub fn cmp_entries(a: &Quintuple, b: &Quintuple) -> Ordering {
    cmp_pairs((a.from, a.to), (b.from, b.to))
        .then_with(|| a.from_label.cmp(&b.from_label))
        .then_with(|| a.edge_label.cmp(&b.edge_label))
        .then_with(|| a.to_label.cmp(&b.to_label))
}

pub fn cmp_codes(a: &[Quintuple], b: &[Quintuple]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match cmp_entries(x, y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

#[derive(Clone)]
struct VisitState {
    ts: Vec<Option<usize>>,
    used: Vec<bool>,
    stack: Vec<usize>,
    code: Vec<Quintuple>,
    next: usize,
}

fn extend_all(g: &LabeledGraph, mut st: VisitState, out: &mut Vec<Vec<Quintuple>>) {
    loop {
        let Some(&top) = st.stack.last() else {
            out.push(st.code);
            return;
        };
        if g.neighbors(top).iter().any(|&(w, _)| st.ts[w].is_none()) {
            break;
        }
        st.stack.pop();
    }
    let top = *st.stack.last().unwrap();
    for &(w, e) in g.neighbors(top) {
        if st.ts[w].is_some() {
            continue;
        }
        let mut s = st.clone();
        s.ts[w] = Some(s.next);
        s.next += 1;
        s.used[e] = true;
        s.code.push(Quintuple::new(
            s.ts[top].unwrap(),
            s.ts[w].unwrap(),
            g.node_label(top),
            &g.edges()[e].label,
            g.node_label(w),
        ));
        let mut back: Vec<(usize, usize, usize)> = g
            .neighbors(w)
            .iter()
            .filter(|&&(x, e2)| !s.used[e2] && s.ts[x].is_some())
            .map(|&(x, e2)| (s.ts[x].unwrap(), x, e2))
            .collect();
        back.sort();
        for (tx, x, e2) in back {
            s.used[e2] = true;
            s.code.push(Quintuple::new(
                s.ts[w].unwrap(),
                tx,
                g.node_label(w),
                &g.edges()[e2].label,
                g.node_label(x),
            ));
        }
        s.stack.push(w);
        extend_all(g, s, out);
    }
}

/// Every DFS code of a connected graph: all roots, all neighbor orders.
pub fn all_dfs_codes(g: &LabeledGraph) -> Vec<Vec<Quintuple>> {
    let mut out = Vec::new();
    for root in 0..g.node_count() {
        let mut ts = vec![None; g.node_count()];
        ts[root] = Some(0);
        let st = VisitState {
            ts,
            used: vec![false; g.edge_count()],
            stack: vec![root],
            code: Vec::new(),
            next: 1,
        };
        extend_all(g, st, &mut out);
    }
    out
}

pub fn oracle_min_code(g: &LabeledGraph) -> DfsCode {
    let codes = all_dfs_codes(g);
    let best = codes
        .into_iter()
        .min_by(|a, b| cmp_codes(a, b))
        .expect("graph has at least one node");
    DfsCode(best)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Tries every node bijection.
pub fn brute_force_isomorphic(a: &LabeledGraph, b: &LabeledGraph) -> bool {
    if a.node_count() != b.node_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    permutations(a.node_count()).into_iter().any(|phi| {
        (0..a.node_count()).all(|v| a.node_label(v) == b.node_label(phi[v]))
            && a.edges().iter().all(|e| {
                b.edge_between(phi[e.u], phi[e.v])
                    .is_some_and(|f| f.label == e.label)
            })
    })
}

/// Orbit templates: edge lists of the nine connected graphlets on 2-4 nodes
/// and the orbit of each template position.
const TEMPLATES: &[(usize, &[(usize, usize)], &[usize])] = &[
    (2, &[(0, 1)], &[0, 0]),
    (3, &[(0, 1), (1, 2)], &[1, 2, 1]),
    (3, &[(0, 1), (1, 2), (0, 2)], &[3, 3, 3]),
    (4, &[(0, 1), (1, 2), (2, 3)], &[4, 5, 5, 4]),
    (4, &[(0, 1), (0, 2), (0, 3)], &[7, 6, 6, 6]),
    (4, &[(0, 1), (1, 2), (2, 3), (3, 0)], &[8, 8, 8, 8]),
    (4, &[(0, 1), (1, 2), (2, 0), (2, 3)], &[10, 10, 11, 9]),
    (4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)], &[13, 12, 13, 12]),
    (4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], &[14, 14, 14, 14]),
];

/// Per-node counts of the 15 graphlet orbits by checking every subset of
/// 2-4 nodes against every template under every bijection.
pub fn brute_force_orbits(g: &LabeledGraph) -> Vec<[u64; 15]> {
    let n = g.node_count();
    let adj = |a: usize, b: usize| g.edge_between(a, b).is_some();
    let mut counts = vec![[0u64; 15]; n];
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    for mask in 1u32..(1u32 << n) {
        let k = mask.count_ones() as usize;
        if (2..=4).contains(&k) {
            subsets.push((0..n).filter(|&i| mask & (1 << i) != 0).collect());
        }
    }
    let perms: Vec<Vec<Vec<usize>>> = (0..=4).map(permutations).collect();
    for s in subsets {
        let k = s.len();
        'templates: for &(size, edges, orbits) in TEMPLATES {
            if size != k {
                continue;
            }
            let edge_count = (0..k)
                .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
                .filter(|&(i, j)| adj(s[i], s[j]))
                .count();
            if edge_count != edges.len() {
                continue;
            }
            for phi in &perms[k] {
                // template position p sits at subset node s[phi[p]]
                let matches = edges.iter().all(|&(a, b)| adj(s[phi[a]], s[phi[b]]));
                if matches {
                    for p in 0..k {
                        counts[s[phi[p]]][orbits[p]] += 1;
                    }
                    break 'templates;
                }
            }
        }
    }
    counts
}

/// Central finite difference of `f` with respect to each coordinate of `x`.
pub fn finite_difference(mut f: impl FnMut(&[f64]) -> f64, x: &[f64], step: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + step;
            let up = f(&probe);
            probe[i] = orig - step;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * step)
        })
        .collect()
}

/// Relative error `|a - b| / max(|a|, |b|, floor)` maximized over entries.
pub fn max_relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(floor))
        .fold(0.0, f64::max)
}
