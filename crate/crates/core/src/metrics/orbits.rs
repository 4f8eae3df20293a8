use crate::graph::LabeledGraph;

/// Number of orbits of the connected graphlets on 2 to 4 nodes.
pub const ORBIT_COUNT: usize = 15;

/// Sorted neighbor lists, for membership tests by binary search.
struct Adjacency(Vec<Vec<usize>>);

impl Adjacency {
    fn new(g: &LabeledGraph) -> Self {
        Adjacency(
            (0..g.node_count())
                .map(|v| {
                    let mut n: Vec<usize> = g.neighbors(v).iter().map(|&(u, _)| u).collect();
                    n.sort_unstable();
                    n
                })
                .collect(),
        )
    }

    fn has(&self, a: usize, b: usize) -> bool {
        self.0[a].binary_search(&b).is_ok()
    }
}

/// Calls `visit` once for every connected node subset of size 2..=`k_max`
/// (ESU enumeration).
fn connected_subsets(adj: &Adjacency, k_max: usize, visit: &mut impl FnMut(&[usize])) {
    for v in 0..adj.0.len() {
        let ext: Vec<usize> = adj.0[v].iter().copied().filter(|&u| u > v).collect();
        extend(adj, &mut vec![v], ext, v, k_max, visit);
    }
}

fn extend(
    adj: &Adjacency,
    sub: &mut Vec<usize>,
    mut ext: Vec<usize>,
    root: usize,
    k_max: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if sub.len() >= 2 {
        visit(sub);
    }
    if sub.len() == k_max {
        return;
    }
    while let Some(w) = ext.pop() {
        let mut next = ext.clone();
        for &u in &adj.0[w] {
            let exclusive = u > root
                && !sub.contains(&u)
                && !sub.iter().any(|&s| adj.has(s, u))
                && !next.contains(&u);
            if exclusive {
                next.push(u);
            }
        }
        sub.push(w);
        extend(adj, sub, next, root, k_max, visit);
        sub.pop();
    }
}

/// Orbit of each subset member, in the standard orbit-counting order.
fn classify(adj: &Adjacency, s: &[usize]) -> [usize; 4] {
    let k = s.len();
    let mut deg = [0usize; 4];
    let mut edges = 0;
    for i in 0..k {
        for j in i + 1..k {
            if adj.has(s[i], s[j]) {
                deg[i] += 1;
                deg[j] += 1;
                edges += 1;
            }
        }
    }
    let mut out = [0usize; 4];
    for i in 0..k {
        out[i] = match (k, edges, deg[i]) {
            (2, _, _) => 0,
            (3, 2, 1) => 1,
            (3, 2, _) => 2,
            (3, _, _) => 3,
            (4, 3, d) if deg[..4].contains(&3) => if d == 3 { 7 } else { 6 },
            (4, 3, 1) => 4,
            (4, 3, _) => 5,
            (4, 4, _) if deg[..4].iter().all(|&d| d == 2) => 8,
            (4, 4, 1) => 9,
            (4, 4, 2) => 10,
            (4, 4, _) => 11,
            (4, 5, 2) => 12,
            (4, 5, _) => 13,
            _ => 14,
        };
    }
    out
}

/// Per-node counts of the 15 orbits of connected graphlets on 2-4 nodes.
/// Orbit 0 is the degree.
pub fn orbit_counts(g: &LabeledGraph) -> Vec<[u64; ORBIT_COUNT]> {
    let adj = Adjacency::new(g);
    let mut counts = vec![[0u64; ORBIT_COUNT]; g.node_count()];
    connected_subsets(&adj, 4, &mut |s| {
        let orbits = classify(&adj, s);
        for (i, &v) in s.iter().enumerate() {
            counts[v][orbits[i]] += 1;
        }
    });
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn unlabeled(n: usize, edges: &[(usize, usize)]) -> LabeledGraph {
        let e = edges.iter().map(|&(u, v)| Edge::new(u, v, "e")).collect();
        LabeledGraph::new("g", vec!["n".to_string(); n], e).unwrap()
    }

    #[test]
    fn complete_graph_k4() {
        let g = unlabeled(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        for c in orbit_counts(&g) {
            // degree 3, three triangles, one K4
            assert_eq!(c[0], 3);
            assert_eq!(c[3], 3);
            assert_eq!(c[14], 1);
            assert_eq!(c.iter().sum::<u64>(), 7);
        }
    }

    #[test]
    fn paw_orbits() {
        let g = unlabeled(4, &[(0, 1), (1, 2), (2, 0), (2, 3)]);
        let c = orbit_counts(&g);
        assert_eq!(c[3][9], 1);
        assert_eq!(c[0][10], 1);
        assert_eq!(c[2][11], 1);
        assert_eq!(c[3][1], 2);
    }
}
