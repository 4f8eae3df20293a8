//! DFS codes, the minimum DFS code used as canonical label, and its reduced
//! triplet form.
//!
//! Entries are ordered by the gSpan edge order on their timestamp pair,
//! with label comparison as the tie-breaker. The order is captured by
//! [`edge_order_key`], which turns it into a plain tuple comparison:
//!
//! * forward edges `(i, j)` with `i < j` sort by `j`, then by larger `i`;
//! * backward edges `(i, j)` with `i > j` sort by `i`, then by smaller `j`;
//! * a backward edge `(i1, j1)` precedes a forward edge `(i2, j2)` iff
//!   `i1 < j2`, and a forward edge precedes a backward one iff `j1 <= i2`.

mod reconstruct;
mod search;

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::LabeledGraph;

pub use reconstruct::{
    graph_from_reduced, DiscardReason, DiscardedEntry, ReconstructionPolicy, ReconstructionReport,
};
pub use search::{enumerate_dfs_code, min_dfs_code, NeighborOrder};

/// Sort key realizing the gSpan order on `(from, to)` timestamp pairs.
#[inline]
pub fn edge_order_key(from: usize, to: usize) -> (usize, u8, usize) {
    if from < to {
        (to, 0, usize::MAX - from)
    } else {
        (from, 1, to)
    }
}

/// The label triple `(from label, edge label, to label)` of an edge, used as
/// a single categorical symbol in reduced codes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Token {
    pub from_label: String,
    pub edge_label: String,
    pub to_label: String,
}

impl Token {
    pub fn new(from: impl Into<String>, edge: impl Into<String>, to: impl Into<String>) -> Self {
        Token {
            from_label: from.into(),
            edge_label: edge.into(),
            to_label: to.into(),
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.from_label, self.edge_label, self.to_label)
    }
}

/// One DFS-code entry: the timestamps of both endpoints and the three labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Quintuple {
    pub from: usize,
    pub to: usize,
    pub from_label: String,
    pub edge_label: String,
    pub to_label: String,
}

impl Quintuple {
    pub fn new(
        from: usize,
        to: usize,
        from_label: impl Into<String>,
        edge_label: impl Into<String>,
        to_label: impl Into<String>,
    ) -> Self {
        Quintuple {
            from,
            to,
            from_label: from_label.into(),
            edge_label: edge_label.into(),
            to_label: to_label.into(),
        }
    }

    pub fn is_forward(&self) -> bool {
        self.from < self.to
    }

    pub fn token(&self) -> Token {
        Token::new(&self.from_label, &self.edge_label, &self.to_label)
    }
}

impl Ord for Quintuple {
    fn cmp(&self, other: &Self) -> Ordering {
        edge_order_key(self.from, self.to)
            .cmp(&edge_order_key(other.from, other.to))
            .then_with(|| self.from_label.cmp(&other.from_label))
            .then_with(|| self.edge_label.cmp(&other.edge_label))
            .then_with(|| self.to_label.cmp(&other.to_label))
    }
}

impl PartialOrd for Quintuple {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Quintuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "<{},{},{},{},{}>",
            self.from, self.to, self.from_label, self.edge_label, self.to_label
        )
    }
}

/// Reduced entry: timestamps plus the packed label token.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Triplet {
    pub from: usize,
    pub to: usize,
    pub token: Token,
}

impl Triplet {
    pub fn new(from: usize, to: usize, token: Token) -> Self {
        Triplet { from, to, token }
    }
}

impl Ord for Triplet {
    fn cmp(&self, other: &Self) -> Ordering {
        edge_order_key(self.from, self.to)
            .cmp(&edge_order_key(other.from, other.to))
            .then_with(|| self.token.cmp(&other.token))
    }
}

impl PartialOrd for Triplet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Triplet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{},{},{}>", self.from, self.to, self.token)
    }
}

/// Ordered quintuple sequence. Comparison is lexicographic over entries.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DfsCode(pub Vec<Quintuple>);

impl DfsCode {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[Quintuple] {
        &self.0
    }

    /// Injective text encoding, safe for arbitrary label bytes.
    pub fn certificate(&self) -> String {
        let mut out = String::new();
        for q in &self.0 {
            push_entry(&mut out, q.from, q.to, [&q.from_label, &q.edge_label, &q.to_label]);
        }
        out
    }
}

fn push_entry(out: &mut String, from: usize, to: usize, labels: [&str; 3]) {
    use std::fmt::Write as _;
    write!(out, "{from} {to}").unwrap();
    for l in labels {
        write!(out, " {}:{l}", l.len()).unwrap();
    }
    out.push(';');
}

impl fmt::Display for DfsCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, q) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{q}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReducedCode(pub Vec<Triplet>);

impl ReducedCode {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[Triplet] {
        &self.0
    }

    /// Expands tokens back into quintuples.
    pub fn expand(&self) -> DfsCode {
        DfsCode(
            self.0
                .iter()
                .map(|t| {
                    Quintuple::new(
                        t.from,
                        t.to,
                        &t.token.from_label,
                        &t.token.edge_label,
                        &t.token.to_label,
                    )
                })
                .collect(),
        )
    }
}

impl fmt::Display for ReducedCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Packs the three labels of every entry into one token.
pub fn reduce(code: &DfsCode) -> ReducedCode {
    ReducedCode(
        code.0
            .iter()
            .map(|q| Triplet::new(q.from, q.to, q.token()))
            .collect(),
    )
}

/// True iff both graphs have the same minimum DFS code.
pub fn is_isomorphic(a: &LabeledGraph, b: &LabeledGraph) -> Result<bool> {
    if a.node_count() != b.node_count() || a.edge_count() != b.edge_count() {
        // still validate both inputs so that errors surface consistently
        min_dfs_code(a)?;
        min_dfs_code(b)?;
        return Ok(false);
    }
    Ok(min_dfs_code(a)? == min_dfs_code(b)?)
}

/// Canonical label defined for every graph, including edgeless and
/// disconnected ones: the sorted multiset of per-component labels, where a
/// component with edges contributes its minimum DFS code certificate.
pub fn canonical_label(g: &LabeledGraph) -> String {
    if g.is_empty() {
        return String::new();
    }
    let mut parts: Vec<String> = g
        .components()
        .into_iter()
        .map(|comp| {
            if comp.len() == 1 {
                let l = g.node_label(comp[0]);
                format!("n{}:{l}", l.len())
            } else {
                let sub = g.induced_subgraph(&comp);
                let code = min_dfs_code(&sub).expect("component is connected with edges");
                format!("c{}", code.certificate())
            }
        })
        .collect();
    parts.sort_unstable();
    parts.join("|")
}

/// Canonicalizes a corpus in parallel, one task per graph, preserving order.
pub fn reduced_codes(graphs: &[LabeledGraph]) -> Vec<Result<ReducedCode>> {
    graphs
        .par_iter()
        .map(|g| min_dfs_code(g).map(|c| reduce(&c)))
        .collect()
}

pub(crate) fn check_canonicalizable(g: &LabeledGraph) -> Result<()> {
    if g.edge_count() == 0 {
        return Err(Error::Canonical(format!(
            "graph {} has no edges; a DFS code is an edge sequence",
            g.id()
        )));
    }
    if !g.is_connected() {
        return Err(Error::Canonical(format!("graph {} is disconnected", g.id())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::house;

    fn houseb() -> DfsCode {
        DfsCode(vec![
            Quintuple::new(0, 1, "X", "a", "X"),
            Quintuple::new(1, 2, "X", "a", "Y"),
            Quintuple::new(2, 0, "Y", "b", "X"),
            Quintuple::new(2, 3, "Y", "a", "Z"),
            Quintuple::new(3, 1, "Z", "b", "X"),
        ])
    }

    #[test]
    fn edge_order_matches_rules() {
        let lt = |a: (usize, usize), b: (usize, usize)| {
            edge_order_key(a.0, a.1) < edge_order_key(b.0, b.1)
        };
        // forward: smaller target first, then larger source first
        assert!(lt((1, 2), (0, 3)));
        assert!(lt((1, 2), (0, 2)));
        // backward: smaller source, then smaller target
        assert!(lt((2, 0), (3, 0)));
        assert!(lt((3, 0), (3, 1)));
        // backward before forward from the same vertex
        assert!(lt((2, 0), (2, 3)));
        // backward after the forward edge that discovered its source
        assert!(lt((1, 2), (2, 0)));
    }

    #[test]
    fn example_codes_compare_on_second_entry() {
        let c = DfsCode(vec![
            Quintuple::new(0, 1, "X", "a", "X"),
            Quintuple::new(1, 2, "X", "b", "Y"),
            Quintuple::new(2, 0, "Y", "a", "X"),
            Quintuple::new(2, 3, "Y", "a", "Z"),
            Quintuple::new(3, 0, "Z", "b", "X"),
        ]);
        assert!(houseb() < c);
        assert!(reduce(&houseb()) < reduce(&c));
    }

    #[test]
    fn reduce_packs_labels() {
        let r = reduce(&houseb());
        let expected = [
            (0, 1, ("X", "a", "X")),
            (1, 2, ("X", "a", "Y")),
            (2, 0, ("Y", "b", "X")),
            (2, 3, ("Y", "a", "Z")),
            (3, 1, ("Z", "b", "X")),
        ];
        assert_eq!(r.len(), 5);
        for (t, (f, to, (a, b, c))) in r.entries().iter().zip(expected) {
            assert_eq!((t.from, t.to), (f, to));
            assert_eq!(t.token, Token::new(a, b, c));
        }
        assert_eq!(r.expand(), houseb());
        let one = DfsCode(vec![Quintuple::new(0, 1, "X", "a", "Y")]);
        assert_eq!(reduce(&one).len(), 1);
    }

    #[test]
    fn min_code_of_example_graph() {
        assert_eq!(min_dfs_code(&house()).unwrap(), houseb());
        assert_eq!(
            houseb().to_string(),
            "<0,1,X,a,X> <1,2,X,a,Y> <2,0,Y,b,X> <2,3,Y,a,Z> <3,1,Z,b,X>"
        );
    }

    #[test]
    fn isomorphism_checks() {
        let g = house();
        let p = g.permuted(&[2, 0, 3, 1]);
        assert!(is_isomorphic(&g, &p).unwrap());
        let xa = LabeledGraph::from_parts("a", &["X", "Y"], &[(0, 1, "a")]).unwrap();
        let xb = LabeledGraph::from_parts("b", &["X", "Y"], &[(0, 1, "b")]).unwrap();
        assert!(!is_isomorphic(&xa, &xb).unwrap());
    }

    #[test]
    fn canonical_label_covers_degenerate_graphs() {
        let empty = LabeledGraph::empty("e");
        assert_eq!(canonical_label(&empty), "");
        let two = LabeledGraph::from_parts("n", &["B", "A"], &[]).unwrap();
        let two_swapped = LabeledGraph::from_parts("n", &["A", "B"], &[]).unwrap();
        assert_eq!(canonical_label(&two), canonical_label(&two_swapped));
        let split = LabeledGraph::from_parts(
            "s",
            &["A", "B", "A", "C"],
            &[(0, 1, "x"), (2, 3, "y")],
        )
        .unwrap();
        let split_perm = split.permuted(&[3, 1, 0, 2]);
        assert_eq!(canonical_label(&split), canonical_label(&split_perm));
        assert_ne!(canonical_label(&split), canonical_label(&two));
    }

    #[test]
    fn certificates_do_not_collide_on_separator_bytes() {
        let a = DfsCode(vec![Quintuple::new(0, 1, "a b", "c", "d")]);
        let b = DfsCode(vec![Quintuple::new(0, 1, "a", "b c", "d")]);
        assert_ne!(a.certificate(), b.certificate());
    }
}
