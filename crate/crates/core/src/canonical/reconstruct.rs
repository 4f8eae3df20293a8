use std::collections::HashSet;
use std::fmt;

use super::ReducedCode;
use crate::graph::{Edge, LabeledGraph};

/// How to treat entries that cannot be applied to the graph built so far.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ReconstructionPolicy {
    /// Skip inconsistent entries and keep going.
    #[default]
    SkipInvalid,
    /// Stop at the first inconsistent entry; everything after it is discarded.
    StopAtFirstInvalid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscardReason {
    /// The sequence does not open with a `(0, 1, token)` entry.
    MissingRoot,
    /// A timestamp neither exists yet nor is the next fresh one.
    UnknownTimestamp,
    SelfLoop,
    DuplicateEdge,
    /// An endpoint label disagrees with the label assigned earlier.
    LabelConflict,
    /// Dropped because reconstruction stopped before reaching it.
    AfterStop,
}

impl fmt::Display for DiscardReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiscardReason::MissingRoot => "missing_root",
            DiscardReason::UnknownTimestamp => "unknown_timestamp",
            DiscardReason::SelfLoop => "self_loop",
            DiscardReason::DuplicateEdge => "duplicate_edge",
            DiscardReason::LabelConflict => "label_conflict",
            DiscardReason::AfterStop => "after_stop",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscardedEntry {
    pub position: usize,
    pub reason: DiscardReason,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReconstructionReport {
    pub kept: usize,
    pub discarded: Vec<DiscardedEntry>,
}

impl ReconstructionReport {
    pub fn is_clean(&self) -> bool {
        self.discarded.is_empty()
    }
}

/// Rebuilds a graph from a possibly inconsistent reduced code. Node `t` of
/// the result is the node with timestamp `t`; edges appear in kept order.
pub fn graph_from_reduced(
    code: &ReducedCode,
    policy: ReconstructionPolicy,
) -> (LabeledGraph, ReconstructionReport) {
    let mut report = ReconstructionReport::default();
    let entries = code.entries();
    let Some(first) = entries.first() else {
        return (LabeledGraph::empty("generated"), report);
    };
    if (first.from, first.to) != (0, 1) {
        report.discarded = (0..entries.len())
            .map(|position| DiscardedEntry {
                position,
                reason: if position == 0 {
                    DiscardReason::MissingRoot
                } else {
                    DiscardReason::AfterStop
                },
            })
            .collect();
        return (LabeledGraph::empty("generated"), report);
    }

    let mut labels = vec![first.token.from_label.clone(), first.token.to_label.clone()];
    let mut edges = vec![Edge::new(0, 1, first.token.edge_label.clone())];
    let mut present: HashSet<(usize, usize)> = HashSet::from([(0, 1)]);
    report.kept = 1;

    let mut stopped = false;
    for (position, t) in entries.iter().enumerate().skip(1) {
        if stopped {
            report.discarded.push(DiscardedEntry {
                position,
                reason: DiscardReason::AfterStop,
            });
            continue;
        }
        let n = labels.len();
        let verdict = if t.from == t.to {
            Err(DiscardReason::SelfLoop)
        } else if t.from < n && t.to < n {
            if present.contains(&(t.from.min(t.to), t.from.max(t.to))) {
                Err(DiscardReason::DuplicateEdge)
            } else if labels[t.from] != t.token.from_label || labels[t.to] != t.token.to_label {
                Err(DiscardReason::LabelConflict)
            } else {
                Ok(false)
            }
        } else if t.from < n && t.to == n {
            if labels[t.from] != t.token.from_label {
                Err(DiscardReason::LabelConflict)
            } else {
                Ok(true)
            }
        } else {
            Err(DiscardReason::UnknownTimestamp)
        };
        match verdict {
            Ok(creates_node) => {
                if creates_node {
                    labels.push(t.token.to_label.clone());
                }
                present.insert((t.from.min(t.to), t.from.max(t.to)));
                edges.push(Edge::new(t.from, t.to, t.token.edge_label.clone()));
                report.kept += 1;
            }
            Err(reason) => {
                report.discarded.push(DiscardedEntry { position, reason });
                stopped = policy == ReconstructionPolicy::StopAtFirstInvalid;
            }
        }
    }
    let graph = LabeledGraph::new("generated", labels, edges)
        .expect("kept entries form a valid graph");
    (graph, report)
}
