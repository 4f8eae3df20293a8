//! Training corpora: token vocabulary, reduced-code files, fixed splits,
//! degree augmentation and the random-walk subgraph sampler.

mod sampler;
mod split;
mod vocab;

pub use sampler::{sample_subgraphs, select_start_node, WalkConfig};
pub use split::{
    format_split, parse_split, read_split_file, split, write_split_file, Part, SplitSpec,
};
pub use vocab::{
    build_vocabulary, format_reduced_codes, parse_reduced_codes, NamedCode, TokenVocabulary,
};

use crate::graph::LabeledGraph;

/// Appends `:<degree>` to every node label. Not idempotent.
pub fn augment_with_degree(g: &LabeledGraph) -> LabeledGraph {
    let labels = (0..g.node_count())
        .map(|v| format!("{}:{}", g.node_label(v), g.degree(v)))
        .collect();
    let edge_labels = g.edges().iter().map(|e| e.label.clone()).collect();
    g.relabeled(labels, edge_labels)
        .expect("augmented labels are nonempty")
}
