//! Labeled graph generation over reduced minimum DFS codes.

pub mod autodiff;
pub mod canonical;
pub mod dataset;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod model;
pub mod seeding;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{Edge, LabelAlphabets, LabeledGraph};
