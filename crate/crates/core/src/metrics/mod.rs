//! Evaluation of generated graph samples: descriptor histograms compared by
//! MMD, the NSPDK graph kernel, and novelty and uniqueness.

mod descriptor;
mod evaluate;
mod mmd;
mod nspdk;
mod orbits;

pub use descriptor::{clustering_coefficients, descriptor, Bin, Descriptor, DescriptorKind, CLUSTERING_BINS};
pub use evaluate::{evaluate, novelty_pct, uniqueness_pct, MetricReport, Protocol, RoundValues, ValidityHook};
pub use mmd::{mmd, mmd_squared_with, mmd_with, KernelConfig};
pub use nspdk::{nspdk_features, nspdk_features_all, nspdk_kernel, NspdkConfig, NspdkFeatures};
pub use orbits::{orbit_counts, ORBIT_COUNT};
