use rayon::prelude::*;

use super::descriptor::Descriptor;
use crate::error::{Error, Result};

/// Gaussian kernel over the total variation distance of two histograms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    pub sigma: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig { sigma: 1.0 }
    }
}

impl KernelConfig {
    pub fn eval(&self, a: &Descriptor, b: &Descriptor) -> f64 {
        let tv = a.total_variation(b);
        (-(tv * tv) / (2.0 * self.sigma * self.sigma)).exp()
    }
}

/// Sum of `k(a_i, b_j)` over all pairs, skipping `i == j` when
/// `off_diagonal`. Rows are reduced in parallel and summed in order.
fn block_sum<X: Sync>(a: &[X], b: &[X], off_diagonal: bool, k: &(impl Fn(&X, &X) -> f64 + Sync)) -> f64 {
    let rows: Vec<f64> = a
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            b.iter()
                .enumerate()
                .filter(|&(j, _)| !(off_diagonal && i == j))
                .map(|(_, y)| k(x, y))
                .sum()
        })
        .collect();
    rows.iter().sum()
}

/// Squared MMD for an arbitrary kernel. Within-sample terms use the
/// unbiased off-diagonal mean when a sample has at least two members and
/// the plain mean (the diagonal) for singletons. Not clipped.
pub fn mmd_squared_with<X: Sync>(a: &[X], b: &[X], k: impl Fn(&X, &X) -> f64 + Sync) -> f64 {
    let within = |s: &[X]| {
        let n = s.len() as f64;
        if s.len() >= 2 {
            block_sum(s, s, true, &k) / (n * (n - 1.0))
        } else {
            block_sum(s, s, false, &k) / (n * n)
        }
    };
    let cross = block_sum(a, b, false, &k) / (a.len() as f64 * b.len() as f64);
    within(a) + within(b) - 2.0 * cross
}

/// MMD for an arbitrary kernel: the squared estimate clipped at zero, then
/// square-rooted.
pub fn mmd_with<X: Sync>(a: &[X], b: &[X], k: impl Fn(&X, &X) -> f64 + Sync) -> f64 {
    mmd_squared_with(a, b, k).max(0.0).sqrt()
}

/// MMD between two samples of descriptors of one kind.
pub fn mmd(a: &[Descriptor], b: &[Descriptor], kernel: &KernelConfig) -> Result<f64> {
    let Some(first) = a.first().or(b.first()) else {
        return Err(Error::Metric("mmd of empty samples".into()));
    };
    if a.is_empty() || b.is_empty() {
        return Err(Error::Metric("mmd needs two nonempty samples".into()));
    }
    if let Some(d) = a.iter().chain(b).find(|d| d.kind != first.kind) {
        return Err(Error::Metric(format!("descriptor kinds differ: {} and {}", first.kind, d.kind)));
    }
    Ok(mmd_with(a, b, |x, y| kernel.eval(x, y)))
}
