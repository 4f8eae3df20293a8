use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use rand::seq::index;
use rayon::prelude::*;

use super::descriptor::{descriptor, Descriptor, DescriptorKind};
use super::mmd::{mmd, mmd_with, KernelConfig};
use super::nspdk::{nspdk_features_all, NspdkConfig};
use crate::canonical::canonical_label;
use crate::error::{Error, Result};
use crate::graph::{format_graphs, LabeledGraph};
use crate::seeding::stream_rng;

/// Batch size, round count and kernel settings of one evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    pub batch: usize,
    pub rounds: usize,
    /// Seeds the reference subsample of each round.
    pub seed: u64,
    pub kernel: KernelConfig,
    pub nspdk: NspdkConfig,
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol {
            batch: 256,
            rounds: 10,
            seed: 0,
            kernel: KernelConfig::default(),
            nspdk: NspdkConfig::default(),
        }
    }
}

/// Per-round values of one metric and their mean.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundValues {
    pub name: String,
    pub rounds: Vec<f64>,
    pub mean: f64,
}

impl RoundValues {
    fn new(name: impl Into<String>, rounds: Vec<f64>) -> Self {
        let mean = rounds.iter().sum::<f64>() / rounds.len().max(1) as f64;
        RoundValues { name: name.into(), rounds, mean }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub batch: usize,
    /// One entry per descriptor kind, in [`DescriptorKind::ALL`] order.
    pub descriptors: Vec<RoundValues>,
    pub nspdk: RoundValues,
    /// Generated and reference means.
    pub avg_nodes: (f64, f64),
    pub avg_edges: (f64, f64),
    /// Absent when no training corpus was given.
    pub novelty_pct: Option<f64>,
    pub uniqueness_pct: f64,
    pub validity_pct: Option<f64>,
}

impl MetricReport {
    pub fn rounds(&self) -> usize {
        self.nspdk.rounds.len()
    }

    pub fn mmd(&self, kind: DescriptorKind) -> f64 {
        self.descriptors
            .iter()
            .find(|v| v.name == kind.name())
            .map(|v| v.mean)
            .unwrap_or(f64::NAN)
    }

    /// Flat `key=value` lines.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        line("rounds", self.rounds().to_string());
        line("batch", self.batch.to_string());
        let metrics = self
            .descriptors
            .iter()
            .map(|v| (format!("mmd_{}", v.name), v))
            .chain(std::iter::once(("nspdk".to_string(), &self.nspdk)));
        for (key, v) in metrics {
            line(&key, format!("{}", v.mean));
            for (i, r) in v.rounds.iter().enumerate() {
                line(&format!("{key}_round_{i}"), format!("{r}"));
            }
        }
        line("avg_nodes_gen", format!("{}", self.avg_nodes.0));
        line("avg_nodes_ref", format!("{}", self.avg_nodes.1));
        line("avg_edges_gen", format!("{}", self.avg_edges.0));
        line("avg_edges_ref", format!("{}", self.avg_edges.1));
        if let Some(n) = self.novelty_pct {
            line("novelty_pct", format!("{n}"));
        }
        line("uniqueness_pct", format!("{}", self.uniqueness_pct));
        if let Some(v) = self.validity_pct {
            line("validity_pct", format!("{v}"));
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_key_values())?;
        Ok(())
    }
}

impl fmt::Display for MetricReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<14} {:>12}", "metric", "mean")?;
        for v in self.descriptors.iter().chain(std::iter::once(&self.nspdk)) {
            writeln!(f, "{:<14} {:>12.6}", v.name, v.mean)?;
        }
        writeln!(f, "{:<14} {:>12}", "avg_nodes", format!("{:.1}/{:.1}", self.avg_nodes.0, self.avg_nodes.1))?;
        writeln!(f, "{:<14} {:>12}", "avg_edges", format!("{:.1}/{:.1}", self.avg_edges.0, self.avg_edges.1))?;
        if let Some(n) = self.novelty_pct {
            writeln!(f, "{:<14} {:>12.2}", "novelty_pct", n)?;
        }
        write!(f, "{:<14} {:>12.2}", "uniqueness_pct", self.uniqueness_pct)?;
        if let Some(v) = self.validity_pct {
            write!(f, "\n{:<14} {:>12.2}", "validity_pct", v)?;
        }
        Ok(())
    }
}

fn mean_by(graphs: &[LabeledGraph], f: impl Fn(&LabeledGraph) -> usize) -> f64 {
    graphs.iter().map(|g| f(g) as f64).sum::<f64>() / graphs.len().max(1) as f64
}

/// Percentage of `generated` whose canonical label is absent from `training`.
pub fn novelty_pct(generated: &[LabeledGraph], training: &[LabeledGraph]) -> f64 {
    let known: HashSet<String> = training.par_iter().map(canonical_label).collect();
    let labels: Vec<String> = generated.par_iter().map(canonical_label).collect();
    let novel = labels.iter().filter(|l| !known.contains(*l)).count();
    100.0 * novel as f64 / generated.len().max(1) as f64
}

/// Percentage of distinct canonical labels among `generated`.
pub fn uniqueness_pct(generated: &[LabeledGraph]) -> f64 {
    let labels: HashSet<String> = generated.par_iter().map(canonical_label).collect();
    100.0 * labels.len() as f64 / generated.len().max(1) as f64
}

/// Round `i` compares generated graphs `i*batch..(i+1)*batch` against a
/// uniform subsample (without replacement) of at most `batch` reference
/// graphs, drawn from stream `i` of the protocol seed.
pub fn evaluate(
    generated: &[LabeledGraph],
    reference: &[LabeledGraph],
    training: Option<&[LabeledGraph]>,
    protocol: &Protocol,
) -> Result<MetricReport> {
    let (batch, rounds) = (protocol.batch, protocol.rounds);
    if batch == 0 || rounds == 0 {
        return Err(Error::Metric("batch and rounds must be positive".into()));
    }
    let needed = batch * rounds;
    if generated.len() < needed {
        return Err(Error::Metric(format!(
            "need {needed} generated graphs for {rounds} rounds of {batch}, have {}",
            generated.len()
        )));
    }
    if reference.is_empty() {
        return Err(Error::Metric("empty reference set".into()));
    }
    let generated = &generated[..needed];
    let describe = |gs: &[LabeledGraph]| -> Vec<Vec<Descriptor>> {
        DescriptorKind::ALL
            .iter()
            .map(|&k| gs.par_iter().map(|g| descriptor(g, k)).collect())
            .collect()
    };
    let gen_desc = describe(generated);
    let ref_desc = describe(reference);
    let gen_feat = nspdk_features_all(generated, &protocol.nspdk);
    let ref_feat = nspdk_features_all(reference, &protocol.nspdk);

    let mut per_kind = vec![Vec::with_capacity(rounds); DescriptorKind::ALL.len()];
    let mut nspdk = Vec::with_capacity(rounds);
    for round in 0..rounds {
        let gen_range = round * batch..(round + 1) * batch;
        let mut rng = stream_rng(protocol.seed, round as u64);
        let picked = index::sample(&mut rng, reference.len(), batch.min(reference.len())).into_vec();
        for (k, values) in per_kind.iter_mut().enumerate() {
            let refs: Vec<Descriptor> = picked.iter().map(|&i| ref_desc[k][i].clone()).collect();
            values.push(mmd(&gen_desc[k][gen_range.clone()], &refs, &protocol.kernel)?);
        }
        let refs: Vec<_> = picked.iter().map(|&i| ref_feat[i].clone()).collect();
        nspdk.push(mmd_with(&gen_feat[gen_range], &refs, |a, b| a.kernel(b)));
    }

    Ok(MetricReport {
        batch,
        descriptors: DescriptorKind::ALL
            .iter()
            .zip(per_kind)
            .map(|(k, v)| RoundValues::new(k.name(), v))
            .collect(),
        nspdk: RoundValues::new("nspdk", nspdk),
        avg_nodes: (mean_by(generated, LabeledGraph::node_count), mean_by(reference, LabeledGraph::node_count)),
        avg_edges: (mean_by(generated, LabeledGraph::edge_count), mean_by(reference, LabeledGraph::edge_count)),
        novelty_pct: training.map(|t| novelty_pct(generated, t)),
        uniqueness_pct: uniqueness_pct(generated),
        validity_pct: None,
    })
}

/// External validity checker. The program receives one graph in
/// transaction format on standard input and prints `valid` or `invalid`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidityHook {
    pub program: PathBuf,
    pub args: Vec<String>,
}

impl ValidityHook {
    pub fn check(&self, g: &LabeledGraph) -> Result<bool> {
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()?;
        let text = format_graphs(std::slice::from_ref(g))?;
        child
            .stdin
            .take()
            .expect("piped stdin")
            .write_all(text.as_bytes())?;
        let out = child.wait_with_output()?;
        match String::from_utf8_lossy(&out.stdout).trim() {
            "valid" => Ok(true),
            "invalid" => Ok(false),
            other => Err(Error::Metric(format!(
                "validity hook {} answered {other:?} ({})",
                self.program.display(),
                out.status
            ))),
        }
    }

    /// Percentage of graphs the hook accepts; one process per graph, run in
    /// parallel.
    pub fn validity_pct(&self, graphs: &[LabeledGraph]) -> Result<f64> {
        let verdicts: Vec<bool> = graphs.par_iter().map(|g| self.check(g)).collect::<Result<_>>()?;
        Ok(100.0 * verdicts.iter().filter(|&&v| v).count() as f64 / graphs.len().max(1) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{corpus, SynthConfig};

    #[test]
    fn self_evaluation_is_zero() {
        let gs = corpus(1, 12, &SynthConfig::default());
        let p = Protocol { batch: gs.len(), rounds: 1, ..Protocol::default() };
        let r = evaluate(&gs, &gs, Some(&gs), &p).unwrap();
        for v in &r.descriptors {
            assert!(v.mean <= 1e-9, "{} = {}", v.name, v.mean);
        }
        assert!(r.nspdk.mean <= 1e-9);
        assert_eq!(r.novelty_pct, Some(0.0));
        assert_eq!(r.avg_nodes.0, r.avg_nodes.1);
    }

    #[test]
    fn rounds_and_report_keys() {
        let gs = corpus(2, 20, &SynthConfig::default());
        let p = Protocol { batch: 4, rounds: 5, ..Protocol::default() };
        let r = evaluate(&gs, &gs[..6], None, &p).unwrap();
        assert_eq!(r.rounds(), 5);
        let text = r.to_key_values();
        assert!(text.contains("mmd_degree_round_4="));
        assert!(text.contains("nspdk_round_0="));
        assert!(!text.contains("novelty_pct"));
        assert!(evaluate(&gs, &gs, None, &Protocol { batch: 7, rounds: 3, ..p }).is_err());
    }

    #[test]
    fn uniqueness_counts_duplicates() {
        let gs = corpus(3, 4, &SynthConfig::default());
        let mut doubled = gs.clone();
        doubled.extend(gs.iter().cloned());
        assert_eq!(uniqueness_pct(&doubled), 50.0);
        assert_eq!(novelty_pct(&gs, &gs[..2]), 50.0);
    }
}
