use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use log::info;
use rayon::prelude::*;

use ggredux_core::canonical::{canonical_label, graph_from_reduced, min_dfs_code, reduce, reduced_codes, ReducedCode};
use ggredux_core::dataset::{
    augment_with_degree, build_vocabulary, format_reduced_codes, parse_reduced_codes, read_split_file,
    sample_subgraphs, write_split_file, NamedCode, Part, SplitSpec, TokenVocabulary,
};
use ggredux_core::graph::{parse_graph_file, write_graph_file};
use ggredux_core::metrics::{evaluate, ValidityHook};
use ggredux_core::model::{
    default_max_steps, encode_sequence, load_checkpoint, sample_many, save_checkpoint, train, ModelConfig,
    ModelParams, SampleMode,
};
use ggredux_core::seeding::component_seed;
use ggredux_core::{LabelAlphabets, LabeledGraph};

use crate::config::RunConfig;
use crate::error::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn context<T>(r: ggredux_core::Result<T>, what: impl FnOnce() -> String) -> Result<T> {
    r.map_err(|source| CliError::Context { context: what(), source })
}

fn read_graphs(path: &Path) -> Result<Vec<LabeledGraph>> {
    context(parse_graph_file(path), || format!("reading {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn load_vocab(path: &Path) -> Result<TokenVocabulary> {
    context(TokenVocabulary::load(path), || format!("reading {}", path.display()))
}

fn load_codes(path: &Path, vocab: &TokenVocabulary) -> Result<Vec<NamedCode>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    context(parse_reduced_codes(&text, vocab), || format!("reading {}", path.display()))
}

pub fn preprocess(cfg: &RunConfig, augment_degree: bool) -> Result<()> {
    let mut graphs = read_graphs(cfg.require("graphs", &cfg.graphs)?)?;
    let codes_path = cfg.require("codes", &cfg.codes)?;
    let vocab_path = cfg.require("vocab", &cfg.vocab)?;
    if augment_degree {
        graphs = graphs.par_iter().map(augment_with_degree).collect();
    }
    if graphs.is_empty() {
        write_text(codes_path, "")?;
        write_text(vocab_path, "")?;
        info!("no graphs; wrote empty outputs");
        return Ok(());
    }
    let mut named = Vec::with_capacity(graphs.len());
    for (g, code) in graphs.iter().zip(reduced_codes(&graphs)) {
        named.push((g.id().to_string(), context(code, || format!("graph {}", g.id()))?));
    }
    let largest = graphs.iter().map(LabeledGraph::node_count).max().unwrap_or(0);
    let max_nodes = cfg.max_nodes.unwrap_or(largest);
    let codes: Vec<ReducedCode> = named.iter().map(|(_, c)| c.clone()).collect();
    let vocab = build_vocabulary(&codes, max_nodes)?;
    write_text(codes_path, &format_reduced_codes(&named, &vocab)?)?;
    context(vocab.save(vocab_path), || format!("writing {}", vocab_path.display()))?;
    let alphabets = LabelAlphabets::from_graphs(&graphs);
    let bound = alphabets.node_labels.len().pow(2) * alphabets.edge_labels.len();
    println!(
        "graphs={} tokens={} token_bound={} max_nodes={} timestamp_width={} token_width={}",
        graphs.len(),
        vocab.len(),
        bound,
        vocab.max_nodes(),
        vocab.timestamp_width(),
        vocab.token_width()
    );
    Ok(())
}

pub fn split(cfg: &RunConfig) -> Result<()> {
    let graphs = read_graphs(cfg.require("graphs", &cfg.graphs)?)?;
    let out = cfg.require("splits", &cfg.splits)?;
    let spec = SplitSpec::with_seed(component_seed(cfg.seed, "split"));
    let entries: Vec<(String, Part)> = graphs
        .iter()
        .zip(spec.membership(graphs.len()))
        .map(|(g, p)| (g.id().to_string(), p))
        .collect();
    context(write_split_file(&entries, out), || format!("writing {}", out.display()))?;
    let (train, val, test) = spec.sizes(graphs.len());
    println!("train={train} val={val} test={test}");
    Ok(())
}

/// Codes grouped by split part. Without a split file everything trains.
fn partition(cfg: &RunConfig, codes: Vec<NamedCode>) -> Result<HashMap<Part, Vec<NamedCode>>> {
    let mut out: HashMap<Part, Vec<NamedCode>> = HashMap::new();
    let Some(path) = &cfg.splits else {
        out.insert(Part::Train, codes);
        return Ok(out);
    };
    let membership: HashMap<String, Part> =
        context(read_split_file(path), || format!("reading {}", path.display()))?.into_iter().collect();
    for (id, code) in codes {
        let part = *membership
            .get(&id)
            .ok_or_else(|| CliError::Usage(format!("code {id} is not listed in {}", path.display())))?;
        out.entry(part).or_default().push((id, code));
    }
    Ok(out)
}

pub fn train_cmd(cfg: &RunConfig) -> Result<()> {
    let vocab = load_vocab(cfg.require("vocab", &cfg.vocab)?)?;
    let codes = load_codes(cfg.require("codes", &cfg.codes)?, &vocab)?;
    let ckpt = cfg.require("checkpoint", &cfg.checkpoint)?;
    let parts = partition(cfg, codes)?;
    let encode = |part: Part| -> Result<Vec<_>> {
        Ok(parts
            .get(&part)
            .map(|v| v.iter().map(|(_, c)| encode_sequence(c, &vocab)).collect::<ggredux_core::Result<Vec<_>>>())
            .transpose()?
            .unwrap_or_default())
    };
    let (train_set, val_set) = (encode(Part::Train)?, encode(Part::Val)?);
    let model_cfg = ModelConfig {
        embed: cfg.embed,
        hidden: cfg.hidden,
        layers: cfg.layers,
        head_hidden: cfg.head_hidden,
        ..ModelConfig::for_vocabulary(&vocab)
    };
    let init = ModelParams::<f32>::init(model_cfg, component_seed(cfg.seed, "init"))?;
    info!(
        "parameters={} train_sequences={} val_sequences={}",
        init.param_count(),
        train_set.len(),
        val_set.len()
    );
    println!("parameters={}", init.param_count());
    let mut log_text = String::new();
    let outcome = train(init, &train_set, &val_set, &cfg.train_config(component_seed(cfg.seed, "train")), |e| {
        println!("{e}");
        let _ = writeln!(log_text, "{e}");
    })?;
    if let Some(path) = &cfg.log {
        write_text(path, &log_text)?;
    }
    context(save_checkpoint(&outcome.best, &vocab.digest(), ckpt), || format!("writing {}", ckpt.display()))?;
    println!("best_epoch={}", outcome.best_epoch);
    Ok(())
}

/// Explicit `max_steps`, or twice the longest training code.
fn resolve_max_steps(cfg: &RunConfig, vocab: &TokenVocabulary) -> Result<usize> {
    if let Some(m) = cfg.max_steps {
        return Ok(m);
    }
    let Some(path) = &cfg.codes else {
        return Err(CliError::Usage("set max_steps, or codes so it can be derived".into()));
    };
    let parts = partition(cfg, load_codes(path, vocab)?)?;
    let longest = parts
        .get(&Part::Train)
        .map(|v| v.iter().map(|(_, c)| c.len()).max().unwrap_or(0))
        .unwrap_or(0);
    Ok(default_max_steps(longest))
}

pub fn generate(cfg: &RunConfig, greedy: bool) -> Result<()> {
    let vocab = load_vocab(cfg.require("vocab", &cfg.vocab)?)?;
    let ckpt = cfg.require("checkpoint", &cfg.checkpoint)?;
    let out = cfg.require("generated", &cfg.generated)?;
    let params = context(load_checkpoint(ckpt, &vocab.digest()), || format!("reading {}", ckpt.display()))?;
    let max_steps = resolve_max_steps(cfg, &vocab)?;
    let mode = if greedy { SampleMode::Greedy } else { SampleMode::Stochastic };
    let samples = sample_many(
        &params,
        &vocab,
        cfg.sample_count,
        max_steps,
        component_seed(cfg.seed, "generate"),
        mode,
    )?;
    let rebuilt: Vec<_> = samples
        .par_iter()
        .enumerate()
        .map(|(i, (code, _))| {
            let (g, report) = graph_from_reduced(code, cfg.reconstruction);
            (g.with_id(format!("gen{i}")), report)
        })
        .collect();
    let mut report_text = String::new();
    let (mut nonempty, mut truncated, mut clean) = (0, 0, 0);
    for (i, ((_, gen), (g, rec))) in samples.iter().zip(&rebuilt).enumerate() {
        nonempty += usize::from(!g.is_empty());
        truncated += usize::from(gen.truncated);
        clean += usize::from(rec.is_clean());
        let reasons: Vec<String> = rec.discarded.iter().map(|d| format!("{}:{}", d.position, d.reason)).collect();
        let _ = writeln!(
            report_text,
            "{i} steps={} truncated={} kept={} discarded={} nodes={} edges={} reasons={}",
            gen.steps,
            gen.truncated,
            rec.kept,
            rec.discarded.len(),
            g.node_count(),
            g.edge_count(),
            reasons.join(",")
        );
    }
    let graphs: Vec<LabeledGraph> = rebuilt.into_iter().map(|(g, _)| g).collect();
    context(write_graph_file(&graphs, out), || format!("writing {}", out.display()))?;
    if let Some(path) = &cfg.recon_report {
        write_text(path, &report_text)?;
    }
    println!(
        "generated={} nonempty={nonempty} clean={clean} truncated={truncated} max_steps={max_steps}",
        graphs.len()
    );
    Ok(())
}

pub fn evaluate_cmd(cfg: &RunConfig) -> Result<()> {
    let generated = read_graphs(cfg.require("generated", &cfg.generated)?)?;
    let reference = read_graphs(cfg.require("reference", &cfg.reference)?)?;
    let training = cfg.training.as_deref().map(read_graphs).transpose()?;
    let protocol = cfg.protocol(component_seed(cfg.seed, "evaluate"));
    let mut report = evaluate(&generated, &reference, training.as_deref(), &protocol)?;
    if let Some(program) = &cfg.validity_hook {
        let hook = ValidityHook { program: program.clone(), args: Vec::new() };
        report.validity_pct = Some(hook.validity_pct(&generated[..protocol.batch * protocol.rounds])?);
    }
    println!("{report}");
    if let Some(path) = &cfg.report {
        write_text(path, &report.to_key_values())?;
    }
    Ok(())
}

pub fn canon(cfg: &RunConfig, check_iso: Option<&[String]>) -> Result<()> {
    let graphs = read_graphs(cfg.require("graphs", &cfg.graphs)?)?;
    if let Some([a, b]) = check_iso {
        let find = |id: &str| {
            graphs
                .iter()
                .find(|g| g.id() == id)
                .ok_or_else(|| CliError::Usage(format!("no graph with id {id}")))
        };
        let same = canonical_label(find(a)?) == canonical_label(find(b)?);
        println!("isomorphic={same}");
        return Ok(());
    }
    let mut out = String::new();
    for g in &graphs {
        let code = context(min_dfs_code(g), || format!("graph {}", g.id()))?;
        let _ = writeln!(out, "t # {}\ndfs {code}\nreduced {}", g.id(), reduce(&code));
    }
    print!("{out}");
    Ok(())
}

pub fn sample_citation(cfg: &RunConfig) -> Result<()> {
    let path = cfg.require("big_graph", &cfg.big_graph)?;
    let out = cfg.require("graphs", &cfg.graphs)?;
    let mut big = read_graphs(path)?;
    if big.len() != 1 {
        return Err(CliError::Usage(format!("{} holds {} graphs, expected one", path.display(), big.len())));
    }
    let big = big.remove(0);
    let samples = sample_subgraphs(&big, cfg.subgraphs, &cfg.walk(), component_seed(cfg.seed, "sample_citation"))?;
    context(write_graph_file(&samples, out), || format!("writing {}", out.display()))?;
    let nodes: usize = samples.iter().map(LabeledGraph::node_count).sum();
    println!(
        "subgraphs={} avg_nodes={:.2}",
        samples.len(),
        nodes as f64 / samples.len().max(1) as f64
    );
    Ok(())
}

pub fn stats(cfg: &RunConfig) -> Result<()> {
    let graphs = read_graphs(cfg.require("graphs", &cfg.graphs)?)?;
    let n = graphs.len().max(1) as f64;
    let nodes: Vec<usize> = graphs.iter().map(LabeledGraph::node_count).collect();
    let edges: Vec<usize> = graphs.iter().map(LabeledGraph::edge_count).collect();
    let alphabets = LabelAlphabets::from_graphs(&graphs);
    let connected = graphs.iter().filter(|g| g.is_connected()).count();
    let distinct: HashSet<String> = graphs.par_iter().map(canonical_label).collect();
    println!("graphs={}", graphs.len());
    println!("connected={connected}");
    println!("distinct={}", distinct.len());
    println!("avg_nodes={:.4}", nodes.iter().sum::<usize>() as f64 / n);
    println!("max_nodes={}", nodes.iter().max().unwrap_or(&0));
    println!("avg_edges={:.4}", edges.iter().sum::<usize>() as f64 / n);
    println!("max_edges={}", edges.iter().max().unwrap_or(&0));
    println!("node_labels={}", alphabets.node_labels.len());
    println!("edge_labels={}", alphabets.edge_labels.len());
    println!(
        "token_bound={}",
        alphabets.node_labels.len().pow(2) * alphabets.edge_labels.len()
    );
    if let Some(path) = &cfg.vocab {
        let vocab = load_vocab(path)?;
        println!("tokens={}", vocab.len());
        println!("vocab_bound={}", vocab.combination_bound());
    }
    Ok(())
}
