//! `ggredux`: preprocessing, training, sampling and evaluation of labeled
//! graph generators over reduced minimum DFS codes.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use config::{Overrides, RunConfig};
use error::CliError;

/// File formats and their versions, printed by `--version`.
const FORMATS: &[(&str, u32)] = &[
    ("graph-transactions", 1),
    ("reduced-codes", 1),
    ("vocabulary", 1),
    ("split", 1),
    ("checkpoint", ggredux_core::model::CHECKPOINT_VERSION),
    ("report", 1),
    ("run-config", 1),
];

#[derive(Debug, Parser)]
#[command(name = "ggredux", disable_version_flag = true, about = "Labeled graph generation over reduced minimum DFS codes")]
struct Cli {
    /// Print the program and file format versions.
    #[arg(short = 'V', long)]
    version: bool,

    /// Flat key=value config file; `--key value` flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Canonicalize graphs into reduced codes and build the vocabulary.
    Preprocess {
        /// Append each node's degree to its label first.
        #[arg(long)]
        augment_degree: bool,
    },
    /// Assign graphs to train, validation and test parts.
    Split,
    /// Train a model and write the best checkpoint.
    Train,
    /// Sample codes, rebuild graphs and write them out.
    Generate {
        /// Take the most likely index at every step.
        #[arg(long)]
        greedy: bool,
    },
    /// Compare generated graphs against a reference set.
    Evaluate,
    /// Print minimum DFS codes, or compare two graphs by id.
    Canon {
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        check_iso: Option<Vec<String>>,
    },
    /// Extract random-walk subgraphs from one large network.
    SampleCitation,
    /// Print corpus statistics.
    Stats,
}

fn version_text() -> String {
    let mut s = format!("ggredux {}", env!("CARGO_PKG_VERSION"));
    for (name, v) in FORMATS {
        s.push_str(&format!("\n{name} {v}"));
    }
    s
}

fn run(cli: Cli) -> Result<(), CliError> {
    let Some(command) = cli.command else {
        return Err(CliError::Usage("no subcommand given; see --help".into()));
    };
    let cfg = RunConfig::resolve(cli.config.as_deref(), &cli.overrides)?;
    if let Some(n) = cfg.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    for (k, v) in cfg.entries() {
        info!("config {k}={v}");
    }
    match command {
        Cmd::Preprocess { augment_degree } => commands::preprocess(&cfg, augment_degree),
        Cmd::Split => commands::split(&cfg),
        Cmd::Train => commands::train_cmd(&cfg),
        Cmd::Generate { greedy } => commands::generate(&cfg, greedy),
        Cmd::Evaluate => commands::evaluate_cmd(&cfg),
        Cmd::Canon { check_iso } => commands::canon(&cfg, check_iso.as_deref()),
        Cmd::SampleCitation => commands::sample_citation(&cfg),
        Cmd::Stats => commands::stats(&cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if cli.version {
        println!("{}", version_text());
        return ExitCode::SUCCESS;
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.one_line());
            ExitCode::FAILURE
        }
    }
}
