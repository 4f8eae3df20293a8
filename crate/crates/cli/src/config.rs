//! Flat `key=value` run configuration. Every key can also be given on the
//! command line as `--key value`, which wins over the config file.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use ggredux_core::autodiff::LrSchedule;
use ggredux_core::canonical::ReconstructionPolicy;
use ggredux_core::dataset::WalkConfig;
use ggredux_core::metrics::{KernelConfig, NspdkConfig, Protocol};
use ggredux_core::model::TrainConfig;

use crate::error::CliError;

/// Conversion between config text and typed values.
pub trait ConfigValue: Sized {
    fn parse_value(s: &str) -> Result<Self, String>;
    fn render(&self) -> String;
}

macro_rules! plain_value {
    ($($t:ty),*) => {$(
        impl ConfigValue for $t {
            fn parse_value(s: &str) -> Result<Self, String> {
                s.parse().map_err(|e| format!("{e}"))
            }
            fn render(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

plain_value!(u64, usize, f64);

impl ConfigValue for Option<PathBuf> {
    fn parse_value(s: &str) -> Result<Self, String> {
        Ok((!s.is_empty()).then(|| PathBuf::from(s)))
    }
    fn render(&self) -> String {
        self.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
    }
}

impl ConfigValue for Option<usize> {
    fn parse_value(s: &str) -> Result<Self, String> {
        if s.is_empty() {
            return Ok(None);
        }
        s.parse().map(Some).map_err(|e| format!("{e}"))
    }
    fn render(&self) -> String {
        self.map(|v| v.to_string()).unwrap_or_default()
    }
}

impl ConfigValue for Vec<usize> {
    fn parse_value(s: &str) -> Result<Self, String> {
        s.split(',')
            .filter(|p| !p.is_empty())
            .map(|p| p.trim().parse().map_err(|e| format!("{p:?}: {e}")))
            .collect()
    }
    fn render(&self) -> String {
        self.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
    }
}

impl ConfigValue for ReconstructionPolicy {
    fn parse_value(s: &str) -> Result<Self, String> {
        match s {
            "skip_invalid" => Ok(ReconstructionPolicy::SkipInvalid),
            "stop_at_first_invalid" => Ok(ReconstructionPolicy::StopAtFirstInvalid),
            _ => Err("expected skip_invalid or stop_at_first_invalid".into()),
        }
    }
    fn render(&self) -> String {
        match self {
            ReconstructionPolicy::SkipInvalid => "skip_invalid",
            ReconstructionPolicy::StopAtFirstInvalid => "stop_at_first_invalid",
        }
        .into()
    }
}

macro_rules! run_config {
    ($($key:ident : $ty:ty = $default:expr => $help:literal;)*) => {
        #[derive(Debug, Clone, PartialEq)]
        pub struct RunConfig {
            $(pub $key: $ty,)*
        }

        impl Default for RunConfig {
            fn default() -> Self {
                RunConfig { $($key: $default,)* }
            }
        }

        impl RunConfig {
            pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
                match key {
                    $(stringify!($key) => {
                        self.$key = <$ty as ConfigValue>::parse_value(value).map_err(|message| {
                            CliError::Config { key: key.to_string(), message }
                        })?;
                    })*
                    _ => return Err(CliError::UnknownKey(key.to_string())),
                }
                Ok(())
            }

            /// Every key with its current value, in declaration order.
            pub fn entries(&self) -> Vec<(&'static str, String)> {
                vec![$((stringify!($key), self.$key.render()),)*]
            }
        }

        /// Command-line form of every config key.
        #[derive(Debug, Clone, Default, clap::Args)]
        pub struct Overrides {
            $(
                #[arg(long = stringify!($key), value_name = "VALUE", global = true, help = $help)]
                pub $key: Option<String>,
            )*
        }

        impl Overrides {
            pub fn pairs(&self) -> Vec<(&'static str, &str)> {
                let mut out = Vec::new();
                $(if let Some(v) = &self.$key {
                    out.push((stringify!($key), v.as_str()));
                })*
                out
            }
        }
    };
}

run_config! {
    graphs: Option<PathBuf> = None => "graph transaction file";
    codes: Option<PathBuf> = None => "reduced code file";
    vocab: Option<PathBuf> = None => "token vocabulary file";
    splits: Option<PathBuf> = None => "split membership file";
    checkpoint: Option<PathBuf> = None => "model checkpoint";
    report: Option<PathBuf> = None => "metric report (key=value)";
    generated: Option<PathBuf> = None => "generated graphs";
    reference: Option<PathBuf> = None => "reference graphs for evaluation";
    training: Option<PathBuf> = None => "training graphs for novelty";
    big_graph: Option<PathBuf> = None => "network to sample subgraphs from";
    log: Option<PathBuf> = None => "training log file";
    recon_report: Option<PathBuf> = None => "per-sample reconstruction report";
    seed: u64 = 0 => "master seed";
    epochs: usize = 200 => "training epochs";
    batch_size: usize = 32 => "minibatch size";
    lr: f64 = 0.003 => "base learning rate";
    milestones: Vec<usize> = vec![100, 200, 400, 800] => "epochs after which lr decays";
    decay: f64 = 0.3 => "lr decay factor";
    dropout: f64 = 0.2 => "dropout between recurrent layers";
    embed: usize = 64 => "embedding width";
    hidden: usize = 128 => "recurrent state width";
    layers: usize = 4 => "recurrent layers";
    head_hidden: usize = 128 => "hidden width of each output head";
    max_nodes: Option<usize> = None => "timestamp alphabet size (default: largest graph)";
    sample_count: usize = 2560 => "sequences to generate";
    max_steps: Option<usize> = None => "sampling step cap (default: twice the longest training code)";
    reconstruction: ReconstructionPolicy = ReconstructionPolicy::SkipInvalid => "skip_invalid or stop_at_first_invalid";
    eval_batch: usize = 256 => "graphs per evaluation round";
    eval_rounds: usize = 10 => "evaluation rounds";
    nspdk_r: usize = 2 => "NSPDK maximum radius";
    nspdk_d: usize = 4 => "NSPDK maximum distance";
    mmd_sigma: f64 = 1.0 => "MMD kernel bandwidth";
    validity_hook: Option<PathBuf> = None => "external validity checker program";
    subgraphs: usize = 500 => "subgraphs to sample from a network";
    walk_count: usize = 150 => "random walks per sampled subgraph";
    restart_p: f64 = 0.15 => "walk restart probability";
    walk_len: usize = 30 => "steps per random walk";
    workers: Option<usize> = None => "worker threads (default: all cores)";
}

impl RunConfig {
    /// Defaults, then the config file, then command-line overrides.
    pub fn resolve(file: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = file {
            let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
            cfg.apply_text(&text)?;
        }
        for (k, v) in overrides.pairs() {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    /// Applies `key=value` lines; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| CliError::Config {
                key: format!("line {}", i + 1),
                message: format!("expected key=value, found {line:?}"),
            })?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn require<'a>(&self, key: &'static str, value: &'a Option<PathBuf>) -> Result<&'a Path, CliError> {
        value.as_deref().ok_or(CliError::MissingKey(key))
    }

    pub fn schedule(&self) -> LrSchedule {
        LrSchedule {
            base: self.lr,
            decay: self.decay,
            milestones: self.milestones.clone(),
        }
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            schedule: self.schedule(),
            dropout: self.dropout,
            seed,
        }
    }

    pub fn protocol(&self, seed: u64) -> Protocol {
        Protocol {
            batch: self.eval_batch,
            rounds: self.eval_rounds,
            seed,
            kernel: KernelConfig { sigma: self.mmd_sigma },
            nspdk: NspdkConfig { r_max: self.nspdk_r, d_max: self.nspdk_d },
        }
    }

    pub fn walk(&self) -> WalkConfig {
        WalkConfig {
            walks_per_sample: self.walk_count,
            restart_p: self.restart_p,
            walk_len: self.walk_len,
        }
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.entries() {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_overrides() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("# comment\nepochs=5\nmilestones=1,2\n\nlr = 0.1\n").unwrap();
        assert_eq!(cfg.epochs, 5);
        assert_eq!(cfg.milestones, vec![1, 2]);
        assert_eq!(cfg.lr, 0.1);
        let o = Overrides { epochs: Some("7".into()), ..Overrides::default() };
        for (k, v) in o.pairs() {
            cfg.set(k, v).unwrap();
        }
        assert_eq!(cfg.epochs, 7);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        let mut cfg = RunConfig::default();
        assert!(matches!(cfg.apply_text("epoch=3"), Err(CliError::UnknownKey(k)) if k == "epoch"));
        assert!(matches!(cfg.apply_text("epochs=three"), Err(CliError::Config { .. })));
        assert!(cfg.apply_text("epochs").is_err());
    }

    #[test]
    fn rendering_round_trips() {
        let cfg = RunConfig::default();
        let mut back = RunConfig::default();
        back.epochs = 1;
        back.apply_text(&cfg.to_string()).unwrap();
        assert_eq!(back, cfg);
    }
}
