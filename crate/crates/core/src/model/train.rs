use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::network::check_sequences;
use super::{batch_gradients, mean_loss, EncodedSequence, ModelParams};
use crate::autodiff::{Adam, LrSchedule, Real};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub schedule: LrSchedule,
    /// Drop rate between recurrent layers.
    pub dropout: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 32,
            schedule: LrSchedule::default(),
            dropout: 0.2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub lr: f64,
    /// Mean per-sequence loss over the epoch's minibatches, dropout on.
    pub train_loss: f64,
    /// Mean per-sequence validation loss, dropout off.
    pub val_loss: Option<f64>,
}

/// Rounds to 12 significant digits so that logged rates read back as the
/// decimal values of the schedule.
fn tidy(x: f64) -> f64 {
    format!("{x:.11e}").parse().unwrap_or(x)
}

impl fmt::Display for EpochLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "epoch {} lr {} train_loss {:.6}", self.epoch, tidy(self.lr), self.train_loss)?;
        match self.val_loss {
            Some(v) => write!(f, " val_loss {v:.6}"),
            None => write!(f, " val_loss nan"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    /// Parameters with the lowest validation loss, or the last ones when
    /// there is no validation set.
    pub best: ModelParams<T>,
    pub last: ModelParams<T>,
    /// Epoch of `best`; 0 means the initialization.
    pub best_epoch: usize,
    pub log: Vec<EpochLog>,
}

/// Minibatch Adam with the step schedule. Deterministic for a fixed seed.
pub fn train<T: Real>(
    init: ModelParams<T>,
    train_set: &[EncodedSequence],
    val_set: &[EncodedSequence],
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochLog),
) -> Result<TrainOutcome<T>> {
    if train_set.is_empty() {
        return Err(Error::Training("empty training corpus".into()));
    }
    if cfg.batch_size == 0 {
        return Err(Error::Training("batch_size must be positive".into()));
    }
    let model_cfg = *init.config();
    check_sequences(&model_cfg, &train_set.iter().collect::<Vec<_>>())?;
    check_sequences(&model_cfg, &val_set.iter().collect::<Vec<_>>())?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = init;
    let mut adam = Adam::new(params.tensors());
    let mut best = params.clone();
    let mut best_epoch = 0;
    let mut best_val = if val_set.is_empty() || cfg.epochs == 0 {
        f64::INFINITY
    } else {
        mean_loss(&params, val_set, cfg.batch_size)?
    };
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut log = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        let lr = cfg.schedule.lr(epoch);
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&EncodedSequence> = chunk.iter().map(|&i| &train_set[i]).collect();
            let (value, grads) = batch_gradients(&params, &batch, cfg.dropout, true, &mut rng)?;
            if !value.is_finite() {
                return Err(Error::Training(format!("loss became {value} at epoch {epoch}")));
            }
            epoch_loss += value * batch.len() as f64;
            adam.step(params.tensors_mut(), &grads, lr)?;
        }
        let val_loss = if val_set.is_empty() {
            None
        } else {
            Some(mean_loss(&params, val_set, cfg.batch_size)?)
        };
        if let Some(v) = val_loss {
            if v < best_val {
                best_val = v;
                best = params.clone();
                best_epoch = epoch;
            }
        }
        let entry = EpochLog {
            epoch,
            lr,
            train_loss: epoch_loss / train_set.len() as f64,
            val_loss,
        };
        on_epoch(&entry);
        log.push(entry);
    }
    if val_set.is_empty() {
        best = params.clone();
        best_epoch = cfg.epochs;
    }
    Ok(TrainOutcome {
        best,
        last: params,
        best_epoch,
        log,
    })
}
