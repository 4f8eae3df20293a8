//! The recurrent sequence model over reduced codes: parameters, sequence
//! encoding, teacher-forced training, sampling and checkpoints.

mod checkpoint;
mod network;
mod sample;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_VERSION};
pub use network::{batch_gradients, forward_teacher_forced, mean_loss, uniform_loss, StepOutput};
pub use sample::{default_max_steps, sample, sample_many, GenerationReport, SampleMode};
pub use train::{train, EpochLog, TrainConfig, TrainOutcome};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::autodiff::{Real, Tensor};
use crate::canonical::{ReducedCode, Triplet};
use crate::dataset::TokenVocabulary;
use crate::error::{Error, Result};

/// Layer sizes. Alphabet widths include the EOS and SOS slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelConfig {
    pub timestamp_width: usize,
    pub token_width: usize,
    pub embed: usize,
    pub hidden: usize,
    pub layers: usize,
    pub head_hidden: usize,
}

impl ModelConfig {
    /// Default layer sizes for a vocabulary.
    pub fn for_vocabulary(vocab: &TokenVocabulary) -> Self {
        ModelConfig::with_widths(vocab.timestamp_width(), vocab.token_width())
    }

    pub fn with_widths(timestamp_width: usize, token_width: usize) -> Self {
        ModelConfig {
            timestamp_width,
            token_width,
            embed: 64,
            hidden: 128,
            layers: 4,
            head_hidden: 128,
        }
    }

    /// Width of one encoded step: `t_u`, `t_v` and token one-hots.
    pub fn input_width(&self) -> usize {
        2 * self.timestamp_width + self.token_width
    }

    /// Output widths of the three heads in concatenation order.
    pub fn segments(&self) -> [usize; 3] {
        [self.timestamp_width, self.timestamp_width, self.token_width]
    }

    fn validate(&self) -> Result<()> {
        let dims = [
            self.timestamp_width,
            self.token_width,
            self.embed,
            self.hidden,
            self.layers,
            self.head_hidden,
        ];
        if dims.contains(&0) || self.timestamp_width < 3 || self.token_width < 3 {
            return Err(Error::Training(format!("degenerate model config {self:?}")));
        }
        Ok(())
    }

    /// Names and shapes of every parameter tensor, in storage order.
    pub fn layout(&self) -> Vec<(String, Vec<usize>)> {
        let mut out = vec![
            ("emb.w".to_string(), vec![self.input_width(), self.embed]),
            ("emb.b".to_string(), vec![self.embed]),
        ];
        for l in 0..self.layers {
            let input = if l == 0 { self.embed } else { self.hidden };
            out.push((format!("lstm{l}.wx"), vec![input, 4 * self.hidden]));
            out.push((format!("lstm{l}.wh"), vec![self.hidden, 4 * self.hidden]));
            out.push((format!("lstm{l}.b"), vec![4 * self.hidden]));
        }
        for (name, width) in HEADS.iter().zip(self.segments()) {
            out.push((format!("{name}.w1"), vec![self.hidden, self.head_hidden]));
            out.push((format!("{name}.b1"), vec![self.head_hidden]));
            out.push((format!("{name}.w2"), vec![self.head_hidden, width]));
            out.push((format!("{name}.b2"), vec![width]));
        }
        out
    }

    pub fn param_count(&self) -> usize {
        self.layout()
            .iter()
            .map(|(_, s)| s.iter().product::<usize>())
            .sum()
    }
}

pub(crate) const HEADS: [&str; 3] = ["head_tu", "head_tv", "head_tau"];

/// All weights, stored in [`ModelConfig::layout`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    config: ModelConfig,
    tensors: Vec<Tensor<T>>,
}

impl<T: Real> ModelParams<T> {
    /// Matrices uniform in `±1/sqrt(fan_in)`, biases zero except the
    /// forget-gate block, which starts at one.
    pub fn init(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tensors = config
            .layout()
            .into_iter()
            .map(|(name, shape)| {
                if shape.len() == 2 {
                    let bound = 1.0 / (shape[0] as f64).sqrt();
                    Tensor::uniform(shape, bound, &mut rng)
                } else {
                    let mut b = Tensor::zeros(shape);
                    if name.starts_with("lstm") {
                        let h = config.hidden;
                        for v in &mut b.data_mut()[h..2 * h] {
                            *v = T::one();
                        }
                    }
                    b
                }
            })
            .collect();
        Ok(ModelParams { config, tensors })
    }

    /// Rebuilds parameters from named tensors, inferring the layer sizes
    /// from their shapes.
    pub fn from_named(named: Vec<(String, Tensor<T>)>) -> Result<Self> {
        let find = |name: &str| {
            named
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, t)| t.shape().to_vec())
                .ok_or_else(|| Error::Checkpoint(format!("missing tensor {name}")))
        };
        let emb = find("emb.w")?;
        let wh = find("lstm0.wh")?;
        let head = find("head_tu.w1")?;
        let tu = find("head_tu.w2")?;
        let tau = find("head_tau.w2")?;
        let layers = (0..)
            .take_while(|l| named.iter().any(|(n, _)| *n == format!("lstm{l}.wx")))
            .count();
        let (Some(&embed), Some(&hidden), Some(&head_hidden), Some(&tw), Some(&kw)) =
            (emb.get(1), wh.first(), head.get(1), tu.get(1), tau.get(1))
        else {
            return Err(Error::Checkpoint("tensor of unexpected rank".into()));
        };
        let config = ModelConfig {
            timestamp_width: tw,
            token_width: kw,
            embed,
            hidden,
            layers,
            head_hidden,
        };
        config.validate().map_err(|e| Error::Checkpoint(e.to_string()))?;
        let layout = config.layout();
        if layout.len() != named.len() {
            return Err(Error::Checkpoint(format!(
                "expected {} tensors, found {}",
                layout.len(),
                named.len()
            )));
        }
        let mut tensors = Vec::with_capacity(layout.len());
        for (name, shape) in layout {
            let (_, t) = named
                .iter()
                .find(|(n, _)| *n == name)
                .ok_or_else(|| Error::Checkpoint(format!("missing tensor {name}")))?;
            if t.shape() != shape.as_slice() {
                return Err(Error::Checkpoint(format!(
                    "tensor {name} has shape {:?}, expected {shape:?}",
                    t.shape()
                )));
            }
            tensors.push(t.clone());
        }
        Ok(ModelParams { config, tensors })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn tensors(&self) -> &[Tensor<T>] {
        &self.tensors
    }

    pub(crate) fn tensors_mut(&mut self) -> &mut [Tensor<T>] {
        &mut self.tensors
    }

    pub fn named(&self) -> Vec<(String, &Tensor<T>)> {
        self.config
            .layout()
            .into_iter()
            .map(|(n, _)| n)
            .zip(&self.tensors)
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    /// All values concatenated in layout order.
    pub fn flatten(&self) -> Vec<T> {
        self.tensors.iter().flat_map(|t| t.data().iter().copied()).collect()
    }

    /// Same layout with values taken from `flat`.
    pub fn with_flat(&self, flat: &[T]) -> Result<Self> {
        if flat.len() != self.param_count() {
            return Err(Error::shape(
                "with_flat",
                format!("{} values for {} parameters", flat.len(), self.param_count()),
            ));
        }
        let mut out = self.clone();
        let mut at = 0;
        for t in &mut out.tensors {
            let n = t.len();
            t.data_mut().copy_from_slice(&flat[at..at + n]);
            at += n;
        }
        Ok(out)
    }

    pub fn cast<U: Real>(&self) -> ModelParams<U> {
        ModelParams {
            config: self.config,
            tensors: self.tensors.iter().map(Tensor::cast).collect(),
        }
    }
}

/// Target indices `(t_u, t_v, token)` for every step, ending with the
/// all-EOS step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedSequence {
    pub targets: Vec<[usize; 3]>,
}

impl EncodedSequence {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }
}

pub fn encode_sequence(code: &ReducedCode, vocab: &TokenVocabulary) -> Result<EncodedSequence> {
    vocab.check_code(code)?;
    let mut targets: Vec<[usize; 3]> = code
        .entries()
        .iter()
        .map(|t| Ok([t.from, t.to, vocab.encode(&t.token)?]))
        .collect::<Result<_>>()?;
    targets.push([vocab.timestamp_eos(), vocab.timestamp_eos(), vocab.token_eos()]);
    Ok(EncodedSequence { targets })
}

/// Inverse of [`encode_sequence`]; stops at the first step holding an EOS.
pub fn decode_sequence(seq: &EncodedSequence, vocab: &TokenVocabulary) -> Result<ReducedCode> {
    let mut out = Vec::new();
    for &[u, v, k] in &seq.targets {
        if u == vocab.timestamp_eos() || v == vocab.timestamp_eos() || k == vocab.token_eos() {
            break;
        }
        let token = vocab
            .token(k)
            .ok_or_else(|| Error::Vocabulary(format!("token id {k} out of range")))?;
        if u >= vocab.max_nodes() || v >= vocab.max_nodes() {
            return Err(Error::Vocabulary(format!("timestamp {u} or {v} out of range")));
        }
        out.push(Triplet::new(u, v, token.clone()));
    }
    Ok(ReducedCode(out))
}
