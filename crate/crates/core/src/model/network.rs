use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{EncodedSequence, ModelConfig, ModelParams};
use crate::autodiff::{lstm_cell_step, LstmVars, Real, Tape, Tensor, Var};
use crate::error::{Error, Result};

/// Probabilities of the three output segments at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub t_u: Vec<f64>,
    pub t_v: Vec<f64>,
    pub token: Vec<f64>,
}

impl StepOutput {
    pub fn concat(&self) -> Vec<f64> {
        [&self.t_u[..], &self.t_v[..], &self.token[..]].concat()
    }

    /// Log-probability of a target step under the factorized output.
    pub fn log_prob(&self, target: [usize; 3]) -> f64 {
        self.t_u[target[0]].ln() + self.t_v[target[1]].ln() + self.token[target[2]].ln()
    }

    fn from_row<T: Real>(row: &[T], cfg: &ModelConfig) -> Self {
        let f: Vec<f64> = row.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
        let [a, b, _] = cfg.segments();
        StepOutput {
            t_u: f[..a].to_vec(),
            t_v: f[a..a + b].to_vec(),
            token: f[a + b..].to_vec(),
        }
    }
}

/// Tape handles for every parameter, in layout order.
pub(crate) struct ParamVars {
    pub all: Vec<Var>,
    emb: (Var, Var),
    lstm: Vec<LstmVars>,
    heads: Vec<[Var; 4]>,
}

impl ParamVars {
    pub fn attach<'a, T: Real>(tape: &mut Tape<'a, T>, params: &'a ModelParams<T>) -> Self {
        let all: Vec<Var> = params.tensors().iter().map(|t| tape.leaf_ref(t)).collect();
        let layers = params.config().layers;
        let emb = (all[0], all[1]);
        let lstm = (0..layers)
            .map(|l| LstmVars {
                w_input: all[2 + 3 * l],
                w_hidden: all[3 + 3 * l],
                bias: all[4 + 3 * l],
            })
            .collect();
        let base = 2 + 3 * layers;
        let heads = (0..3)
            .map(|h| {
                let o = base + 4 * h;
                [all[o], all[o + 1], all[o + 2], all[o + 3]]
            })
            .collect();
        ParamVars {
            all,
            emb,
            lstm,
            heads,
        }
    }
}

/// Index of the SOS slot in each segment: the last one.
pub(crate) fn sos(cfg: &ModelConfig) -> [usize; 3] {
    [cfg.timestamp_width - 1, cfg.timestamp_width - 1, cfg.token_width - 1]
}

/// Stacked one-hot steps; `None` rows stay zero.
pub(crate) fn step_matrix<T: Real>(cfg: &ModelConfig, rows: &[Option<[usize; 3]>]) -> Tensor<T> {
    let width = cfg.input_width();
    let offsets = [0, cfg.timestamp_width, 2 * cfg.timestamp_width];
    let mut t = Tensor::zeros(vec![rows.len(), width]);
    for (r, idx) in rows.iter().enumerate() {
        if let Some(idx) = idx {
            for s in 0..3 {
                t.data_mut()[r * width + offsets[s] + idx[s]] = T::one();
            }
        }
    }
    t
}

pub(crate) fn zero_state<T: Real>(
    tape: &mut Tape<'_, T>,
    cfg: &ModelConfig,
    rows: usize,
) -> Vec<(Var, Var)> {
    (0..cfg.layers)
        .map(|_| {
            let h = tape.leaf(Tensor::zeros(vec![rows, cfg.hidden]));
            let c = tape.leaf(Tensor::zeros(vec![rows, cfg.hidden]));
            (h, c)
        })
        .collect()
}

/// One recurrent step: embeds `input`, advances every layer in place and
/// returns the concatenated segment probabilities.
pub(crate) fn step<T: Real, R: Rng + ?Sized>(
    tape: &mut Tape<'_, T>,
    pv: &ParamVars,
    cfg: &ModelConfig,
    input: Var,
    state: &mut [(Var, Var)],
    dropout: f64,
    training: bool,
    rng: &mut R,
) -> Result<Var> {
    let mut x = tape.linear(input, pv.emb.0, pv.emb.1)?;
    for (l, layer) in pv.lstm.iter().enumerate() {
        if l > 0 {
            x = tape.dropout(x, dropout, training, rng)?;
        }
        let (h, c) = lstm_cell_step(tape, x, state[l].0, state[l].1, layer)?;
        state[l] = (h, c);
        x = h;
    }
    let mut logits = Vec::with_capacity(3);
    for [w1, b1, w2, b2] in &pv.heads {
        let hid = tape.linear(x, *w1, *b1)?;
        let hid = tape.relu(hid);
        logits.push(tape.linear(hid, *w2, *b2)?);
    }
    let joined = tape.concat_cols(&logits)?;
    tape.softmax_segments(joined, &cfg.segments())
}

pub(crate) fn check_sequences(cfg: &ModelConfig, seqs: &[&EncodedSequence]) -> Result<()> {
    let limit = [cfg.timestamp_width - 1, cfg.timestamp_width - 1, cfg.token_width - 1];
    for s in seqs {
        if s.is_empty() {
            return Err(Error::Training("empty encoded sequence".into()));
        }
        for t in &s.targets {
            if (0..3).any(|i| t[i] >= limit[i]) {
                return Err(Error::Training(format!("step {t:?} outside the model alphabets")));
            }
        }
    }
    Ok(())
}

/// Teacher-forced pass over a padded batch. The loss is summed over steps
/// and averaged over sequences; padded steps carry zero weight.
pub(crate) fn forward_batch<T: Real, R: Rng + ?Sized>(
    tape: &mut Tape<'_, T>,
    pv: &ParamVars,
    cfg: &ModelConfig,
    batch: &[&EncodedSequence],
    dropout: f64,
    training: bool,
    rng: &mut R,
) -> Result<(Var, Vec<Var>)> {
    check_sequences(cfg, batch)?;
    let rows = batch.len();
    let steps = batch.iter().map(|s| s.len()).max().unwrap_or(0);
    let mut state = zero_state(tape, cfg, rows);
    let mut losses = Vec::with_capacity(steps);
    let mut outputs = Vec::with_capacity(steps);
    let offsets = [0, cfg.timestamp_width, 2 * cfg.timestamp_width];
    for i in 0..steps {
        let inputs: Vec<Option<[usize; 3]>> = batch
            .iter()
            .map(|s| match i {
                0 => Some(sos(cfg)),
                _ if i < s.len() => Some(s.targets[i - 1]),
                _ => None,
            })
            .collect();
        let input = tape.leaf(step_matrix(cfg, &inputs));
        let probs = step(tape, pv, cfg, input, &mut state, dropout, training, rng)?;
        let mut target = Tensor::zeros(vec![rows, cfg.input_width()]);
        let mut weights = vec![T::zero(); rows];
        for (r, s) in batch.iter().enumerate() {
            if let Some(t) = s.targets.get(i) {
                weights[r] = T::one();
                for k in 0..3 {
                    target.data_mut()[r * cfg.input_width() + offsets[k] + t[k]] = T::one();
                }
            }
        }
        losses.push(tape.bce(probs, target, &weights)?);
        outputs.push(probs);
    }
    let total = tape.sum(&losses)?;
    let loss = tape.scale(total, T::one() / T::from_f64_lossy(rows as f64));
    Ok((loss, outputs))
}

/// Teacher-forced loss of a batch and its gradient for every parameter
/// tensor, in layout order.
pub fn batch_gradients<T: Real, R: Rng + ?Sized>(
    params: &ModelParams<T>,
    batch: &[&EncodedSequence],
    dropout: f64,
    training: bool,
    rng: &mut R,
) -> Result<(f64, Vec<Tensor<T>>)> {
    let mut tape = Tape::new();
    let pv = ParamVars::attach(&mut tape, params);
    let (loss, _) = forward_batch(&mut tape, &pv, params.config(), batch, dropout, training, rng)?;
    let value = tape.value(loss).item().to_f64().unwrap_or(f64::NAN);
    let mut g = tape.backward(loss)?;
    let grads = pv
        .all
        .iter()
        .zip(params.tensors())
        .map(|(&v, p)| g.take(v).unwrap_or_else(|| Tensor::zeros(p.shape().to_vec())))
        .collect();
    Ok((value, grads))
}

/// Per-step outputs and loss of one sequence, without dropout.
pub fn forward_teacher_forced<T: Real>(
    params: &ModelParams<T>,
    seq: &EncodedSequence,
) -> Result<(Vec<StepOutput>, f64)> {
    let mut tape = Tape::new();
    let pv = ParamVars::attach(&mut tape, params);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (loss, outs) = forward_batch(&mut tape, &pv, params.config(), &[seq], 0.0, false, &mut rng)?;
    let steps = outs
        .iter()
        .map(|&v| StepOutput::from_row(tape.value(v).row(0), params.config()))
        .collect();
    Ok((steps, tape.value(loss).item().to_f64().unwrap_or(f64::NAN)))
}

/// Mean per-sequence loss without dropout.
pub fn mean_loss<T: Real>(params: &ModelParams<T>, seqs: &[EncodedSequence], batch_size: usize) -> Result<f64> {
    if seqs.is_empty() {
        return Err(Error::Training("no sequences to score".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut total = 0.0;
    for chunk in seqs.chunks(batch_size.max(1)) {
        let mut tape = Tape::new();
        let pv = ParamVars::attach(&mut tape, params);
        let refs: Vec<&EncodedSequence> = chunk.iter().collect();
        let (loss, _) = forward_batch(&mut tape, &pv, params.config(), &refs, 0.0, false, &mut rng)?;
        total += tape.value(loss).item().to_f64().unwrap_or(f64::NAN) * chunk.len() as f64;
    }
    Ok(total / seqs.len() as f64)
}

/// Loss of a sequence with `steps` steps when every segment predicts the
/// uniform distribution.
pub fn uniform_loss(cfg: &ModelConfig, steps: usize) -> f64 {
    let per_step: f64 = cfg
        .segments()
        .iter()
        .map(|&w| {
            let w = w as f64;
            w.ln() + (w - 1.0) * (w / (w - 1.0)).ln()
        })
        .sum();
    per_step * steps as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::{min_dfs_code, reduce};
    use crate::dataset::build_vocabulary;
    use crate::graph::tests::house;
    use crate::model::encode_sequence;

    #[test]
    fn segments_sum_to_one_and_fresh_loss_is_near_uniform() {
        let code = reduce(&min_dfs_code(&house()).unwrap());
        let vocab = build_vocabulary(std::slice::from_ref(&code), 4).unwrap();
        let seq = encode_sequence(&code, &vocab).unwrap();
        let cfg = ModelConfig::for_vocabulary(&vocab);
        let params = ModelParams::<f64>::init(cfg, 7).unwrap();
        let (outs, loss) = forward_teacher_forced(&params, &seq).unwrap();
        assert_eq!(outs.len(), 6);
        for o in &outs {
            for seg in [&o.t_u, &o.t_v, &o.token] {
                assert!((seg.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                assert!(seg.iter().all(|&p| p > 0.0));
            }
            let target = [1, 2, 3];
            let joint = o.t_u[1] * o.t_v[2] * o.token[3];
            assert!((o.log_prob(target) - joint.ln()).abs() < 1e-12);
        }
        let u = uniform_loss(&cfg, 6);
        assert!((loss - u).abs() <= 0.2 * u, "{loss} vs {u}");
    }

    #[test]
    fn batch_loss_is_mean_of_sequence_losses() {
        let g = house();
        let code = reduce(&min_dfs_code(&g).unwrap());
        let short = crate::canonical::ReducedCode(code.0[..2].to_vec());
        let vocab = build_vocabulary(&[code.clone()], 4).unwrap();
        let a = encode_sequence(&code, &vocab).unwrap();
        let b = encode_sequence(&short, &vocab).unwrap();
        let cfg = ModelConfig { layers: 2, hidden: 16, embed: 8, head_hidden: 8, ..ModelConfig::for_vocabulary(&vocab) };
        let p = ModelParams::<f64>::init(cfg, 2).unwrap();
        let la = forward_teacher_forced(&p, &a).unwrap().1;
        let lb = forward_teacher_forced(&p, &b).unwrap().1;
        let m = mean_loss(&p, &[a, b], 32).unwrap();
        assert!((m - (la + lb) / 2.0).abs() < 1e-10);
    }
}
