use rand::Rng;
use rayon::prelude::*;

use super::network::{sos, step, step_matrix, ParamVars};
use super::ModelParams;
use crate::autodiff::{Real, Tape, Tensor};
use crate::canonical::{ReducedCode, Triplet};
use crate::dataset::TokenVocabulary;
use crate::error::{Error, Result};
use crate::seeding::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleMode {
    /// Draw each segment from its softmax at temperature 1.
    #[default]
    Stochastic,
    /// Take the most likely index of each segment.
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GenerationReport {
    /// Triplets emitted before stopping.
    pub steps: usize,
    /// Hit `max_steps` without drawing an EOS.
    pub truncated: bool,
}

/// Twice the largest training code length.
pub fn default_max_steps(max_training_edges: usize) -> usize {
    2 * max_training_edges
}

/// Index drawn from `probs`, never the final (SOS) slot.
fn choose<R: Rng + ?Sized>(probs: &[f64], mode: SampleMode, rng: &mut R) -> usize {
    let usable = &probs[..probs.len() - 1];
    match mode {
        SampleMode::Greedy => {
            let mut best = 0;
            for (i, &p) in usable.iter().enumerate() {
                if p > usable[best] {
                    best = i;
                }
            }
            best
        }
        SampleMode::Stochastic => {
            let total: f64 = usable.iter().sum();
            let mut u = rng.random::<f64>() * total;
            for (i, &p) in usable.iter().enumerate() {
                if u < p {
                    return i;
                }
                u -= p;
            }
            usable.iter().rposition(|&p| p > 0.0).unwrap_or(0)
        }
    }
}

const CHUNK: usize = 64;

/// Samples `count` codes. Sample `i` draws from generator stream `i` of
/// `seed`; chunks of samples run in parallel.
pub fn sample_many<T: Real>(
    params: &ModelParams<T>,
    vocab: &TokenVocabulary,
    count: usize,
    max_steps: usize,
    seed: u64,
    mode: SampleMode,
) -> Result<Vec<(ReducedCode, GenerationReport)>> {
    let cfg = params.config();
    if cfg.timestamp_width != vocab.timestamp_width() || cfg.token_width != vocab.token_width() {
        return Err(Error::Sampling(format!(
            "model alphabets {}/{} do not match vocabulary {}/{}",
            cfg.timestamp_width,
            cfg.token_width,
            vocab.timestamp_width(),
            vocab.token_width()
        )));
    }
    let starts: Vec<usize> = (0..count).step_by(CHUNK).collect();
    let chunks: Vec<Result<Vec<(ReducedCode, GenerationReport)>>> = starts
        .par_iter()
        .map(|&start| {
            let end = (start + CHUNK).min(count);
            sample_chunk(params, vocab, start..end, max_steps, seed, mode)
        })
        .collect();
    let mut out = Vec::with_capacity(count);
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

pub fn sample<T: Real>(
    params: &ModelParams<T>,
    vocab: &TokenVocabulary,
    max_steps: usize,
    seed: u64,
    mode: SampleMode,
) -> Result<(ReducedCode, GenerationReport)> {
    Ok(sample_many(params, vocab, 1, max_steps, seed, mode)?.remove(0))
}

fn sample_chunk<T: Real>(
    params: &ModelParams<T>,
    vocab: &TokenVocabulary,
    range: std::ops::Range<usize>,
    max_steps: usize,
    seed: u64,
    mode: SampleMode,
) -> Result<Vec<(ReducedCode, GenerationReport)>> {
    let cfg = params.config();
    let rows = range.len();
    let mut rngs: Vec<_> = range.map(|i| stream_rng(seed, i as u64)).collect();
    let mut codes = vec![Vec::new(); rows];
    let mut active = vec![true; rows];
    let mut inputs: Vec<Option<[usize; 3]>> = vec![Some(sos(cfg)); rows];
    let mut state: Vec<(Tensor<T>, Tensor<T>)> = (0..cfg.layers)
        .map(|_| {
            let z = Tensor::zeros(vec![rows, cfg.hidden]);
            (z.clone(), z)
        })
        .collect();
    let [w0, w1, _] = cfg.segments();
    let (t_eos, k_eos) = (vocab.timestamp_eos(), vocab.token_eos());

    for _ in 0..max_steps {
        if !active.iter().any(|&a| a) {
            break;
        }
        let mut tape = Tape::new();
        let pv = ParamVars::attach(&mut tape, params);
        let mut vars = Vec::with_capacity(state.len());
        for (h, c) in &state {
            let hv = tape.leaf(h.clone());
            let cv = tape.leaf(c.clone());
            vars.push((hv, cv));
        }
        let input = tape.leaf(step_matrix(cfg, &inputs));
        let probs = step(&mut tape, &pv, cfg, input, &mut vars, 0.0, false, &mut rngs[0])?;
        let probs = tape.value(probs);
        for r in 0..rows {
            if !active[r] {
                continue;
            }
            let row: Vec<f64> = probs.row(r).iter().map(|x| x.to_f64().unwrap_or(0.0)).collect();
            let rng = &mut rngs[r];
            let u = choose(&row[..w0], mode, rng);
            let v = choose(&row[w0..w0 + w1], mode, rng);
            let k = choose(&row[w0 + w1..], mode, rng);
            if u == t_eos || v == t_eos || k == k_eos {
                active[r] = false;
                inputs[r] = None;
                continue;
            }
            let token = vocab.token(k).expect("index below EOS is a token").clone();
            codes[r].push(Triplet::new(u, v, token));
            inputs[r] = Some([u, v, k]);
        }
        state = vars
            .iter()
            .map(|&(h, c)| (tape.value(h).clone(), tape.value(c).clone()))
            .collect();
    }
    Ok(codes
        .into_iter()
        .zip(active)
        .map(|(c, still_running)| {
            let report = GenerationReport {
                steps: c.len(),
                truncated: still_running,
            };
            (ReducedCode(c), report)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::{graph_from_reduced, ReconstructionPolicy, Token};
    use crate::model::ModelConfig;

    fn setup() -> (ModelParams<f32>, TokenVocabulary) {
        let vocab = TokenVocabulary::new(
            5,
            vec![Token::new("A", "a", "A"), Token::new("A", "a", "B"), Token::new("B", "b", "B")],
        )
        .unwrap();
        let cfg = ModelConfig { layers: 2, hidden: 12, embed: 6, head_hidden: 10, ..ModelConfig::for_vocabulary(&vocab) };
        (ModelParams::init(cfg, 4).unwrap(), vocab)
    }

    #[test]
    fn zero_steps_is_truncated_and_empty() {
        let (p, vocab) = setup();
        let (code, report) = sample(&p, &vocab, 0, 1, SampleMode::Stochastic).unwrap();
        assert!(code.is_empty());
        assert!(report.truncated);
    }

    #[test]
    fn deterministic_and_in_alphabet() {
        let (p, vocab) = setup();
        let a = sample_many(&p, &vocab, 150, 20, 9, SampleMode::Stochastic).unwrap();
        let b = sample_many(&p, &vocab, 150, 20, 9, SampleMode::Stochastic).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[3], sample_many(&p, &vocab, 4, 20, 9, SampleMode::Stochastic).unwrap()[3]);
        for (code, report) in &a {
            assert_eq!(code.len(), report.steps);
            assert!(report.steps <= 20);
            for t in code.entries() {
                assert!(t.from < 5 && t.to < 5);
            }
            let _ = graph_from_reduced(code, ReconstructionPolicy::default());
        }
    }

    #[test]
    fn choose_never_picks_sos() {
        let mut rng = stream_rng(0, 0);
        let probs = [0.0, 0.0, 1.0];
        assert_eq!(choose(&probs, SampleMode::Greedy, &mut rng), 0);
        for _ in 0..100 {
            assert!(choose(&[0.3, 0.3, 0.4], SampleMode::Stochastic, &mut rng) < 2);
        }
    }

    #[test]
    fn vocabulary_mismatch_is_rejected() {
        let (p, _) = setup();
        let other = TokenVocabulary::new(3, vec![Token::new("A", "a", "A")]).unwrap();
        assert!(sample(&p, &other, 5, 0, SampleMode::Greedy).is_err());
    }
}
