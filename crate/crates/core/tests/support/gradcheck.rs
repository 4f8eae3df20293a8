//! Central finite-difference checks of every tape operation and of the
//! full model loss, in double precision.

use ggredux_core::autodiff::{lstm_cell_step, LstmVars, Tape, Tensor, Var};
use ggredux_core::model::{batch_gradients, EncodedSequence, ModelConfig, ModelParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{finite_difference, max_relative_error};

pub const STEP: f64 = 1e-5;
/// Entries smaller than this are compared absolutely.
pub const FLOOR: f64 = 1e-6;
/// Floor for the whole-model loss, whose magnitude (about 10) puts the
/// central-difference rounding noise near `1e-16 * 10 / STEP`.
pub const MODEL_FLOOR: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct OpCheck {
    pub name: &'static str,
    pub instances: usize,
    pub max_rel_error: f64,
}

type Build = dyn Fn(&mut Tape<'_, f64>, &[Var]) -> Var;

/// `sum(w * y)` for a fixed weight matrix, as a 1x1 value.
fn project(tape: &mut Tape<'_, f64>, y: Var, w: &Tensor<f64>) -> Var {
    let (r, c) = tape.value(y).dims();
    let wv = tape.leaf(w.clone());
    let p = tape.mul(y, wv).expect("projection shape");
    let ones_c = tape.leaf(Tensor::matrix(c, 1, vec![1.0; c]).unwrap());
    let ones_r = tape.leaf(Tensor::matrix(1, r, vec![1.0; r]).unwrap());
    let s = tape.matmul(p, ones_c).unwrap();
    tape.matmul(ones_r, s).unwrap()
}

fn split(x: &[f64], like: &[Tensor<f64>]) -> Vec<Tensor<f64>> {
    let mut at = 0;
    like.iter()
        .map(|t| {
            let n = t.len();
            let out = Tensor::from_vec(t.shape().to_vec(), x[at..at + n].to_vec()).unwrap();
            at += n;
            out
        })
        .collect()
}

fn output_dims(inputs: &[Tensor<f64>], build: &Build) -> (usize, usize) {
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.leaf(t.clone())).collect();
    let y = build(&mut tape, &vars);
    tape.value(y).dims()
}

/// Max relative error between the tape gradient and finite differences.
fn check_case<R: Rng>(inputs: Vec<Tensor<f64>>, build: &Build, rng: &mut R) -> f64 {
    let (r, c) = output_dims(&inputs, build);
    let w = Tensor::matrix(r, c, (0..r * c).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
    let eval = |x: &[f64]| {
        let parts = split(x, &inputs);
        let mut tape = Tape::new();
        let vars: Vec<Var> = parts.into_iter().map(|t| tape.leaf(t)).collect();
        let y = build(&mut tape, &vars);
        let l = project(&mut tape, y, &w);
        tape.value(l).item()
    };
    let x: Vec<f64> = inputs.iter().flat_map(|t| t.data().to_vec()).collect();

    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.leaf(t.clone())).collect();
    let y = build(&mut tape, &vars);
    let l = project(&mut tape, y, &w);
    let grads = tape.backward(l).unwrap();
    let analytic: Vec<f64> = vars
        .iter()
        .zip(&inputs)
        .flat_map(|(&v, t)| match grads.get(v) {
            Some(g) => g.data().to_vec(),
            None => vec![0.0; t.len()],
        })
        .collect();
    let numeric = finite_difference(eval, &x, STEP);
    max_relative_error(&analytic, &numeric, FLOOR)
}

fn rand_t<R: Rng>(rng: &mut R, shape: &[usize]) -> Tensor<f64> {
    let n = shape.iter().product();
    Tensor::from_vec(shape.to_vec(), (0..n).map(|_| rng.random_range(-1.5..1.5)).collect()).unwrap()
}

/// Values bounded away from zero, for kinked functions.
fn rand_away<R: Rng>(rng: &mut R, shape: &[usize]) -> Tensor<f64> {
    let n = shape.iter().product();
    let data = (0..n)
        .map(|_| {
            let m = rng.random_range(0.05..1.5);
            if rng.random_bool(0.5) { m } else { -m }
        })
        .collect();
    Tensor::from_vec(shape.to_vec(), data).unwrap()
}

/// Runs every operation on `instances` random shapes and inputs.
pub fn check_operations(instances: usize, seed: u64) -> Vec<OpCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut run = |name: &'static str,
                   make: &mut dyn FnMut(&mut ChaCha8Rng, usize, usize) -> (Vec<Tensor<f64>>, Box<Build>)| {
        let mut worst: f64 = 0.0;
        for _ in 0..instances {
            let r = rng.random_range(1..4);
            let c = rng.random_range(2..6);
            let (inputs, build) = make(&mut rng, r, c);
            worst = worst.max(check_case(inputs, &*build, &mut rng));
        }
        out.push(OpCheck { name, instances, max_rel_error: worst });
    };

    run("matmul", &mut |rng, r, c| {
        let k = rng.random_range(1..5);
        (vec![rand_t(rng, &[r, k]), rand_t(rng, &[k, c])], Box::new(|t, v| t.matmul(v[0], v[1]).unwrap()))
    });
    run("add_bias", &mut |rng, r, c| {
        (vec![rand_t(rng, &[r, c]), rand_t(rng, &[c])], Box::new(|t, v| t.add_bias(v[0], v[1]).unwrap()))
    });
    run("linear", &mut |rng, r, c| {
        let k = rng.random_range(1..5);
        (
            vec![rand_t(rng, &[r, k]), rand_t(rng, &[k, c]), rand_t(rng, &[c])],
            Box::new(|t, v| t.linear(v[0], v[1], v[2]).unwrap()),
        )
    });
    run("add", &mut |rng, r, c| {
        (vec![rand_t(rng, &[r, c]), rand_t(rng, &[r, c])], Box::new(|t, v| t.add(v[0], v[1]).unwrap()))
    });
    run("mul", &mut |rng, r, c| {
        (vec![rand_t(rng, &[r, c]), rand_t(rng, &[r, c])], Box::new(|t, v| t.mul(v[0], v[1]).unwrap()))
    });
    run("sigmoid", &mut |rng, r, c| (vec![rand_t(rng, &[r, c])], Box::new(|t, v| t.sigmoid(v[0]))));
    run("tanh", &mut |rng, r, c| (vec![rand_t(rng, &[r, c])], Box::new(|t, v| t.tanh(v[0]))));
    run("relu", &mut |rng, r, c| (vec![rand_away(rng, &[r, c])], Box::new(|t, v| t.relu(v[0]))));
    run("slice_cols", &mut |rng, r, c| {
        (vec![rand_t(rng, &[r, c + 3])], Box::new(move |t, v| t.slice_cols(v[0], 1, c + 1).unwrap()))
    });
    run("concat_cols", &mut |rng, r, _| {
        (
            vec![rand_t(rng, &[r, 2]), rand_t(rng, &[r, 3]), rand_t(rng, &[r, 1])],
            Box::new(|t, v| t.concat_cols(&[v[0], v[1], v[2]]).unwrap()),
        )
    });
    run("softmax_segments", &mut |rng, r, c| {
        (
            vec![rand_t(rng, &[r, c + 4])],
            Box::new(move |t, v| t.softmax_segments(v[0], &[c, 3, 1]).unwrap()),
        )
    });
    run("dropout", &mut |rng, r, c| {
        let seed: u64 = rng.random();
        (
            vec![rand_t(rng, &[r, c])],
            Box::new(move |t, v| {
                let mut mask_rng = ChaCha8Rng::seed_from_u64(seed);
                t.dropout(v[0], 0.3, true, &mut mask_rng).unwrap()
            }),
        )
    });
    run("bce", &mut |rng, r, c| {
        let pred = Tensor::matrix(r, c, (0..r * c).map(|_| rng.random_range(0.05..0.95)).collect()).unwrap();
        let target = Tensor::matrix(r, c, (0..r * c).map(|_| rng.random_range(0..2) as f64).collect()).unwrap();
        let weights: Vec<f64> = (0..r).map(|_| rng.random_range(0.0..2.0)).collect();
        (
            vec![pred],
            Box::new(move |t, v| t.bce(v[0], target.clone(), &weights).unwrap()),
        )
    });
    run("sum", &mut |rng, r, c| {
        (
            vec![rand_t(rng, &[r, c]), rand_t(rng, &[r, c]), rand_t(rng, &[r, c])],
            Box::new(|t, v| t.sum(&[v[0], v[1], v[2]]).unwrap()),
        )
    });
    run("scale", &mut |rng, r, c| {
        let s = rng.random_range(-2.0..2.0);
        (vec![rand_t(rng, &[r, c])], Box::new(move |t, v| t.scale(v[0], s)))
    });
    run("lstm_cell_step", &mut |rng, r, c| {
        let h = c;
        let i = rng.random_range(1..5);
        (
            vec![
                rand_t(rng, &[r, i]),
                rand_t(rng, &[r, h]),
                rand_t(rng, &[r, h]),
                rand_t(rng, &[i, 4 * h]),
                rand_t(rng, &[h, 4 * h]),
                rand_t(rng, &[4 * h]),
            ],
            Box::new(|t, v| {
                let p = LstmVars { w_input: v[3], w_hidden: v[4], bias: v[5] };
                let (h, c) = lstm_cell_step(t, v[0], v[1], v[2], &p).unwrap();
                t.concat_cols(&[h, c]).unwrap()
            }),
        )
    });
    out
}

/// Small model used for the end-to-end check: one recurrent layer of
/// width 8.
pub fn tiny_config() -> ModelConfig {
    ModelConfig {
        layers: 1,
        hidden: 8,
        embed: 4,
        head_hidden: 8,
        ..ModelConfig::with_widths(5, 5)
    }
}

fn random_sequence<R: Rng>(rng: &mut R, len: usize) -> EncodedSequence {
    let mut targets: Vec<[usize; 3]> = (0..len)
        .map(|_| [rng.random_range(0..3), rng.random_range(0..3), rng.random_range(0..3)])
        .collect();
    targets.push([3, 3, 3]);
    EncodedSequence { targets }
}

/// Outcome of the whole-model check.
#[derive(Debug, Clone, Copy)]
pub struct ModelCheck {
    pub max_rel_error: f64,
    /// Coordinates compared.
    pub checked: usize,
    /// Coordinates skipped because a ReLU kink lies within one step.
    pub kinks: usize,
}

/// Slope difference between the one-sided quotients above which a
/// coordinate is treated as straddling a kink. Smooth coordinates differ
/// by about `STEP * |f''|`.
const KINK_GAP: f64 = 1e-3;

/// Central differences plus a kink flag per coordinate.
fn central_with_kinks(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> (Vec<f64>, Vec<bool>) {
    let mid = f(x);
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + STEP;
            let up = f(&probe);
            probe[i] = orig - STEP;
            let down = f(&probe);
            probe[i] = orig;
            let (fwd, bwd) = ((up - mid) / STEP, (mid - down) / STEP);
            ((up - down) / (2.0 * STEP), (fwd - bwd).abs() > KINK_GAP)
        })
        .unzip()
}

/// Worst relative error of the full model loss gradient over `instances`
/// random parameter sets and batches.
pub fn check_tiny_model(instances: usize, seed: u64) -> ModelCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = ModelCheck { max_rel_error: 0.0, checked: 0, kinks: 0 };
    for _ in 0..instances {
        let base = ModelParams::<f64>::init(tiny_config(), rng.random()).unwrap();
        // move biases off their special initial values
        let flat: Vec<f64> = base.flatten().iter().map(|x| x + rng.random_range(-0.1..0.1)).collect();
        let params = base.with_flat(&flat).unwrap();
        let seqs: Vec<EncodedSequence> = (0..2)
            .map(|_| {
                let len = rng.random_range(1..4);
                random_sequence(&mut rng, len)
            })
            .collect();
        let batch: Vec<&EncodedSequence> = seqs.iter().collect();
        let mut no_dropout = ChaCha8Rng::seed_from_u64(0);
        let (_, grads) = batch_gradients(&params, &batch, 0.0, false, &mut no_dropout).unwrap();
        let analytic: Vec<f64> = grads.iter().flat_map(|g| g.data().to_vec()).collect();
        let eval = |x: &[f64]| {
            let p = params.with_flat(x).unwrap();
            batch_gradients(&p, &batch, 0.0, false, &mut ChaCha8Rng::seed_from_u64(0)).unwrap().0
        };
        let (numeric, kinked) = central_with_kinks(eval, &flat);
        let keep: Vec<usize> = (0..flat.len()).filter(|&i| !kinked[i]).collect();
        let a: Vec<f64> = keep.iter().map(|&i| analytic[i]).collect();
        let n: Vec<f64> = keep.iter().map(|&i| numeric[i]).collect();
        out.max_rel_error = out.max_rel_error.max(max_relative_error(&a, &n, MODEL_FLOOR));
        out.checked += keep.len();
        out.kinks += flat.len() - keep.len();
    }
    out
}
