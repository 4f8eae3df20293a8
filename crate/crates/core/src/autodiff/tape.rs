use std::borrow::Cow;

use rand::Rng;

use super::tensor::{Real, Tensor};
use crate::error::{Error, Result};

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug)]
enum Op<T> {
    Leaf,
    MatMul(Var, Var),
    AddBias(Var, Var),
    Add(Var, Var),
    Mul(Var, Var),
    Sigmoid(Var),
    Tanh(Var),
    Relu(Var),
    Slice { x: Var, start: usize },
    Concat(Vec<Var>),
    Softmax { x: Var, widths: Vec<usize> },
    Mask { x: Var, mask: Vec<T> },
    Bce { pred: Var, target: Tensor<T>, weights: Vec<T> },
    Sum(Vec<Var>),
    Scale(Var, T),
}

#[derive(Debug)]
struct Node<'a, T: Real> {
    value: Cow<'a, Tensor<T>>,
    op: Op<T>,
}

/// Log clamp used by the cross-entropy.
pub const BCE_EPSILON: f64 = 1e-12;

/// Reverse-mode recording of one computation. Leaves may borrow their
/// values, so parameters are not copied per step.
#[derive(Debug, Default)]
pub struct Tape<'a, T: Real> {
    nodes: Vec<Node<'a, T>>,
}

/// Gradients of a scalar with respect to the leaves of a tape.
#[derive(Debug)]
pub struct Gradients<T> {
    grads: Vec<Option<Tensor<T>>>,
}

impl<T: Real> Gradients<T> {
    pub fn get(&self, v: Var) -> Option<&Tensor<T>> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    pub fn take(&mut self, v: Var) -> Option<Tensor<T>> {
        self.grads.get_mut(v.0).and_then(Option::take)
    }
}

fn same_shape<T: Real>(op: &'static str, a: &Tensor<T>, b: &Tensor<T>) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::shape(op, format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(())
}

fn elementwise<T: Real>(a: &Tensor<T>, b: &Tensor<T>, f: impl Fn(T, T) -> T) -> Tensor<T> {
    let data = a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect();
    Tensor::from_vec(a.shape().to_vec(), data).expect("same shape")
}

impl<'a, T: Real> Tape<'a, T> {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Cow<'a, Tensor<T>>, op: Op<T>) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn leaf(&mut self, value: Tensor<T>) -> Var {
        self.push(Cow::Owned(value), Op::Leaf)
    }

    pub fn leaf_ref(&mut self, value: &'a Tensor<T>) -> Var {
        self.push(Cow::Borrowed(value), Op::Leaf)
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        &self.nodes[v.0].value
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (m, k) = self.value(a).dims();
        let (k2, n) = self.value(b).dims();
        if k != k2 {
            return Err(Error::shape("matmul", format!("{m}x{k} @ {k2}x{n}")));
        }
        let mut out = Tensor::zeros(vec![m, n]);
        T::gemm(
            m,
            k,
            n,
            T::one(),
            self.value(a).data(),
            (k as isize, 1),
            self.value(b).data(),
            (n as isize, 1),
            T::zero(),
            out.data_mut(),
            (n as isize, 1),
        );
        Ok(self.push(Cow::Owned(out), Op::MatMul(a, b)))
    }

    /// Adds the row vector `b` to every row of `x`.
    pub fn add_bias(&mut self, x: Var, b: Var) -> Result<Var> {
        let (rows, cols) = self.value(x).dims();
        let bias = self.value(b);
        if bias.len() != cols {
            return Err(Error::shape("add_bias", format!("{cols} columns vs bias of {}", bias.len())));
        }
        let mut out = self.value(x).clone();
        for r in 0..rows {
            for (o, &bv) in out.data_mut()[r * cols..(r + 1) * cols].iter_mut().zip(bias.data()) {
                *o = *o + bv;
            }
        }
        Ok(self.push(Cow::Owned(out), Op::AddBias(x, b)))
    }

    pub fn linear(&mut self, x: Var, w: Var, b: Var) -> Result<Var> {
        let xw = self.matmul(x, w)?;
        self.add_bias(xw, b)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        same_shape("add", self.value(a), self.value(b))?;
        let out = elementwise(self.value(a), self.value(b), |x, y| x + y);
        Ok(self.push(Cow::Owned(out), Op::Add(a, b)))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        same_shape("mul", self.value(a), self.value(b))?;
        let out = elementwise(self.value(a), self.value(b), |x, y| x * y);
        Ok(self.push(Cow::Owned(out), Op::Mul(a, b)))
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        let out = self.value(x).map(|v| T::one() / (T::one() + (-v).exp()));
        self.push(Cow::Owned(out), Op::Sigmoid(x))
    }

    pub fn tanh(&mut self, x: Var) -> Var {
        let out = self.value(x).map(|v| v.tanh());
        self.push(Cow::Owned(out), Op::Tanh(x))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let out = self.value(x).map(|v| v.max(T::zero()));
        self.push(Cow::Owned(out), Op::Relu(x))
    }

    /// Columns `start..end` of every row.
    pub fn slice_cols(&mut self, x: Var, start: usize, end: usize) -> Result<Var> {
        let (rows, cols) = self.value(x).dims();
        if start > end || end > cols {
            return Err(Error::shape("slice_cols", format!("{start}..{end} of {cols} columns")));
        }
        let src = self.value(x);
        let mut data = Vec::with_capacity(rows * (end - start));
        for r in 0..rows {
            data.extend_from_slice(&src.row(r)[start..end]);
        }
        let out = Tensor::matrix(rows, end - start, data)?;
        Ok(self.push(Cow::Owned(out), Op::Slice { x, start }))
    }

    /// Row-wise concatenation of column blocks.
    pub fn concat_cols(&mut self, xs: &[Var]) -> Result<Var> {
        let Some(&first) = xs.first() else {
            return Err(Error::shape("concat_cols", "no inputs"));
        };
        let rows = self.value(first).rows();
        if let Some(&bad) = xs.iter().find(|&&v| self.value(v).rows() != rows) {
            return Err(Error::shape(
                "concat_cols",
                format!("{} rows vs {rows}", self.value(bad).rows()),
            ));
        }
        let total: usize = xs.iter().map(|&v| self.value(v).cols()).sum();
        let mut data = Vec::with_capacity(rows * total);
        for r in 0..rows {
            for &v in xs {
                data.extend_from_slice(self.value(v).row(r));
            }
        }
        let out = Tensor::matrix(rows, total, data)?;
        Ok(self.push(Cow::Owned(out), Op::Concat(xs.to_vec())))
    }

    /// Softmax over consecutive column segments of the given widths.
    pub fn softmax_segments(&mut self, x: Var, widths: &[usize]) -> Result<Var> {
        let (rows, cols) = self.value(x).dims();
        if widths.iter().sum::<usize>() != cols || widths.contains(&0) {
            return Err(Error::shape("softmax", format!("segments {widths:?} over {cols} columns")));
        }
        let mut out = self.value(x).clone();
        for r in 0..rows {
            let row = &mut out.data_mut()[r * cols..(r + 1) * cols];
            let mut start = 0;
            for &w in widths {
                let seg = &mut row[start..start + w];
                let max = seg.iter().copied().fold(T::neg_infinity(), T::max);
                let mut sum = T::zero();
                for v in seg.iter_mut() {
                    *v = (*v - max).exp();
                    sum = sum + *v;
                }
                for v in seg.iter_mut() {
                    *v = *v / sum;
                }
                start += w;
            }
        }
        Ok(self.push(
            Cow::Owned(out),
            Op::Softmax {
                x,
                widths: widths.to_vec(),
            },
        ))
    }

    /// Inverted dropout: survivors are scaled by `1 / (1 - rate)`. Identity
    /// when not training or when `rate` is zero.
    pub fn dropout<R: Rng + ?Sized>(
        &mut self,
        x: Var,
        rate: f64,
        training: bool,
        rng: &mut R,
    ) -> Result<Var> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::shape("dropout", format!("rate {rate} outside [0, 1)")));
        }
        if !training || rate == 0.0 {
            return Ok(x);
        }
        let keep = T::from_f64_lossy(1.0 / (1.0 - rate));
        let mask: Vec<T> = (0..self.value(x).len())
            .map(|_| if rng.random_bool(rate) { T::zero() } else { keep })
            .collect();
        let data = self.value(x).data().iter().zip(&mask).map(|(&v, &m)| v * m).collect();
        let out = Tensor::from_vec(self.value(x).shape().to_vec(), data)?;
        Ok(self.push(Cow::Owned(out), Op::Mask { x, mask }))
    }

    /// `-sum_r w_r sum_j [t log p + (1 - t) log(1 - p)]`, logs clamped at
    /// [`BCE_EPSILON`]. Terms with a zero coefficient are skipped.
    pub fn bce(&mut self, pred: Var, target: Tensor<T>, row_weights: &[T]) -> Result<Var> {
        let p = self.value(pred);
        same_shape("bce", p, &target)?;
        let (rows, cols) = p.dims();
        if row_weights.len() != rows {
            return Err(Error::shape("bce", format!("{} weights for {rows} rows", row_weights.len())));
        }
        let eps = T::from_f64_lossy(BCE_EPSILON);
        let mut total = T::zero();
        for r in 0..rows {
            if row_weights[r] == T::zero() {
                continue;
            }
            let mut row_sum = T::zero();
            for c in 0..cols {
                let (pv, tv) = (p.get(r, c), target.get(r, c));
                if tv != T::zero() {
                    row_sum = row_sum + tv * pv.max(eps).ln();
                }
                if tv != T::one() {
                    row_sum = row_sum + (T::one() - tv) * (T::one() - pv).max(eps).ln();
                }
            }
            total = total - row_weights[r] * row_sum;
        }
        Ok(self.push(
            Cow::Owned(Tensor::scalar(total)),
            Op::Bce {
                pred,
                target,
                weights: row_weights.to_vec(),
            },
        ))
    }

    /// Elementwise sum of same-shape values.
    pub fn sum(&mut self, xs: &[Var]) -> Result<Var> {
        let Some(&first) = xs.first() else {
            return Err(Error::shape("sum", "no inputs"));
        };
        let mut out = self.value(first).clone();
        for &v in &xs[1..] {
            same_shape("sum", &out, self.value(v))?;
            out.add_assign(self.value(v));
        }
        Ok(self.push(Cow::Owned(out), Op::Sum(xs.to_vec())))
    }

    pub fn scale(&mut self, x: Var, s: T) -> Var {
        let out = self.value(x).map(|v| v * s);
        self.push(Cow::Owned(out), Op::Scale(x, s))
    }

    /// Gradients of the scalar `loss` with respect to every leaf recorded
    /// before it.
    pub fn backward(&self, loss: Var) -> Result<Gradients<T>> {
        if self.value(loss).len() != 1 {
            return Err(Error::shape("backward", "loss must be a scalar"));
        }
        let mut grads: Vec<Option<Tensor<T>>> = (0..self.nodes.len()).map(|_| None).collect();
        let mut seed = Tensor::zeros(self.value(loss).shape().to_vec());
        seed.data_mut()[0] = T::one();
        grads[loss.0] = Some(seed);

        for i in (0..=loss.0).rev() {
            let node = &self.nodes[i];
            if matches!(node.op, Op::Leaf) {
                continue;
            }
            let Some(g) = grads[i].take() else { continue };
            self.propagate(node, &g, &mut grads);
        }
        Ok(Gradients { grads })
    }

    fn propagate(&self, node: &Node<'a, T>, g: &Tensor<T>, grads: &mut [Option<Tensor<T>>]) {
        let y = &node.value;
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (m, k) = self.value(*a).dims();
                let n = self.value(*b).cols();
                let av = self.value(*a).data();
                let bv = self.value(*b).data();
                // dA += G B^T
                T::gemm(
                    m,
                    n,
                    k,
                    T::one(),
                    g.data(),
                    (n as isize, 1),
                    bv,
                    (1, n as isize),
                    T::one(),
                    slot(grads, *a, self.value(*a)).data_mut(),
                    (k as isize, 1),
                );
                // dB += A^T G
                T::gemm(
                    k,
                    m,
                    n,
                    T::one(),
                    av,
                    (1, k as isize),
                    g.data(),
                    (n as isize, 1),
                    T::one(),
                    slot(grads, *b, self.value(*b)).data_mut(),
                    (n as isize, 1),
                );
            }
            Op::AddBias(x, b) => {
                slot(grads, *x, self.value(*x)).add_assign(g);
                let (rows, cols) = g.dims();
                let db = slot(grads, *b, self.value(*b)).data_mut();
                for r in 0..rows {
                    for (d, &gv) in db.iter_mut().zip(&g.data()[r * cols..(r + 1) * cols]) {
                        *d = *d + gv;
                    }
                }
            }
            Op::Add(a, b) => {
                slot(grads, *a, self.value(*a)).add_assign(g);
                slot(grads, *b, self.value(*b)).add_assign(g);
            }
            Op::Mul(a, b) => {
                let da = elementwise(g, self.value(*b), |gv, bv| gv * bv);
                let db = elementwise(g, self.value(*a), |gv, av| gv * av);
                slot(grads, *a, self.value(*a)).add_assign(&da);
                slot(grads, *b, self.value(*b)).add_assign(&db);
            }
            Op::Sigmoid(x) => {
                let d = elementwise(g, y, |gv, yv| gv * yv * (T::one() - yv));
                slot(grads, *x, self.value(*x)).add_assign(&d);
            }
            Op::Tanh(x) => {
                let d = elementwise(g, y, |gv, yv| gv * (T::one() - yv * yv));
                slot(grads, *x, self.value(*x)).add_assign(&d);
            }
            Op::Relu(x) => {
                let d = elementwise(g, self.value(*x), |gv, xv| {
                    if xv > T::zero() { gv } else { T::zero() }
                });
                slot(grads, *x, self.value(*x)).add_assign(&d);
            }
            Op::Slice { x, start } => {
                let (rows, w) = g.dims();
                let cols = self.value(*x).cols();
                let dx = slot(grads, *x, self.value(*x)).data_mut();
                for r in 0..rows {
                    for c in 0..w {
                        let d = &mut dx[r * cols + start + c];
                        *d = *d + g.data()[r * w + c];
                    }
                }
            }
            Op::Concat(xs) => {
                let (rows, total) = g.dims();
                let mut offset = 0;
                for &v in xs {
                    let w = self.value(v).cols();
                    let dx = slot(grads, v, self.value(v)).data_mut();
                    for r in 0..rows {
                        for c in 0..w {
                            dx[r * w + c] = dx[r * w + c] + g.data()[r * total + offset + c];
                        }
                    }
                    offset += w;
                }
            }
            Op::Softmax { x, widths } => {
                let (rows, cols) = g.dims();
                let dx = slot(grads, *x, self.value(*x)).data_mut();
                for r in 0..rows {
                    let mut start = r * cols;
                    for &w in widths {
                        let ys = &y.data()[start..start + w];
                        let gs = &g.data()[start..start + w];
                        let dot = ys.iter().zip(gs).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
                        for c in 0..w {
                            dx[start + c] = dx[start + c] + ys[c] * (gs[c] - dot);
                        }
                        start += w;
                    }
                }
            }
            Op::Mask { x, mask } => {
                let dx = slot(grads, *x, self.value(*x)).data_mut();
                for ((d, &gv), &m) in dx.iter_mut().zip(g.data()).zip(mask) {
                    *d = *d + gv * m;
                }
            }
            Op::Bce {
                pred,
                target,
                weights,
            } => {
                let gs = g.item();
                let eps = T::from_f64_lossy(BCE_EPSILON);
                let p = self.value(*pred);
                let cols = p.cols();
                let dp = slot(grads, *pred, p).data_mut();
                for (r, &w) in weights.iter().enumerate() {
                    if w == T::zero() {
                        continue;
                    }
                    for c in 0..cols {
                        let (pv, tv) = (p.get(r, c), target.get(r, c));
                        let mut d = T::zero();
                        if tv != T::zero() && pv > eps {
                            d = d + tv / pv;
                        }
                        if tv != T::one() && T::one() - pv > eps {
                            d = d - (T::one() - tv) / (T::one() - pv);
                        }
                        let k = r * cols + c;
                        dp[k] = dp[k] - gs * w * d;
                    }
                }
            }
            Op::Sum(xs) => {
                for &v in xs {
                    slot(grads, v, self.value(v)).add_assign(g);
                }
            }
            Op::Scale(x, s) => {
                let d = g.map(|gv| gv * *s);
                slot(grads, *x, self.value(*x)).add_assign(&d);
            }
        }
    }
}

fn slot<'g, T: Real>(grads: &'g mut [Option<Tensor<T>>], v: Var, like: &Tensor<T>) -> &'g mut Tensor<T> {
    grads[v.0].get_or_insert_with(|| Tensor::zeros(like.shape().to_vec()))
}

/// Trainable weights of one recurrent layer.
#[derive(Debug, Clone, Copy)]
pub struct LstmVars {
    /// `input x 4H`, gate blocks ordered input, forget, candidate, output.
    pub w_input: Var,
    /// `H x 4H`.
    pub w_hidden: Var,
    /// `4H`.
    pub bias: Var,
}

/// One step of a gated recurrent (LSTM) cell. Returns `(h, c)`.
pub fn lstm_cell_step<T: Real>(
    tape: &mut Tape<'_, T>,
    x: Var,
    h_prev: Var,
    c_prev: Var,
    p: &LstmVars,
) -> Result<(Var, Var)> {
    let hidden = tape.value(h_prev).cols();
    if tape.value(p.w_hidden).dims() != (hidden, 4 * hidden) {
        return Err(Error::shape(
            "lstm_cell_step",
            format!("hidden weights {:?} for width {hidden}", tape.value(p.w_hidden).shape()),
        ));
    }
    let xi = tape.matmul(x, p.w_input)?;
    let hh = tape.matmul(h_prev, p.w_hidden)?;
    let pre = tape.add(xi, hh)?;
    let gates = tape.add_bias(pre, p.bias)?;
    let i = tape.slice_cols(gates, 0, hidden)?;
    let f = tape.slice_cols(gates, hidden, 2 * hidden)?;
    let g = tape.slice_cols(gates, 2 * hidden, 3 * hidden)?;
    let o = tape.slice_cols(gates, 3 * hidden, 4 * hidden)?;
    let (i, f, g, o) = (tape.sigmoid(i), tape.sigmoid(f), tape.tanh(g), tape.sigmoid(o));
    let keep = tape.mul(f, c_prev)?;
    let write = tape.mul(i, g)?;
    let c = tape.add(keep, write)?;
    let tc = tape.tanh(c);
    let h = tape.mul(o, tc)?;
    Ok((h, c))
}
