//! A dynamically built computation tape over real vectors.
//!
//! Nodes are appended in evaluation order, so the tape is acyclic by
//! construction and the reverse pass simply walks it backwards. Parameters
//! live in a [`ParamStore`]; the reverse pass accumulates their gradients
//! into the store.

use rand_distr::{Distribution, Normal};

use super::params::{ParamId, ParamStore};
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Handle to a node on a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Input,
    Param(ParamId),
    Lookup(ParamId, usize),
    Affine {
        w: ParamId,
        x: Var,
        b: Option<ParamId>,
    },
    Add(Var, Var),
    Mul(Var, Var),
    Sigmoid(Var),
    Tanh(Var),
    Concat(Vec<Var>),
    Slice(Var, usize),
    SoftmaxXent {
        logits: Var,
        gold: usize,
        probs: Vec<f64>,
    },
    Sum(Vec<Var>),
}

#[derive(Debug, Clone)]
struct Node {
    value: Vec<f64>,
    op: Op,
}

/// Whether stochastic layers are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

#[derive(Debug, Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].value
    }

    /// Values of all nodes in creation order.
    pub fn values(&self) -> impl Iterator<Item = &[f64]> {
        self.nodes.iter().map(|n| n.value.as_slice())
    }

    pub fn dim(&self, v: Var) -> usize {
        self.nodes[v.0].value.len()
    }

    /// The scalar held by a one-element node.
    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value[0]
    }

    fn push(&mut self, value: Vec<f64>, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    /// A constant (no gradient flows into it).
    pub fn input(&mut self, value: Vec<f64>) -> Var {
        self.push(value, Op::Input)
    }

    /// A whole parameter flattened into a vector.
    pub fn param(&mut self, store: &ParamStore, p: ParamId) -> Var {
        self.push(store.get(p).data.clone(), Op::Param(p))
    }

    /// Row `row` of an embedding table.
    pub fn lookup(&mut self, store: &ParamStore, table: ParamId, row: usize) -> Var {
        let value = store.get(table).row(row).to_vec();
        self.push(value, Op::Lookup(table, row))
    }

    /// `W x (+ b)`.
    pub fn affine(
        &mut self,
        store: &ParamStore,
        w: ParamId,
        x: Var,
        b: Option<ParamId>,
    ) -> Result<Var> {
        let wp = store.get(w);
        let xv = &self.nodes[x.0].value;
        if wp.cols != xv.len() {
            return Err(Error::Shape(format!(
                "{} is {}x{}, input has {} elements",
                wp.name,
                wp.rows,
                wp.cols,
                xv.len()
            )));
        }
        let mut out: Vec<f64> = wp
            .data
            .chunks_exact(wp.cols)
            .map(|row| dot(row, xv))
            .collect();
        if let Some(b) = b {
            let bp = store.get(b);
            if bp.data.len() != out.len() {
                return Err(Error::Shape(format!(
                    "bias {} does not match {}",
                    bp.name, wp.name
                )));
            }
            out.iter_mut().zip(&bp.data).for_each(|(o, b)| *o += b);
        }
        Ok(self.push(out, Op::Affine { w, x, b }))
    }

    fn same_dim(&self, a: Var, b: Var, what: &str) -> Result<()> {
        if self.dim(a) != self.dim(b) {
            return Err(Error::Shape(format!(
                "{what}: {} vs {}",
                self.dim(a),
                self.dim(b)
            )));
        }
        Ok(())
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_dim(a, b, "add")?;
        let v = zip_map(self.value(a), self.value(b), |x, y| x + y);
        Ok(self.push(v, Op::Add(a, b)))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_dim(a, b, "mul")?;
        let v = zip_map(self.value(a), self.value(b), |x, y| x * y);
        Ok(self.push(v, Op::Mul(a, b)))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let v = self.value(a).iter().map(|&x| sigmoid(x)).collect();
        self.push(v, Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let v = self.value(a).iter().map(|x| x.tanh()).collect();
        self.push(v, Op::Tanh(a))
    }

    pub fn concat(&mut self, parts: &[Var]) -> Var {
        let v = parts
            .iter()
            .flat_map(|p| self.value(*p).iter().copied())
            .collect();
        self.push(v, Op::Concat(parts.to_vec()))
    }

    /// Elements `start..start + len` of `a`.
    pub fn slice(&mut self, a: Var, start: usize, len: usize) -> Result<Var> {
        if start + len > self.dim(a) {
            return Err(Error::Shape(format!(
                "slice {start}..{} of a {}-vector",
                start + len,
                self.dim(a)
            )));
        }
        let v = self.value(a)[start..start + len].to_vec();
        Ok(self.push(v, Op::Slice(a, start)))
    }

    /// `-log softmax(logits)[gold]` as a one-element node.
    pub fn softmax_xent(&mut self, logits: Var, gold: usize) -> Result<Var> {
        let z = self.value(logits);
        if gold >= z.len() {
            return Err(Error::Shape(format!(
                "gold label {gold} out of {} classes",
                z.len()
            )));
        }
        let probs = softmax(z);
        let loss = log_sum_exp(z) - z[gold];
        Ok(self.push(
            vec![loss],
            Op::SoftmaxXent {
                logits,
                gold,
                probs,
            },
        ))
    }

    /// Sum of scalar nodes.
    pub fn sum(&mut self, terms: &[Var]) -> Var {
        let total = terms.iter().map(|t| self.scalar(*t)).sum();
        self.push(vec![total], Op::Sum(terms.to_vec()))
    }

    /// Adds i.i.d. N(0, sigma^2) noise in training mode; identity otherwise.
    pub fn gaussian_noise(&mut self, x: Var, sigma: f64, mode: Mode, rng: &mut Rng) -> Result<Var> {
        if mode == Mode::Infer || sigma == 0.0 {
            return Ok(x);
        }
        let normal = Normal::new(0.0, sigma).map_err(|e| Error::Config(e.to_string()))?;
        let noise = (0..self.dim(x)).map(|_| normal.sample(rng)).collect();
        let noise = self.input(noise);
        self.add(x, noise)
    }

    /// Reverse pass from the scalar node `loss`, accumulating parameter
    /// gradients into `store`. Returns the gradients of every node.
    pub fn backward(&self, loss: Var, store: &mut ParamStore) -> Vec<Vec<f64>> {
        let mut grads: Vec<Vec<f64>> = vec![Vec::new(); self.nodes.len()];
        grads[loss.0] = vec![1.0; self.dim(loss)];

        for i in (0..=loss.0).rev() {
            if grads[i].is_empty() {
                continue;
            }
            let g = std::mem::take(&mut grads[i]);
            let node = &self.nodes[i];
            match &node.op {
                Op::Input => {}
                Op::Param(p) => {
                    let param = store.get_mut(*p);
                    axpy(&mut param.grad, 1.0, &g);
                    param.mark();
                }
                Op::Lookup(p, row) => {
                    let param = store.get_mut(*p);
                    let cols = param.cols;
                    axpy(&mut param.grad[row * cols..(row + 1) * cols], 1.0, &g);
                    param.mark_row(*row);
                }
                Op::Affine { w, x, b } => {
                    let xv = &self.nodes[x.0].value;
                    let mut dx = vec![0.0; xv.len()];
                    let param = store.get_mut(*w);
                    let cols = param.cols;
                    for (r, &dy) in g.iter().enumerate() {
                        if dy == 0.0 {
                            continue;
                        }
                        let range = r * cols..(r + 1) * cols;
                        axpy(&mut dx, dy, &param.data[range.clone()]);
                        axpy(&mut param.grad[range], dy, xv);
                    }
                    param.mark();
                    if let Some(b) = b {
                        let bias = store.get_mut(*b);
                        axpy(&mut bias.grad, 1.0, &g);
                        bias.mark();
                    }
                    accumulate(&mut grads, *x, &dx);
                }
                Op::Add(a, b) => {
                    accumulate(&mut grads, *a, &g);
                    accumulate(&mut grads, *b, &g);
                }
                Op::Mul(a, b) => {
                    let da = zip_map(&g, &self.nodes[b.0].value, |g, y| g * y);
                    let db = zip_map(&g, &self.nodes[a.0].value, |g, x| g * x);
                    accumulate(&mut grads, *a, &da);
                    accumulate(&mut grads, *b, &db);
                }
                Op::Sigmoid(a) => {
                    let da = zip_map(&g, &node.value, |g, s| g * s * (1.0 - s));
                    accumulate(&mut grads, *a, &da);
                }
                Op::Tanh(a) => {
                    let da = zip_map(&g, &node.value, |g, t| g * (1.0 - t * t));
                    accumulate(&mut grads, *a, &da);
                }
                Op::Concat(parts) => {
                    let mut offset = 0;
                    for p in parts {
                        let n = self.dim(*p);
                        accumulate(&mut grads, *p, &g[offset..offset + n]);
                        offset += n;
                    }
                }
                Op::Slice(a, start) => {
                    let n = self.dim(*a);
                    if grads[a.0].is_empty() {
                        grads[a.0] = vec![0.0; n];
                    }
                    axpy(&mut grads[a.0][*start..start + g.len()], 1.0, &g);
                }
                Op::SoftmaxXent {
                    logits,
                    gold,
                    probs,
                } => {
                    let mut d: Vec<f64> = probs.iter().map(|p| g[0] * p).collect();
                    d[*gold] -= g[0];
                    accumulate(&mut grads, *logits, &d);
                }
                Op::Sum(terms) => {
                    for t in terms {
                        accumulate(&mut grads, *t, &g);
                    }
                }
            }
            grads[i] = g;
        }
        grads
    }
}

fn accumulate(grads: &mut [Vec<f64>], target: Var, delta: &[f64]) {
    let slot = &mut grads[target.0];
    if slot.is_empty() {
        *slot = delta.to_vec();
    } else {
        axpy(slot, 1.0, delta);
    }
}

/// Dot product with eight independent accumulators so the loop vectorizes.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (xa, xb) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += xa[k] * xb[k];
        }
    }
    acc.iter().sum::<f64>() + tail
}

#[inline]
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += a * x);
}

fn zip_map(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn log_sum_exp(z: &[f64]) -> f64 {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}
