//! LSTM cells and bidirectional layers on top of the tape.
//!
//! The four gate blocks are stacked in one matrix per input, in the order
//! input, forget, output, candidate:
//!
//! ```text
//! z = W x + U h_prev + b            (4·d_h rows)
//! i = σ(z_i)  f = σ(z_f)  o = σ(z_o)  g = tanh(z_g)
//! c = f ⊙ c_prev + i ⊙ g
//! h = o ⊙ tanh(c)
//! ```

use super::graph::{Graph, Var};
use super::params::{Init, ParamId, ParamStore};
use crate::error::{Error, Result};
use crate::rng::Rng;

pub const GATE_INPUT: usize = 0;
pub const GATE_FORGET: usize = 1;
pub const GATE_OUTPUT: usize = 2;
pub const GATE_CANDIDATE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LstmParams {
    /// Input-to-hidden weights, `4·d_h × d_x`.
    pub w: ParamId,
    /// Hidden-to-hidden weights, `4·d_h × d_h`.
    pub u: ParamId,
    /// Gate biases, `4·d_h`.
    pub b: ParamId,
    pub input_dim: usize,
    pub hidden_dim: usize,
}

impl LstmParams {
    /// Glorot-uniform weights and zero biases (the forget bias included).
    pub fn new(
        store: &mut ParamStore,
        prefix: &str,
        input_dim: usize,
        hidden_dim: usize,
        rng: &mut Rng,
    ) -> Self {
        let w = store.add_matrix(
            &format!("{prefix}.w"),
            4 * hidden_dim,
            input_dim,
            Init::Glorot,
            rng,
        );
        let u = store.add_matrix(
            &format!("{prefix}.u"),
            4 * hidden_dim,
            hidden_dim,
            Init::Glorot,
            rng,
        );
        let b = store.add_matrix(&format!("{prefix}.b"), 4 * hidden_dim, 1, Init::Zeros, rng);
        LstmParams {
            w,
            u,
            b,
            input_dim,
            hidden_dim,
        }
    }

    /// Re-binds parameters that already exist in `store` under `prefix`.
    pub fn find(store: &ParamStore, prefix: &str) -> Option<Self> {
        let w = store.id(&format!("{prefix}.w"))?;
        let u = store.id(&format!("{prefix}.u"))?;
        let b = store.id(&format!("{prefix}.b"))?;
        Some(LstmParams {
            w,
            u,
            b,
            input_dim: store.get(w).cols,
            hidden_dim: store.get(u).cols,
        })
    }

    /// Rows of gate `gate` within the stacked matrices.
    pub fn gate_rows(&self, gate: usize) -> std::ops::Range<usize> {
        gate * self.hidden_dim..(gate + 1) * self.hidden_dim
    }
}

/// One LSTM step; returns `(h, c)`.
pub fn lstm_step(
    g: &mut Graph,
    store: &ParamStore,
    params: &LstmParams,
    x: Var,
    h_prev: Var,
    c_prev: Var,
) -> Result<(Var, Var)> {
    let d_h = params.hidden_dim;
    if g.dim(x) != params.input_dim || g.dim(h_prev) != d_h || g.dim(c_prev) != d_h {
        return Err(Error::Shape(format!(
            "lstm step expects x:{} h:{d_h} c:{d_h}, got x:{} h:{} c:{}",
            params.input_dim,
            g.dim(x),
            g.dim(h_prev),
            g.dim(c_prev)
        )));
    }
    let wx = g.affine(store, params.w, x, Some(params.b))?;
    let uh = g.affine(store, params.u, h_prev, None)?;
    let z = g.add(wx, uh)?;
    let zi = g.slice(z, GATE_INPUT * d_h, d_h)?;
    let zf = g.slice(z, GATE_FORGET * d_h, d_h)?;
    let zo = g.slice(z, GATE_OUTPUT * d_h, d_h)?;
    let zg = g.slice(z, GATE_CANDIDATE * d_h, d_h)?;
    let i = g.sigmoid(zi);
    let f = g.sigmoid(zf);
    let o = g.sigmoid(zo);
    let cand = g.tanh(zg);
    let keep = g.mul(f, c_prev)?;
    let write = g.mul(i, cand)?;
    let c = g.add(keep, write)?;
    let tc = g.tanh(c);
    let h = g.mul(o, tc)?;
    Ok((h, c))
}

/// Hidden states of a unidirectional pass over `inputs` from zero states.
pub fn lstm_sequence(
    g: &mut Graph,
    store: &ParamStore,
    params: &LstmParams,
    inputs: &[Var],
) -> Result<Vec<Var>> {
    let mut h = g.input(vec![0.0; params.hidden_dim]);
    let mut c = g.input(vec![0.0; params.hidden_dim]);
    let mut out = Vec::with_capacity(inputs.len());
    for &x in inputs {
        (h, c) = lstm_step(g, store, params, x, h, c)?;
        out.push(h);
    }
    Ok(out)
}

/// Runs `fwd` left to right and `bwd` right to left; position `t` gets
/// `[h_fwd(t); h_bwd(t)]`.
pub fn bilstm_layer(
    g: &mut Graph,
    store: &ParamStore,
    fwd: &LstmParams,
    bwd: &LstmParams,
    inputs: &[Var],
) -> Result<Vec<Var>> {
    if inputs.is_empty() {
        return Err(Error::Empty("bi-LSTM input sequence"));
    }
    let forward = lstm_sequence(g, store, fwd, inputs)?;
    let reversed: Vec<Var> = inputs.iter().rev().copied().collect();
    let mut backward = lstm_sequence(g, store, bwd, &reversed)?;
    backward.reverse();
    Ok(forward
        .into_iter()
        .zip(backward)
        .map(|(f, b)| g.concat(&[f, b]))
        .collect())
}

/// Character-level word representation: the final forward state and the
/// final backward state of a bi-LSTM over the character embeddings.
pub fn char_encode(
    g: &mut Graph,
    store: &ParamStore,
    fwd: &LstmParams,
    bwd: &LstmParams,
    embeddings: ParamId,
    char_ids: &[usize],
) -> Result<Var> {
    if char_ids.is_empty() {
        return Err(Error::Empty("word"));
    }
    let inputs: Vec<Var> = char_ids
        .iter()
        .map(|&c| g.lookup(store, embeddings, c))
        .collect();
    let forward = lstm_sequence(g, store, fwd, &inputs)?;
    let reversed: Vec<Var> = inputs.iter().rev().copied().collect();
    let backward = lstm_sequence(g, store, bwd, &reversed)?;
    let last_f = *forward.last().expect("non-empty");
    let last_b = *backward.last().expect("non-empty");
    Ok(g.concat(&[last_f, last_b]))
}
