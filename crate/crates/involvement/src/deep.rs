//! Deep linguistic feature extraction: a single multi-head self-attention
//! plus feed-forward block refines the embedded analysis text, and a
//! cross-attention step pulls a per-sentence deep feature out of the
//! refined rows.
//!
//! No positional encoding is added anywhere in this module, which makes
//! the cross-attention output invariant to permutations of the refined
//! rows; that property is tested rather than assumed.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensor::{Binding, NodeId, ParamStore, Tape, Tensor, TensorError};

#[derive(Debug, Error)]
pub enum DeepError {
    #[error("model width {d_model} is not divisible by {heads} heads")]
    InvalidHeads { d_model: usize, heads: usize },
    #[error("tensor error: {0}")]
    Tensor(#[from] TensorError),
}

pub const LN_EPS: f64 = 1e-5;

/// One self-attention + feed-forward block with residual connections and
/// layer normalization; parameters live under the `deep.` prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisStack {
    pub d_model: usize,
    pub heads: usize,
    pub d_ff: usize,
}

impl AnalysisStack {
    pub const DEFAULT_HEADS: usize = 8;

    pub fn init(
        store: &mut ParamStore,
        d_model: usize,
        heads: usize,
        seed: u64,
    ) -> Result<Self, DeepError> {
        if heads == 0 || d_model % heads != 0 {
            return Err(DeepError::InvalidHeads { d_model, heads });
        }
        let d_ff = 4 * d_model;
        let d_1k = d_model / heads;
        let mut s = seed;
        let mut next_seed = || {
            s = s.wrapping_add(1);
            s
        };
        for i in 0..heads {
            for name in ["wq", "wk", "wv"] {
                store.insert_linear_init(
                    format!("deep.head{i}.{name}"),
                    d_model,
                    d_1k,
                    d_model,
                    next_seed(),
                );
            }
        }
        store.insert_linear_init("deep.wo", d_model, d_model, d_model, next_seed());
        store.insert_linear_init("deep.ffn.w1", d_model, d_ff, d_model, next_seed());
        store.insert("deep.ffn.b1", Tensor::zeros(1, d_ff), true);
        store.insert_linear_init("deep.ffn.w2", d_ff, d_model, d_ff, next_seed());
        store.insert("deep.ffn.b2", Tensor::zeros(1, d_model), true);
        for ln in ["ln1", "ln2"] {
            store.insert(format!("deep.{ln}.gain"), Tensor::ones(1, d_model), true);
            store.insert(format!("deep.{ln}.bias"), Tensor::zeros(1, d_model), true);
        }
        Ok(Self {
            d_model,
            heads,
            d_ff,
        })
    }

    pub fn d_1k(&self) -> usize {
        self.d_model / self.heads
    }

    /// `E* = LN(E' + FFN(E'))` where `E' = LN(E + MHSA(E))`, on the tape.
    pub fn refine_tape(
        &self,
        tape: &mut Tape,
        binding: &mut Binding,
        store: &ParamStore,
        e: NodeId,
    ) -> Result<NodeId, DeepError> {
        let scale = 1.0 / (self.d_1k() as f64).sqrt();
        let mut head_outputs = Vec::with_capacity(self.heads);
        for i in 0..self.heads {
            let wq = binding.bind(tape, store, &format!("deep.head{i}.wq"))?;
            let wk = binding.bind(tape, store, &format!("deep.head{i}.wk"))?;
            let wv = binding.bind(tape, store, &format!("deep.head{i}.wv"))?;
            let q = tape.matmul(e, wq)?;
            let k = tape.matmul(e, wk)?;
            let v = tape.matmul(e, wv)?;
            let kt = tape.transpose(k);
            let scores = tape.matmul(q, kt)?;
            let scores = tape.scale(scores, scale);
            let attn = tape.softmax_rows(scores);
            head_outputs.push(tape.matmul(attn, v)?);
        }
        let concat = tape.concat_cols(&head_outputs)?;
        let wo = binding.bind(tape, store, "deep.wo")?;
        let mhsa = tape.matmul(concat, wo)?;
        let res1 = tape.add(e, mhsa)?;
        let g1 = binding.bind(tape, store, "deep.ln1.gain")?;
        let b1 = binding.bind(tape, store, "deep.ln1.bias")?;
        let e_prime = tape.layer_norm(res1, g1, b1, LN_EPS)?;

        let w1 = binding.bind(tape, store, "deep.ffn.w1")?;
        let fb1 = binding.bind(tape, store, "deep.ffn.b1")?;
        let w2 = binding.bind(tape, store, "deep.ffn.w2")?;
        let fb2 = binding.bind(tape, store, "deep.ffn.b2")?;
        let h = tape.matmul(e_prime, w1)?;
        let h = tape.add_bias(h, fb1)?;
        let h = tape.relu(h);
        let ffn = tape.matmul(h, w2)?;
        let ffn = tape.add_bias(ffn, fb2)?;
        let res2 = tape.add(e_prime, ffn)?;
        let g2 = binding.bind(tape, store, "deep.ln2.gain")?;
        let b2 = binding.bind(tape, store, "deep.ln2.bias")?;
        Ok(tape.layer_norm(res2, g2, b2, LN_EPS)?)
    }

    /// Forward-only refinement.
    pub fn refine(&self, store: &ParamStore, e: &Tensor) -> Result<Tensor, DeepError> {
        let mut tape = Tape::new();
        let mut binding = Binding::new();
        let input = tape.input(e.clone());
        let out = self.refine_tape(&mut tape, &mut binding, store, input)?;
        Ok(tape.value(out).clone())
    }
}

/// Scaled dot-product cross-attention from one sentence vector over the
/// refined analysis rows (keys and values alike).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossAttender {
    pub d_2k: usize,
    /// L2-normalize query and key rows before the dot product. Off by
    /// default; exposed for experimentation.
    pub normalize_qk: bool,
}

impl CrossAttender {
    pub fn new(d_2k: usize) -> Self {
        Self {
            d_2k,
            normalize_qk: false,
        }
    }

    /// `f_deep = softmax(Q Kᵀ / √d_2k) V` with `K = V = E*`, on the tape.
    pub fn attend_tape(
        &self,
        tape: &mut Tape,
        query: NodeId,
        keys_values: NodeId,
    ) -> Result<NodeId, DeepError> {
        let kt = tape.transpose(keys_values);
        let mut scores = tape.matmul(query, kt)?;
        if self.normalize_qk {
            let qq = tape.mul(query, query)?;
            let qn = tape.sum_all(qq);
            let qn = tape.sqrt(qn);
            scores = tape.div_bcast(scores, qn)?;
            let d = tape.value(keys_values).cols;
            let kk = tape.mul(keys_values, keys_values)?;
            let ones = tape.input(Tensor::ones(d, 1));
            let row_sq = tape.matmul(kk, ones)?;
            let row_norms = tape.sqrt(row_sq);
            let norms_t = tape.transpose(row_norms);
            scores = tape.div(scores, norms_t)?;
        }
        let scores = tape.scale(scores, 1.0 / (self.d_2k as f64).sqrt());
        let attn = tape.softmax_rows(scores);
        Ok(tape.matmul(attn, keys_values)?)
    }

    /// Forward-only cross-attention.
    pub fn attend(&self, query: &Tensor, keys_values: &Tensor) -> Result<Tensor, DeepError> {
        let mut tape = Tape::new();
        let q = tape.input(query.clone());
        let kv = tape.input(keys_values.clone());
        let out = self.attend_tape(&mut tape, q, kv)?;
        Ok(tape.value(out).clone())
    }

    /// The attention weight row itself, for inspection and tests.
    pub fn weights(&self, query: &Tensor, keys_values: &Tensor) -> Result<Tensor, DeepError> {
        let mut tape = Tape::new();
        let q = tape.input(query.clone());
        let kv = tape.input(keys_values.clone());
        let kt = tape.transpose(kv);
        let scores = tape.matmul(q, kt)?;
        let scores = tape.scale(scores, 1.0 / (self.d_2k as f64).sqrt());
        let attn = tape.softmax_rows(scores);
        Ok(tape.value(attn).clone())
    }
}

/// Mean-pool the refined rows into the evaluator head's input vector.
pub fn evaluator_head_input(e_star: &Tensor) -> Tensor {
    e_star.mean_rows()
}

pub fn evaluator_head_input_tape(tape: &mut Tape, e_star: NodeId) -> NodeId {
    tape.mean_rows(e_star)
}
