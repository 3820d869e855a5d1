//! High-level semantic head trained with a twice-triplet contrastive
//! objective over quadruples of texts.
//!
//! Each quadruple pairs an anchor text with a human-imitating rewrite and a
//! paraphrase (positives) and an unrelated human-authored text (negative).
//! Distances use an adjusted cosine similarity shifted into `[0, 1]`, and
//! the loss sums a hinge over all 2 x 3 positive/negative pairs. The trained
//! artifact is a two-layer projection head over frozen embeddings; its
//! L2-normalized output is the high-level feature for fusion.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{EmbeddingError, EmbeddingProvider};
use crate::llm::{LlmEngine, LlmError};
use crate::tensor::{AdamW, Binding, NodeId, ParamStore, Tape, Tensor, TensorError};

#[derive(Debug, Error)]
pub enum ContrastiveError {
    #[error("zero vector has no direction for cosine similarity")]
    ZeroVector,
    #[error("margin must be positive, got {alpha}")]
    InvalidMargin { alpha: f64 },
    #[error("contrastive training needs at least one quadruple")]
    EmptyDataset,
    #[error("tensor error: {0}")]
    Tensor(#[from] TensorError),
    #[error("embedding error: {0}")]
    Embedding(#[from] EmbeddingError),
    #[error("llm error: {0}")]
    Llm(#[from] LlmError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed quadruple record on line {line}: {message}")]
    Schema { line: usize, message: String },
}

const EPS: f64 = 1e-12;

/// Cosine similarity shifted and rescaled into `[0, 1]`:
/// `(a . b) / (2 |a| |b|) + 1/2`.
pub fn adjusted_cosine(a: &[f64], b: &[f64]) -> Result<f64, ContrastiveError> {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (na, nb) = (norm(a), norm(b));
    if na < EPS || nb < EPS {
        return Err(ContrastiveError::ZeroVector);
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok(dot / (2.0 * na * nb) + 0.5)
}

/// Distance form of the adjusted cosine, also in `[0, 1]`.
pub fn adjusted_distance(a: &[f64], b: &[f64]) -> Result<f64, ContrastiveError> {
    Ok(1.0 - adjusted_cosine(a, b)?)
}

/// The four texts of one contrastive training sample. The human text must
/// come from a different sample than the anchor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quadruple {
    pub id: String,
    pub t_llm: String,
    pub t_human_like: String,
    pub t_rewritten: String,
    pub t_human: String,
    pub template_hashes: Vec<(String, String)>,
}

/// A quadruple with its four texts embedded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedQuadruple {
    pub id: String,
    pub anchor: Vec<f64>,
    pub human_like: Vec<f64>,
    pub rewritten: Vec<f64>,
    pub human: Vec<f64>,
}

pub fn save_quadruples(path: &Path, quadruples: &[Quadruple]) -> Result<(), ContrastiveError> {
    let mut out = BufWriter::new(File::create(path)?);
    for q in quadruples {
        serde_json::to_writer(&mut out, q).map_err(|e| ContrastiveError::Schema {
            line: 0,
            message: e.to_string(),
        })?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn load_quadruples(path: &Path) -> Result<Vec<Quadruple>, ContrastiveError> {
    let reader = BufReader::new(File::open(path)?);
    let mut quadruples = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let q: Quadruple = serde_json::from_str(&line).map_err(|e| ContrastiveError::Schema {
            line: i + 1,
            message: e.to_string(),
        })?;
        quadruples.push(q);
    }
    Ok(quadruples)
}

/// Build quadruples from a pool of LLM-leaning texts and a pool of human
/// texts. Variants come from the engine; the negative is drawn uniformly
/// from the human pool under the seed, skipping index collisions with the
/// anchor position when possible.
pub fn build_quadruples(
    llm_texts: &[(String, String)],
    human_texts: &[String],
    engine: &LlmEngine,
    seed: u64,
) -> Result<Vec<Quadruple>, ContrastiveError> {
    if llm_texts.is_empty() || human_texts.is_empty() {
        return Err(ContrastiveError::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(llm_texts.len());
    for (i, (id, t_llm)) in llm_texts.iter().enumerate() {
        let (t_human_like, t_rewritten) = engine.generate_variants(t_llm)?;
        let mut neg = rng.gen_range(0..human_texts.len());
        if human_texts.len() > 1 && neg == i % human_texts.len() {
            neg = (neg + 1) % human_texts.len();
        }
        out.push(Quadruple {
            id: id.clone(),
            t_llm: t_llm.clone(),
            t_human_like,
            t_rewritten,
            t_human: human_texts[neg].clone(),
            template_hashes: engine.templates.hashes(),
        });
    }
    Ok(out)
}

pub fn embed_quadruple(
    q: &Quadruple,
    provider: &dyn EmbeddingProvider,
) -> Result<EmbeddedQuadruple, ContrastiveError> {
    Ok(EmbeddedQuadruple {
        id: q.id.clone(),
        anchor: provider.embed_single(&q.t_llm)?.vector,
        human_like: provider.embed_single(&q.t_human_like)?.vector,
        rewritten: provider.embed_single(&q.t_rewritten)?.vector,
        human: provider.embed_single(&q.t_human)?.vector,
    })
}

/// Two-layer projection head (`d_model -> d_model -> d_proj`, ReLU between)
/// whose parameters live in a [`ParamStore`] under the `contrastive.`
/// prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectionHead {
    pub d_model: usize,
    pub d_proj: usize,
}

pub const HEAD_PREFIX: &str = "contrastive.";

impl ProjectionHead {
    pub const DEFAULT_D_PROJ: usize = 128;

    pub fn init(store: &mut ParamStore, d_model: usize, d_proj: usize, seed: u64) -> Self {
        store.insert_linear_init("contrastive.l1.weight", d_model, d_model, d_model, seed);
        // Small positive bias keeps the hidden ReLU units alive at init,
        // which would otherwise zero out whole projections (and with them
        // the cosine direction) for strongly negative inputs.
        let bias = Tensor::from_vec(1, d_model, vec![0.01; d_model]);
        store.insert("contrastive.l1.bias", bias, true);
        store.insert_linear_init(
            "contrastive.l2.weight",
            d_model,
            d_proj,
            d_model,
            seed.wrapping_add(1),
        );
        store.insert("contrastive.l2.bias", Tensor::zeros(1, d_proj), true);
        Self { d_model, d_proj }
    }

    /// Forward pass without the tape, for inference and test oracles.
    pub fn forward_plain(
        &self,
        store: &ParamStore,
        input: &[f64],
    ) -> Result<Vec<f64>, ContrastiveError> {
        let x = Tensor::row_vector(input.to_vec());
        let h = x
            .matmul(store.value("contrastive.l1.weight")?)?
            .add_bias(store.value("contrastive.l1.bias")?)?
            .relu();
        let out = h
            .matmul(store.value("contrastive.l2.weight")?)?
            .add_bias(store.value("contrastive.l2.bias")?)?;
        Ok(out.data)
    }

    /// Forward pass on the tape for training.
    pub fn forward_tape(
        &self,
        tape: &mut Tape,
        binding: &mut Binding,
        store: &ParamStore,
        input: NodeId,
    ) -> Result<NodeId, ContrastiveError> {
        let w1 = binding.bind(tape, store, "contrastive.l1.weight")?;
        let b1 = binding.bind(tape, store, "contrastive.l1.bias")?;
        let w2 = binding.bind(tape, store, "contrastive.l2.weight")?;
        let b2 = binding.bind(tape, store, "contrastive.l2.bias")?;
        let h = tape.matmul(input, w1)?;
        let h = tape.add_bias(h, b1)?;
        let h = tape.relu(h);
        let out = tape.matmul(h, w2)?;
        let out = tape.add_bias(out, b2)?;
        Ok(out)
    }
}

/// The projection output, L2-normalized: the high-level semantic feature
/// consumed by fusion.
pub fn high_feature(
    embedding: &[f64],
    head: &ProjectionHead,
    store: &ParamStore,
) -> Result<Vec<f64>, ContrastiveError> {
    let projected = head.forward_plain(store, embedding)?;
    let norm = projected.iter().map(|x| x * x).sum::<f64>().sqrt().max(EPS);
    Ok(projected.iter().map(|x| x / norm).collect())
}

/// Positive and negative adjusted-cosine distances of a projected
/// quadruple: anchor vs each rewrite, and each of the three non-human
/// texts vs the human text.
pub fn pair_distances(
    q: &EmbeddedQuadruple,
    head: &ProjectionHead,
    store: &ParamStore,
) -> Result<([f64; 2], [f64; 3]), ContrastiveError> {
    let anchor = head.forward_plain(store, &q.anchor)?;
    let human_like = head.forward_plain(store, &q.human_like)?;
    let rewritten = head.forward_plain(store, &q.rewritten)?;
    let human = head.forward_plain(store, &q.human)?;
    let d_pos = [
        adjusted_distance(&anchor, &human_like)?,
        adjusted_distance(&anchor, &rewritten)?,
    ];
    let d_neg = [
        adjusted_distance(&anchor, &human)?,
        adjusted_distance(&human_like, &human)?,
        adjusted_distance(&rewritten, &human)?,
    ];
    Ok((d_pos, d_neg))
}

/// Hinge sum over all six positive/negative pairs:
/// `sum_k sum_l max(0, d_pos_k - d_neg_l + alpha)`.
pub fn twice_triplet_loss(
    d_pos: &[f64; 2],
    d_neg: &[f64; 3],
    alpha: f64,
) -> Result<f64, ContrastiveError> {
    if alpha <= 0.0 {
        return Err(ContrastiveError::InvalidMargin { alpha });
    }
    let mut loss = 0.0;
    for &dp in d_pos {
        for &dn in d_neg {
            loss += (dp - dn + alpha).max(0.0);
        }
    }
    Ok(loss)
}

fn tape_adjusted_distance(
    tape: &mut Tape,
    a: NodeId,
    b: NodeId,
) -> Result<NodeId, ContrastiveError> {
    let ab = tape.mul(a, b)?;
    let dot = tape.sum_all(ab);
    let aa = tape.mul(a, a)?;
    let na = tape.sum_all(aa);
    let na = tape.sqrt(na);
    let bb = tape.mul(b, b)?;
    let nb = tape.sum_all(bb);
    let nb = tape.sqrt(nb);
    let denom = tape.mul(na, nb)?;
    let denom = tape.scale(denom, 2.0);
    // Epsilon keeps the gradient finite if a projection collapses to zero.
    let denom = tape.add_const(denom, 1e-12);
    let sim = tape.div(dot, denom)?;
    let sim = tape.add_const(sim, 0.5);
    let neg = tape.scale(sim, -1.0);
    Ok(tape.add_const(neg, 0.5)) // 1 - sim = -(sim - 0.5) + 0.5... folded: -sim + 1
}

/// Mean twice-triplet loss of a batch, built on the tape. `neg_index[i]`
/// selects which quadruple's human embedding serves as quadruple `i`'s
/// in-batch negative.
pub fn batch_loss_tape(
    tape: &mut Tape,
    binding: &mut Binding,
    store: &ParamStore,
    head: &ProjectionHead,
    batch: &[&EmbeddedQuadruple],
    neg_index: &[usize],
    alpha: f64,
) -> Result<NodeId, ContrastiveError> {
    if alpha <= 0.0 {
        return Err(ContrastiveError::InvalidMargin { alpha });
    }
    if batch.is_empty() {
        return Err(ContrastiveError::EmptyDataset);
    }
    let mut total: Option<NodeId> = None;
    for (i, q) in batch.iter().enumerate() {
        let human_src = &batch[neg_index[i]].human;
        let embed = |tape: &mut Tape, v: &[f64]| tape.input(Tensor::row_vector(v.to_vec()));
        let anchor_in = embed(tape, &q.anchor);
        let hl_in = embed(tape, &q.human_like);
        let rw_in = embed(tape, &q.rewritten);
        let hu_in = embed(tape, human_src);
        let anchor = head.forward_tape(tape, binding, store, anchor_in)?;
        let human_like = head.forward_tape(tape, binding, store, hl_in)?;
        let rewritten = head.forward_tape(tape, binding, store, rw_in)?;
        let human = head.forward_tape(tape, binding, store, hu_in)?;
        let d_pos = [
            tape_adjusted_distance(tape, anchor, human_like)?,
            tape_adjusted_distance(tape, anchor, rewritten)?,
        ];
        let d_neg = [
            tape_adjusted_distance(tape, anchor, human)?,
            tape_adjusted_distance(tape, human_like, human)?,
            tape_adjusted_distance(tape, rewritten, human)?,
        ];
        for dp in d_pos {
            for dn in d_neg {
                let diff = tape.sub(dp, dn)?;
                let shifted = tape.add_const(diff, alpha);
                let hinge = tape.relu(shifted);
                total = Some(match total {
                    Some(t) => tape.add(t, hinge)?,
                    None => hinge,
                });
            }
        }
    }
    Ok(tape.scale(total.expect("non-empty batch"), 1.0 / batch.len() as f64))
}

/// Plain recomputation of [`batch_loss_tape`]'s forward value; used as an
/// independent oracle in tests and for cheap loss reporting.
pub fn batch_loss_value(
    store: &ParamStore,
    head: &ProjectionHead,
    batch: &[&EmbeddedQuadruple],
    neg_index: &[usize],
    alpha: f64,
) -> Result<f64, ContrastiveError> {
    if batch.is_empty() {
        return Err(ContrastiveError::EmptyDataset);
    }
    let mut total = 0.0;
    for (i, q) in batch.iter().enumerate() {
        let mut swapped = (*q).clone();
        swapped.human = batch[neg_index[i]].human.clone();
        let (d_pos, d_neg) = pair_distances(&swapped, head, store)?;
        total += twice_triplet_loss(&d_pos, &d_neg, alpha)?;
    }
    Ok(total / batch.len() as f64)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContrastiveTrainConfig {
    pub alpha: f64,
    pub lr: f64,
    pub weight_decay: f64,
    pub epochs: u32,
    pub batch_size: usize,
    pub step_size: u32,
    pub gamma: f64,
    pub seed: u64,
}

impl Default for ContrastiveTrainConfig {
    fn default() -> Self {
        Self {
            alpha: 0.3,
            lr: 1e-3,
            weight_decay: 1e-4,
            epochs: 30,
            batch_size: 512,
            step_size: 5,
            gamma: 0.5,
            seed: 0,
        }
    }
}

/// Assign each batch element a different element's human text as its
/// negative (a rotation when the batch has more than one element).
fn in_batch_negatives(len: usize) -> Vec<usize> {
    if len <= 1 {
        vec![0; len]
    } else {
        (0..len).map(|i| (i + 1) % len).collect()
    }
}

/// Train the projection head with AdamW under the step learning-rate
/// schedule. Returns the mean epoch losses (evaluated as optimization
/// proceeds), deterministic under the seed.
pub fn train_contrastive(
    quadruples: &[EmbeddedQuadruple],
    head: &ProjectionHead,
    store: &mut ParamStore,
    config: &ContrastiveTrainConfig,
) -> Result<Vec<f64>, ContrastiveError> {
    if quadruples.is_empty() {
        return Err(ContrastiveError::EmptyDataset);
    }
    if config.alpha <= 0.0 {
        return Err(ContrastiveError::InvalidMargin {
            alpha: config.alpha,
        });
    }
    let mut optimizer = AdamW::new(config.lr, config.weight_decay);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut curve = Vec::with_capacity(config.epochs as usize);
    let mut order: Vec<usize> = (0..quadruples.len()).collect();
    for epoch in 0..config.epochs {
        optimizer.lr = crate::tensor::steplr(epoch, config.lr, config.step_size, config.gamma);
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(config.batch_size.max(1)) {
            let batch: Vec<&EmbeddedQuadruple> =
                chunk.iter().map(|&i| &quadruples[i]).collect();
            let neg_index = in_batch_negatives(batch.len());
            let mut tape = Tape::new();
            let mut binding = Binding::new();
            let loss = batch_loss_tape(
                &mut tape,
                &mut binding,
                store,
                head,
                &batch,
                &neg_index,
                config.alpha,
            )?;
            epoch_loss += tape.value(loss).item()?;
            batches += 1;
            let grads = tape.backward(loss)?;
            store.zero_grad();
            binding.harvest(&grads, store)?;
            optimizer.step(store)?;
        }
        curve.push(epoch_loss / batches.max(1) as f64);
    }
    Ok(curve)
}
