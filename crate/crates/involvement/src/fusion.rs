//! Weighted fusion of the three feature levels, the prediction and
//! evaluator heads, the joint loss, and the training loop that owns them.
//!
//! A sentence's low-level statistical vector, its L2-normalized projection
//! (high-level), and its cross-attention pull over the refined analysis
//! rows (deep) are each scaled by a learnable weight, concatenated, and fed
//! to a small MLP with three sigmoid outputs. A second MLP scores the
//! pooled analysis representation; its MSE joins the prediction MSE as
//! `L = L_pred + beta * L_llm`.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checkpoint::{Checkpoint, CheckpointError};
use crate::config::TrainConfig;
use crate::contrastive::{ContrastiveError, ProjectionHead};
use crate::corpus::{segment_document, Document, InvolvementScores, SegmentMode};
use crate::deep::{evaluator_head_input_tape, AnalysisStack, CrossAttender, DeepError};
use crate::embedding::{EmbeddingError, EmbeddingProvider};
use crate::llm::{LlmEngine, LlmError};
use crate::lowlevel::{self, FeatureError, NormStats};
use crate::tensor::{steplr, AdamW, Binding, NodeId, ParamStore, Tape, Tensor, TensorError};

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("model parameters are not loaded: {0}")]
    ModelNotLoaded(String),
    #[error("document has no sentences to predict")]
    EmptyDocument,
    #[error("training needs at least one labeled document")]
    EmptyDataset,
    #[error("sentence {index} in document {doc} has no label")]
    MissingLabel { doc: String, index: usize },
    #[error("tensor error: {0}")]
    Tensor(#[from] TensorError),
    #[error("deep feature error: {0}")]
    Deep(#[from] DeepError),
    #[error("contrastive error: {0}")]
    Contrastive(#[from] ContrastiveError),
    #[error("feature error: {0}")]
    Feature(#[from] FeatureError),
    #[error("embedding error: {0}")]
    Embedding(#[from] EmbeddingError),
    #[error("llm error: {0}")]
    Llm(#[from] LlmError),
    #[error("checkpoint error: {0}")]
    Checkpoint(#[from] CheckpointError),
}

/// Which feature blocks participate in fusion and how wide each is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockLayout {
    pub use_low: bool,
    pub use_high: bool,
    pub use_deep: bool,
    pub width_low: usize,
    pub width_high: usize,
    pub width_deep: usize,
    /// Scalar mode: one learnable weight per block instead of a vector.
    pub scalar_weights: bool,
}

impl BlockLayout {
    pub fn fused_width(&self) -> usize {
        let mut w = 0;
        if self.use_low {
            w += self.width_low;
        }
        if self.use_high {
            w += self.width_high;
        }
        if self.use_deep {
            w += self.width_deep;
        }
        w
    }

    fn blocks(&self) -> Vec<(&'static str, usize)> {
        let mut out = Vec::new();
        if self.use_low {
            out.push(("fusion.w_low", self.width_low));
        }
        if self.use_high {
            out.push(("fusion.w_high", self.width_high));
        }
        if self.use_deep {
            out.push(("fusion.w_deep", self.width_deep));
        }
        out
    }

    pub fn init(&self, store: &mut ParamStore) {
        for (path, width) in self.blocks() {
            let cols = if self.scalar_weights { 1 } else { width };
            store.insert(path, Tensor::ones(1, cols), true);
        }
    }
}

/// Weighted concatenation `concat(w_low . f_low, w_high . f_high,
/// w_deep . f_deep)` over the enabled blocks, on the tape.
pub fn fuse_tape(
    tape: &mut Tape,
    binding: &mut Binding,
    store: &ParamStore,
    layout: &BlockLayout,
    f_low: Option<NodeId>,
    f_high: Option<NodeId>,
    f_deep: Option<NodeId>,
) -> Result<NodeId, FusionError> {
    let mut parts = Vec::new();
    let features = [
        (layout.use_low, "fusion.w_low", layout.width_low, f_low),
        (layout.use_high, "fusion.w_high", layout.width_high, f_high),
        (layout.use_deep, "fusion.w_deep", layout.width_deep, f_deep),
    ];
    for (enabled, path, width, feature) in features {
        if !enabled {
            continue;
        }
        let feature = feature.ok_or_else(|| FusionError::ModelNotLoaded(path.to_string()))?;
        let w = binding.bind(tape, store, path)?;
        let w = if layout.scalar_weights {
            // Broadcast the scalar across the block: [1,1] x [1,width].
            let ones = tape.input(Tensor::ones(1, width));
            tape.matmul(w, ones)?
        } else {
            w
        };
        parts.push(tape.mul(w, feature)?);
    }
    Ok(tape.concat_cols(&parts)?)
}

/// Forward-only fusion of plain vectors, mostly for tests and inspection.
pub fn fuse(
    store: &ParamStore,
    layout: &BlockLayout,
    f_low: &[f64],
    f_high: &[f64],
    f_deep: &[f64],
) -> Result<Vec<f64>, FusionError> {
    let mut tape = Tape::new();
    let mut binding = Binding::new();
    let low = tape.input(Tensor::row_vector(f_low.to_vec()));
    let high = tape.input(Tensor::row_vector(f_high.to_vec()));
    let deep = tape.input(Tensor::row_vector(f_deep.to_vec()));
    let fused = fuse_tape(
        &mut tape,
        &mut binding,
        store,
        layout,
        Some(low),
        Some(high),
        Some(deep),
    )?;
    Ok(tape.value(fused).data.clone())
}

/// The two MLPs: the main predictor over the fused vector and the
/// evaluator over the pooled analysis representation. Both end in three
/// sigmoid outputs, one per involvement dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictorHeads {
    pub input_width: usize,
    pub hidden_main: usize,
    pub d_model: usize,
    pub hidden_eval: usize,
}

impl PredictorHeads {
    pub fn init(
        store: &mut ParamStore,
        input_width: usize,
        hidden_main: usize,
        d_model: usize,
        hidden_eval: usize,
        seed: u64,
    ) -> Self {
        store.insert_linear_init("predictor.main.w1", input_width, hidden_main, input_width, seed);
        store.insert("predictor.main.b1", Tensor::zeros(1, hidden_main), true);
        store.insert_linear_init(
            "predictor.main.w2",
            hidden_main,
            3,
            hidden_main,
            seed.wrapping_add(1),
        );
        store.insert("predictor.main.b2", Tensor::zeros(1, 3), true);
        store.insert_linear_init(
            "predictor.eval.w1",
            d_model,
            hidden_eval,
            d_model,
            seed.wrapping_add(2),
        );
        store.insert("predictor.eval.b1", Tensor::zeros(1, hidden_eval), true);
        store.insert_linear_init(
            "predictor.eval.w2",
            hidden_eval,
            3,
            hidden_eval,
            seed.wrapping_add(3),
        );
        store.insert("predictor.eval.b2", Tensor::zeros(1, 3), true);
        Self {
            input_width,
            hidden_main,
            d_model,
            hidden_eval,
        }
    }

    fn mlp_tape(
        tape: &mut Tape,
        binding: &mut Binding,
        store: &ParamStore,
        prefix: &str,
        input: NodeId,
    ) -> Result<NodeId, FusionError> {
        let w1 = binding.bind(tape, store, &format!("{prefix}.w1"))?;
        let b1 = binding.bind(tape, store, &format!("{prefix}.b1"))?;
        let w2 = binding.bind(tape, store, &format!("{prefix}.w2"))?;
        let b2 = binding.bind(tape, store, &format!("{prefix}.b2"))?;
        let h = tape.matmul(input, w1)?;
        let h = tape.add_bias(h, b1)?;
        let h = tape.relu(h);
        let out = tape.matmul(h, w2)?;
        let out = tape.add_bias(out, b2)?;
        Ok(tape.sigmoid(out))
    }

    pub fn main_tape(
        &self,
        tape: &mut Tape,
        binding: &mut Binding,
        store: &ParamStore,
        fused: NodeId,
    ) -> Result<NodeId, FusionError> {
        Self::mlp_tape(tape, binding, store, "predictor.main", fused)
    }

    pub fn eval_tape(
        &self,
        tape: &mut Tape,
        binding: &mut Binding,
        store: &ParamStore,
        pooled: NodeId,
    ) -> Result<NodeId, FusionError> {
        Self::mlp_tape(tape, binding, store, "predictor.eval", pooled)
    }
}

/// `L_pred = MSE(pred, y)`, `L_llm = MSE(eval_pred, y)`,
/// `L = L_pred + beta * L_llm`; MSE averages over every entry.
pub fn joint_loss(
    preds: &[[f64; 3]],
    eval_preds: &[[f64; 3]],
    labels: &[[f64; 3]],
    beta: f64,
) -> Result<(f64, f64, f64), FusionError> {
    if preds.len() != labels.len() || eval_preds.len() != labels.len() || labels.is_empty() {
        return Err(FusionError::Tensor(TensorError::ShapeMismatch {
            op: "joint_loss",
            lhs: (preds.len(), eval_preds.len()),
            rhs: (labels.len(), labels.len()),
        }));
    }
    let mse = |a: &[[f64; 3]], b: &[[f64; 3]]| -> f64 {
        let total: f64 = a
            .iter()
            .zip(b)
            .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)))
            .sum();
        total / (3 * a.len()) as f64
    };
    let l_pred = mse(preds, labels);
    let l_llm = mse(eval_preds, labels);
    Ok((l_pred + beta * l_llm, l_pred, l_llm))
}

/// One sentence ready for the model: normalized low-level features, the
/// sentence embedding, and (for training) the label triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceExample {
    pub low: Vec<f64>,
    pub embedding: Vec<f64>,
    pub label: Option<[f64; 3]>,
}

/// A document after feature preparation: its sentences plus the embedded
/// rows of the whole-text linguistic analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedDocument {
    pub id: String,
    pub sentences: Vec<SentenceExample>,
    pub analysis_rows: Vec<Vec<f64>>,
}

/// Run segmentation output through feature extraction, embedding, and the
/// analysis engine to produce model-ready inputs.
pub fn prepare_document(
    doc: &Document,
    provider: &dyn EmbeddingProvider,
    engine: &LlmEngine,
    stats: &NormStats,
) -> Result<PreparedDocument, FusionError> {
    if doc.sentences.is_empty() {
        return Err(FusionError::EmptyDocument);
    }
    let texts: Vec<String> = doc.sentences.iter().map(|s| s.text.clone()).collect();
    let embeddings = provider.embed(&texts)?;
    let mut sentences = Vec::with_capacity(doc.sentences.len());
    for (sentence, embedding) in doc.sentences.iter().zip(embeddings) {
        let raw = lowlevel::extract(sentence);
        let low = stats.apply(&raw)?;
        sentences.push(SentenceExample {
            low: low.values,
            embedding: embedding.vector,
            label: sentence.labels.as_ref().map(|l| l.as_array()),
        });
    }
    let analysis = engine.analyze_text(&doc.joined_text())?;
    let analysis_doc = segment_document(&analysis.text, SegmentMode::RuleBased)
        .unwrap_or_else(|_| Document {
            id: format!("{}-analysis", doc.id),
            sentences: vec![],
            source: doc.source,
        });
    let analysis_texts: Vec<String> = if analysis_doc.sentences.is_empty() {
        vec![analysis.text.clone()]
    } else {
        analysis_doc.sentences.iter().map(|s| s.text.clone()).collect()
    };
    let analysis_rows = provider
        .embed(&analysis_texts)?
        .into_iter()
        .map(|e| e.vector)
        .collect();
    Ok(PreparedDocument {
        id: doc.id.clone(),
        sentences,
        analysis_rows,
    })
}

/// The assembled detector: every sub-component plus the shared parameter
/// store and feature normalization statistics.
pub struct Detector {
    pub store: ParamStore,
    pub head: ProjectionHead,
    pub stack: AnalysisStack,
    pub attender: CrossAttender,
    pub layout: BlockLayout,
    pub heads: PredictorHeads,
    pub norm_stats: NormStats,
    pub config: TrainConfig,
}

struct DocumentGraph {
    preds: Vec<NodeId>,
    eval_pred: NodeId,
}

impl Detector {
    pub fn init(config: &TrainConfig, norm_stats: NormStats) -> Result<Self, FusionError> {
        let mut store = ParamStore::new();
        let head = ProjectionHead::init(&mut store, config.d_model, config.d_proj, config.seed);
        let stack = AnalysisStack::init(
            &mut store,
            config.d_model,
            config.heads,
            config.seed.wrapping_add(1000),
        )?;
        let mut attender = CrossAttender::new(config.d_model);
        attender.normalize_qk = config.normalize_qk;
        let layout = BlockLayout {
            use_low: config.use_low,
            use_high: config.use_high,
            use_deep: config.use_deep,
            width_low: lowlevel::layout_width(),
            width_high: config.d_proj,
            width_deep: config.d_model,
            scalar_weights: config.scalar_fusion_weights,
        };
        layout.init(&mut store);
        let heads = PredictorHeads::init(
            &mut store,
            layout.fused_width(),
            config.hidden_main,
            config.d_model,
            config.hidden_eval,
            config.seed.wrapping_add(2000),
        );
        Ok(Self {
            store,
            head,
            stack,
            attender,
            layout,
            heads,
            norm_stats,
            config: config.clone(),
        })
    }

    fn document_graph(
        &self,
        tape: &mut Tape,
        binding: &mut Binding,
        doc: &PreparedDocument,
    ) -> Result<DocumentGraph, FusionError> {
        if doc.sentences.is_empty() {
            return Err(FusionError::EmptyDocument);
        }
        let analysis = Tensor::from_rows(
            &doc.analysis_rows
                .iter()
                .cloned()
                .collect::<Vec<Vec<f64>>>(),
        );
        let analysis_in = tape.input(analysis);
        let e_star = self
            .stack
            .refine_tape(tape, binding, &self.store, analysis_in)?;
        let mut preds = Vec::with_capacity(doc.sentences.len());
        for sentence in &doc.sentences {
            let f_low = if self.layout.use_low {
                Some(tape.input(Tensor::row_vector(sentence.low.clone())))
            } else {
                None
            };
            let f_high = if self.layout.use_high {
                let emb = tape.input(Tensor::row_vector(sentence.embedding.clone()));
                let projected = self
                    .head
                    .forward_tape(tape, binding, &self.store, emb)?;
                let sq = tape.mul(projected, projected)?;
                let norm_sq = tape.sum_all(sq);
                let norm = tape.sqrt(norm_sq);
                let norm = tape.add_const(norm, 1e-12);
                Some(tape.div_bcast(projected, norm)?)
            } else {
                None
            };
            let f_deep = if self.layout.use_deep {
                let query = tape.input(Tensor::row_vector(sentence.embedding.clone()));
                Some(self.attender.attend_tape(tape, query, e_star)?)
            } else {
                None
            };
            let fused = fuse_tape(
                tape,
                binding,
                &self.store,
                &self.layout,
                f_low,
                f_high,
                f_deep,
            )?;
            preds.push(self.heads.main_tape(tape, binding, &self.store, fused)?);
        }
        let pooled = evaluator_head_input_tape(tape, e_star);
        let eval_pred = self.heads.eval_tape(tape, binding, &self.store, pooled)?;
        Ok(DocumentGraph { preds, eval_pred })
    }

    /// Per-sentence involvement scores for a prepared document.
    pub fn predict_document(
        &self,
        doc: &PreparedDocument,
    ) -> Result<Vec<InvolvementScores>, FusionError> {
        self.ensure_loaded()?;
        let mut tape = Tape::new();
        let mut binding = Binding::new();
        let graph = self.document_graph(&mut tape, &mut binding, doc)?;
        Ok(graph
            .preds
            .iter()
            .map(|&id| {
                let v = tape.value(id);
                InvolvementScores::new(v.get(0, 0), v.get(0, 1), v.get(0, 2))
            })
            .collect())
    }

    /// The evaluator head's document-level triple.
    pub fn evaluator_predict(&self, doc: &PreparedDocument) -> Result<[f64; 3], FusionError> {
        self.ensure_loaded()?;
        let mut tape = Tape::new();
        let mut binding = Binding::new();
        let graph = self.document_graph(&mut tape, &mut binding, doc)?;
        let v = tape.value(graph.eval_pred);
        Ok([v.get(0, 0), v.get(0, 1), v.get(0, 2)])
    }

    fn ensure_loaded(&self) -> Result<(), FusionError> {
        for path in ["predictor.main.w1", "predictor.eval.w1", "contrastive.l1.weight"] {
            if !self.store.contains(path) {
                return Err(FusionError::ModelNotLoaded(path.to_string()));
            }
        }
        Ok(())
    }

    /// Mean joint loss of a batch of documents, on the tape. Returns the
    /// loss node; the count of scored sentences weights each document by
    /// its length.
    pub fn batch_loss(
        &self,
        tape: &mut Tape,
        binding: &mut Binding,
        docs: &[&PreparedDocument],
    ) -> Result<NodeId, FusionError> {
        let mut sq_pred: Option<NodeId> = None;
        let mut sq_eval: Option<NodeId> = None;
        let mut n_sentences = 0usize;
        for doc in docs {
            let graph = self.document_graph(tape, binding, doc)?;
            for (pred, sentence) in graph.preds.iter().zip(&doc.sentences) {
                let label = sentence.label.ok_or_else(|| FusionError::MissingLabel {
                    doc: doc.id.clone(),
                    index: n_sentences,
                })?;
                let y = tape.input(Tensor::row_vector(label.to_vec()));
                let d_pred = tape.sub(*pred, y)?;
                let d_pred = tape.mul(d_pred, d_pred)?;
                let s_pred = tape.sum_all(d_pred);
                sq_pred = Some(match sq_pred {
                    Some(acc) => tape.add(acc, s_pred)?,
                    None => s_pred,
                });
                let d_eval = tape.sub(graph.eval_pred, y)?;
                let d_eval = tape.mul(d_eval, d_eval)?;
                let s_eval = tape.sum_all(d_eval);
                sq_eval = Some(match sq_eval {
                    Some(acc) => tape.add(acc, s_eval)?,
                    None => s_eval,
                });
                n_sentences += 1;
            }
        }
        let scale = 1.0 / (3 * n_sentences.max(1)) as f64;
        let l_pred = tape.scale(sq_pred.ok_or(FusionError::EmptyDataset)?, scale);
        let l_llm = tape.scale(sq_eval.expect("eval accumulates with pred"), scale);
        let l_llm = tape.scale(l_llm, self.config.beta);
        Ok(tape.add(l_pred, l_llm)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), FusionError> {
        let checkpoint = Checkpoint::new(self.store.clone())
            .with_metadata("config", serde_json::to_value(&self.config).expect("config"))
            .with_metadata(
                "norm_stats",
                serde_json::to_value(&self.norm_stats).expect("norm stats"),
            )
            .with_metadata("layout_hash", serde_json::json!(lowlevel::layout_hash()))
            .with_metadata("config_hash", serde_json::json!(self.config.content_hash()));
        checkpoint.save(path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, FusionError> {
        let checkpoint = Checkpoint::load(path)?;
        let config: TrainConfig = checkpoint
            .metadata_as("config")
            .ok_or_else(|| FusionError::ModelNotLoaded("config metadata".into()))?;
        let norm_stats: NormStats = checkpoint
            .metadata_as("norm_stats")
            .ok_or_else(|| FusionError::ModelNotLoaded("norm_stats metadata".into()))?;
        let mut detector = Self::init(&config, norm_stats)?;
        detector.store = checkpoint.params;
        detector.ensure_loaded()?;
        Ok(detector)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: u32,
    pub lr: f64,
    pub train_loss: f64,
    pub val_mae: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOutcome {
    pub history: Vec<EpochMetrics>,
    pub best_epoch: u32,
    pub best_val_mae: f64,
}

/// Mean absolute error and thresholded accuracy over prepared documents,
/// averaged across the three dimensions.
pub fn quick_metrics(
    detector: &Detector,
    docs: &[PreparedDocument],
    threshold: f64,
) -> Result<(f64, f64), FusionError> {
    let mut abs = 0.0;
    let mut correct = 0usize;
    let mut n = 0usize;
    for doc in docs {
        let preds = detector.predict_document(doc)?;
        for (pred, sentence) in preds.iter().zip(&doc.sentences) {
            let label = sentence.label.ok_or_else(|| FusionError::MissingLabel {
                doc: doc.id.clone(),
                index: n,
            })?;
            for (p, y) in pred.as_array().iter().zip(&label) {
                abs += (p - y).abs();
                let bp = *p >= threshold;
                let by = *y >= threshold;
                if bp == by {
                    correct += 1;
                }
                n += 1;
            }
        }
    }
    if n == 0 {
        return Err(FusionError::EmptyDataset);
    }
    Ok((abs / n as f64, correct as f64 / n as f64))
}

/// Stage-two training: the contrastive head is frozen, everything else
/// learns under AdamW with the step schedule. The best-by-validation-MAE
/// parameters are restored into the detector at the end.
pub fn train(
    detector: &mut Detector,
    train_docs: &[PreparedDocument],
    val_docs: &[PreparedDocument],
) -> Result<TrainOutcome, FusionError> {
    if train_docs.is_empty() {
        return Err(FusionError::EmptyDataset);
    }
    let config = detector.config.clone();
    detector.store.set_trainable_prefix("contrastive.", false);
    let mut optimizer = AdamW::new(config.lr, config.weight_decay);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..train_docs.len()).collect();
    let mut history = Vec::with_capacity(config.epochs as usize);
    let mut best: Option<(u32, f64, ParamStore)> = None;
    let eval_docs = if val_docs.is_empty() { train_docs } else { val_docs };

    for epoch in 0..config.epochs {
        optimizer.lr = steplr(epoch, config.lr, config.step_size, config.gamma);
        order.shuffle(&mut rng);

        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        let mut batch: Vec<&PreparedDocument> = Vec::new();
        let mut batch_sentences = 0usize;
        let flush =
            |detector: &mut Detector,
             optimizer: &mut AdamW,
             batch: &mut Vec<&PreparedDocument>,
             epoch_loss: &mut f64,
             batches: &mut usize|
             -> Result<(), FusionError> {
                if batch.is_empty() {
                    return Ok(());
                }
                let mut tape = Tape::new();
                let mut binding = Binding::new();
                let loss = detector.batch_loss(&mut tape, &mut binding, batch)?;
                *epoch_loss += tape.value(loss).item()?;
                *batches += 1;
                let grads = tape.backward(loss)?;
                detector.store.zero_grad();
                binding.harvest(&grads, &mut detector.store)?;
                optimizer.step(&mut detector.store)?;
                batch.clear();
                Ok(())
            };
        for &i in &order {
            batch.push(&train_docs[i]);
            batch_sentences += train_docs[i].sentences.len();
            if batch_sentences >= config.batch_train {
                // SAFETY of borrow: batch holds shared borrows of train_docs
                // only; flush mutates detector/optimizer.
                let mut taken = std::mem::take(&mut batch);
                flush(detector, &mut optimizer, &mut taken, &mut epoch_loss, &mut batches)?;
                batch_sentences = 0;
            }
        }
        let mut taken = std::mem::take(&mut batch);
        flush(detector, &mut optimizer, &mut taken, &mut epoch_loss, &mut batches)?;

        let (val_mae, val_accuracy) = quick_metrics(detector, eval_docs, config.threshold)?;
        let metrics = EpochMetrics {
            epoch,
            lr: optimizer.lr,
            train_loss: epoch_loss / batches.max(1) as f64,
            val_mae,
            val_accuracy,
        };
        let improved = best
            .as_ref()
            .map(|(_, mae, _)| val_mae < *mae)
            .unwrap_or(true);
        if improved {
            best = Some((epoch, val_mae, detector.store.clone()));
        }
        history.push(metrics);
    }

    let (best_epoch, best_val_mae, best_store) = best.expect("at least one epoch ran");
    detector.store = best_store;
    Ok(TrainOutcome {
        history,
        best_epoch,
        best_val_mae,
    })
}
