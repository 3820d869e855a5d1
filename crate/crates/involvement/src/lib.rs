//! Sentence-level detection of LLM involvement in documents.
//!
//! The pipeline scores every sentence of a document on three dimensions
//! (lexicon, grammar, syntax), each in `[0, 1]`, by fusing three feature
//! levels:
//!
//! - **low**: readability indices and authorstyle statistics computed
//!   directly from the sentence text ([`lowlevel`]),
//! - **high**: a projection of the sentence embedding trained with a
//!   twice-triplet contrastive objective ([`contrastive`]),
//! - **deep**: cross-attention of the sentence embedding over a refined
//!   embedding of an LLM's whole-text linguistic analysis ([`deep`]).
//!
//! The fused vector feeds a small MLP regressor; an auxiliary evaluator
//! head over the refined analysis representation contributes a weighted
//! MSE term to the joint loss ([`fusion`]).
//!
//! Everything runs offline by default: embeddings come from a
//! deterministic hashing provider and LLM calls fall back to rule-based
//! generators, so training and evaluation are reproducible end to end.

pub mod checkpoint;
pub mod config;
pub mod contrastive;
pub mod corpus;
pub mod deep;
pub mod embedding;
pub mod eval;
pub mod fusion;
pub mod llm;
pub mod lowlevel;
pub mod report;
pub mod synth;
pub mod tensor;
