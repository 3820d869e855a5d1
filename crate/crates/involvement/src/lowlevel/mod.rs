//! Low-level statistical features: 15 readability indices plus the
//! authorstyle groups, extracted per sentence into a fixed-width vector
//! described by a versioned layout manifest.

pub mod annotate;
pub mod authorstyle;
pub mod lexicons;
pub mod readability;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use annotate::{annotate, PosTag, Token, TokenAnnotation};
pub use authorstyle::{authorstyle_features, authorstyle_layout};
pub use readability::{readability_features, READABILITY_SLOTS};

use crate::corpus::Sentence;

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("sentence has no word tokens")]
    DegenerateInput,
    #[error("normalization stats layout hash {stats} does not match feature layout {layout}")]
    StatsMismatch { stats: String, layout: String },
}

/// Ordered slot names for the full low-level vector: readability first,
/// then authorstyle.
pub fn layout() -> Vec<String> {
    let mut slots: Vec<String> = READABILITY_SLOTS.iter().map(|s| s.to_string()).collect();
    slots.extend(authorstyle_layout());
    slots
}

pub fn layout_width() -> usize {
    layout().len()
}

/// Hash of the slot layout plus the lexicon bundle; recorded in manifests
/// and checkpoints so mismatched feature spaces are rejected early.
pub fn layout_hash() -> String {
    let mut hasher = Sha256::new();
    for slot in layout() {
        hasher.update(slot.as_bytes());
        hasher.update([0u8]);
    }
    hasher.update(lexicons::lexicon_hash().as_bytes());
    format!("{:x}", hasher.finalize())
}

/// Versioned JSON manifest of the feature layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayoutManifest {
    pub version: u32,
    pub hash: String,
    pub lexicon_hash: String,
    pub slots: Vec<String>,
}

pub fn layout_manifest() -> LayoutManifest {
    LayoutManifest {
        version: 1,
        hash: layout_hash(),
        lexicon_hash: lexicons::lexicon_hash(),
        slots: layout(),
    }
}

/// Fixed-width low-level feature vector for one sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowLevelVector {
    pub values: Vec<f64>,
}

/// Extract the full low-level vector. A degenerate sentence (no word
/// tokens) is imputed as all zeros rather than an error so document
/// batches keep their shape; entries are always finite.
pub fn extract(sentence: &Sentence) -> LowLevelVector {
    let ann = annotate(sentence);
    let mut values = Vec::with_capacity(layout_width());
    match readability_features(&ann) {
        Ok(read) => values.extend(read.iter().map(|(_, v)| *v)),
        Err(FeatureError::DegenerateInput) => values.extend(vec![0.0; READABILITY_SLOTS.len()]),
        Err(_) => unreachable!(),
    }
    match authorstyle_features(&ann) {
        Ok(style) => values.extend(style),
        Err(FeatureError::DegenerateInput) => {
            values.extend(vec![0.0; authorstyle_layout().len()])
        }
        Err(_) => unreachable!(),
    }
    debug_assert_eq!(values.len(), layout_width());
    debug_assert!(values.iter().all(|v| v.is_finite()));
    LowLevelVector { values }
}

/// Per-slot mean/std computed on the training split only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub layout_hash: String,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormStats {
    pub fn fit(vectors: &[LowLevelVector]) -> Self {
        let width = layout_width();
        let n = vectors.len().max(1) as f64;
        let mut mean = vec![0.0; width];
        for v in vectors {
            for (m, x) in mean.iter_mut().zip(&v.values) {
                *m += x;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut std = vec![0.0; width];
        for v in vectors {
            for ((s, m), x) in std.iter_mut().zip(&mean).zip(&v.values) {
                *s += (x - m) * (x - m);
            }
        }
        for s in &mut std {
            *s = (*s / n).sqrt();
        }
        Self {
            layout_hash: layout_hash(),
            mean,
            std,
        }
    }

    /// Z-score each slot; near-constant slots (std below 1e-8) map to zero.
    pub fn apply(&self, raw: &LowLevelVector) -> Result<LowLevelVector, FeatureError> {
        let current = layout_hash();
        if self.layout_hash != current || raw.values.len() != self.mean.len() {
            return Err(FeatureError::StatsMismatch {
                stats: self.layout_hash.clone(),
                layout: current,
            });
        }
        let values = raw
            .values
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&x, (&m, &s))| if s < 1e-8 { 0.0 } else { (x - m) / s })
            .collect();
        Ok(LowLevelVector { values })
    }
}
