//! Document model, sentence segmentation, and labeled dataset ingestion.
//!
//! Datasets are JSONL, one record per document:
//! `{"id": str, "text": str, "labels": [[lex, gram, syn], ...]}` where
//! sentences inside `text` are joined by the literal `</s>` delimiter and
//! the labels array length equals the sentence count.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

/// Sentence delimiter used by delimiter-mode segmentation and the JSONL
/// dataset format.
pub const SENTENCE_DELIMITER: &str = "</s>";

/// Abbreviations that suppress a sentence break in rule-based segmentation.
/// Matching is case-insensitive on the text ending at the candidate period.
pub const ABBREVIATION_GUARDS: &[&str] = &[
    "e.g.", "i.e.", "et al.", "etc.", "cf.", "vs.", "fig.", "eq.", "dr.", "mr.", "mrs.", "ms.",
    "prof.", "no.", "ca.", "approx.",
];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("document contains no non-empty sentence")]
    EmptyDocument,
    #[error("schema error at line {line}: {message}")]
    SchemaError { line: usize, message: String },
    #[error("label out of range at line {line}: {value} is outside [0,1]")]
    LabelRangeError { line: usize, value: f64 },
    #[error("invalid split fractions ({0}, {1}, {2}): must be non-negative and sum to 1")]
    InvalidFractions(f64, f64, f64),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Per-sentence involvement scores on the three linguistic dimensions,
/// each clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvolvementScores {
    pub lex: f64,
    pub gram: f64,
    pub syn: f64,
}

impl InvolvementScores {
    pub fn new(lex: f64, gram: f64, syn: f64) -> Self {
        Self {
            lex: lex.clamp(0.0, 1.0),
            gram: gram.clamp(0.0, 1.0),
            syn: syn.clamp(0.0, 1.0),
        }
    }

    pub fn mean(&self) -> f64 {
        (self.lex + self.gram + self.syn) / 3.0
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.lex, self.gram, self.syn]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub text: String,
    pub index: usize,
    pub labels: Option<InvolvementScores>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Human,
    Llm,
    Mixed,
    Unknown,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Source::Human => "human",
            Source::Llm => "llm",
            Source::Mixed => "mixed",
            Source::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub sentences: Vec<Sentence>,
    pub source: Source,
}

impl Document {
    /// Full text with sentences joined by the dataset delimiter.
    pub fn joined_text(&self) -> String {
        self.sentences
            .iter()
            .map(|s| s.text.as_str())
            .collect::<Vec<_>>()
            .join(SENTENCE_DELIMITER)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentMode {
    Delimiter,
    RuleBased,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    /// Continuous labels in [0,1].
    Regression,
    /// Labels restricted to exactly 0 or 1.
    Binary,
}

/// Split raw text into a [`Document`]. Input is NFC-normalized first so
/// character counts downstream are stable.
///
/// Delimiter mode splits on the literal `</s>` token and keeps segment text
/// verbatim (joining the segments with the delimiter reproduces the input,
/// up to dropped all-whitespace segments). Rule-based mode splits at
/// sentence-final punctuation followed by whitespace and an uppercase
/// letter or digit, guarded by [`ABBREVIATION_GUARDS`].
pub fn segment_document(raw: &str, mode: SegmentMode) -> Result<Document, CorpusError> {
    let normalized: String = raw.nfc().collect();
    let segments: Vec<String> = match mode {
        SegmentMode::Delimiter => normalized
            .split(SENTENCE_DELIMITER)
            .map(|s| s.to_string())
            .collect(),
        SegmentMode::RuleBased => rule_based_split(&normalized),
    };
    let sentences: Vec<Sentence> = segments
        .into_iter()
        .filter(|s| !s.trim().is_empty())
        .enumerate()
        .map(|(index, text)| Sentence {
            text,
            index,
            labels: None,
        })
        .collect();
    if sentences.is_empty() {
        return Err(CorpusError::EmptyDocument);
    }
    Ok(Document {
        id: String::new(),
        sentences,
        source: Source::Unknown,
    })
}

fn rule_based_split(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut segments = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        if c == '.' || c == '!' || c == '?' {
            // Look ahead: whitespace then uppercase or digit.
            let mut j = i + 1;
            let mut saw_ws = false;
            while j < chars.len() && chars[j].is_whitespace() {
                saw_ws = true;
                j += 1;
            }
            let next_starts_sentence =
                j < chars.len() && (chars[j].is_uppercase() || chars[j].is_ascii_digit());
            if saw_ws && next_starts_sentence && !(c == '.' && ends_with_abbreviation(&chars[start..=i])) {
                segments.push(chars[start..=i].iter().collect::<String>().trim().to_string());
                start = j;
                i = j;
                continue;
            }
        }
        i += 1;
    }
    if start < chars.len() {
        segments.push(chars[start..].iter().collect::<String>().trim().to_string());
    }
    segments
}

fn ends_with_abbreviation(segment: &[char]) -> bool {
    let text: String = segment.iter().collect::<String>().to_lowercase();
    ABBREVIATION_GUARDS.iter().any(|abbr| text.ends_with(abbr))
}

#[derive(Debug, Serialize, Deserialize)]
struct DatasetRecord {
    id: String,
    text: String,
    labels: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<Source>,
}

/// Load a JSONL dataset where every sentence carries a label triple.
pub fn load_labeled_dataset(
    path: &Path,
    format: DatasetFormat,
) -> Result<Vec<Document>, CorpusError> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut docs = Vec::new();
    for (line_idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let line_no = line_idx + 1;
        docs.push(parse_record(&line, line_no, format)?);
    }
    Ok(docs)
}

fn parse_record(
    line: &str,
    line_no: usize,
    format: DatasetFormat,
) -> Result<Document, CorpusError> {
    let record: DatasetRecord =
        serde_json::from_str(line).map_err(|e| CorpusError::SchemaError {
            line: line_no,
            message: e.to_string(),
        })?;
    let mut doc = segment_document(&record.text, SegmentMode::Delimiter).map_err(|_| {
        CorpusError::SchemaError {
            line: line_no,
            message: "record text contains no non-empty sentence".into(),
        }
    })?;
    doc.id = record.id;
    doc.source = record.source.unwrap_or(Source::Unknown);
    if record.labels.len() != doc.sentences.len() {
        return Err(CorpusError::SchemaError {
            line: line_no,
            message: format!(
                "labels length {} does not match sentence count {}",
                record.labels.len(),
                doc.sentences.len()
            ),
        });
    }
    for (sentence, triple) in doc.sentences.iter_mut().zip(&record.labels) {
        if triple.len() != 3 {
            return Err(CorpusError::SchemaError {
                line: line_no,
                message: format!("label triple has {} entries, expected 3", triple.len()),
            });
        }
        for &v in triple {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(CorpusError::LabelRangeError { line: line_no, value: v });
            }
            if format == DatasetFormat::Binary && v != 0.0 && v != 1.0 {
                return Err(CorpusError::LabelRangeError { line: line_no, value: v });
            }
        }
        sentence.labels = Some(InvolvementScores {
            lex: triple[0],
            gram: triple[1],
            syn: triple[2],
        });
    }
    Ok(doc)
}

/// Write documents back out in the JSONL dataset schema.
pub fn save_labeled_dataset(docs: &[Document], path: &Path) -> Result<(), CorpusError> {
    let mut file = File::create(path)?;
    for doc in docs {
        let labels: Vec<Vec<f64>> = doc
            .sentences
            .iter()
            .map(|s| {
                s.labels
                    .map(|l| vec![l.lex, l.gram, l.syn])
                    .unwrap_or_default()
            })
            .collect();
        let record = DatasetRecord {
            id: doc.id.clone(),
            text: doc.joined_text(),
            labels,
            source: Some(doc.source),
        };
        let json = serde_json::to_string(&record).expect("dataset record serializes");
        writeln!(file, "{json}")?;
    }
    Ok(())
}

/// Deterministic train/val/test split. Validation and test sizes are
/// floor-based; the remainder goes to train.
pub fn split_dataset(
    docs: &[Document],
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<(Vec<Document>, Vec<Document>, Vec<Document>), CorpusError> {
    let (ft, fv, fe) = fractions;
    if ft < 0.0 || fv < 0.0 || fe < 0.0 || ((ft + fv + fe) - 1.0).abs() > 1e-9 {
        return Err(CorpusError::InvalidFractions(ft, fv, fe));
    }
    let mut indices: Vec<usize> = (0..docs.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);

    let n = docs.len();
    let n_val = (n as f64 * fv).floor() as usize;
    let n_test = (n as f64 * fe).floor() as usize;
    let n_train = n - n_val - n_test;

    let pick = |range: std::ops::Range<usize>| -> Vec<Document> {
        indices[range].iter().map(|&i| docs[i].clone()).collect()
    };
    Ok((
        pick(0..n_train),
        pick(n_train..n_train + n_val),
        pick(n_train + n_val..n),
    ))
}
