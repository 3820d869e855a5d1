//! Detection reports: per-sentence scores mapped onto involvement levels,
//! a document summary, and JSON/HTML renderings.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Document, InvolvementScores};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("score count {scores} does not match sentence count {sentences}")]
    CountMismatch { scores: usize, sentences: usize },
    #[error("level bands must satisfy 0 < floor < low < medium < high < 1, got {0:?}")]
    InvalidBands(LevelBands),
}

/// Cut points for the involvement levels. Scores at or below the floor
/// count as no involvement; the four bands above it get increasing
/// shade intensities in the HTML rendering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LevelBands {
    pub floor: f64,
    pub low: f64,
    pub medium: f64,
    pub high: f64,
}

impl Default for LevelBands {
    fn default() -> Self {
        Self {
            floor: 0.05,
            low: 0.25,
            medium: 0.5,
            high: 0.75,
        }
    }
}

impl LevelBands {
    pub fn validate(&self) -> Result<(), ReportError> {
        let ordered = 0.0 < self.floor
            && self.floor < self.low
            && self.low < self.medium
            && self.medium < self.high
            && self.high < 1.0;
        if ordered {
            Ok(())
        } else {
            Err(ReportError::InvalidBands(*self))
        }
    }

    pub fn classify(&self, mean_score: f64) -> Level {
        if mean_score <= self.floor {
            Level::None
        } else if mean_score <= self.low {
            Level::Low
        } else if mean_score <= self.medium {
            Level::Medium
        } else if mean_score <= self.high {
            Level::High
        } else {
            Level::VeryHigh
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    None,
    Low,
    Medium,
    High,
    VeryHigh,
}

impl Level {
    fn css_class(self) -> &'static str {
        match self {
            Level::None => "level-none",
            Level::Low => "level-low",
            Level::Medium => "level-medium",
            Level::High => "level-high",
            Level::VeryHigh => "level-very-high",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceReport {
    pub index: usize,
    pub text: String,
    pub scores: InvolvementScores,
    pub level: Level,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub mean_scores: InvolvementScores,
    pub fraction_above_floor: f64,
    pub n_sentences: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub document_id: String,
    pub sentences: Vec<SentenceReport>,
    pub summary: ReportSummary,
    pub bands: LevelBands,
}

/// Assemble the report from a segmented document and its score triples.
pub fn build_report(
    doc: &Document,
    scores: &[InvolvementScores],
    bands: LevelBands,
) -> Result<DetectionReport, ReportError> {
    bands.validate()?;
    if scores.len() != doc.sentences.len() {
        return Err(ReportError::CountMismatch {
            scores: scores.len(),
            sentences: doc.sentences.len(),
        });
    }
    let sentences: Vec<SentenceReport> = doc
        .sentences
        .iter()
        .zip(scores)
        .map(|(sentence, s)| SentenceReport {
            index: sentence.index,
            text: sentence.text.clone(),
            scores: *s,
            level: bands.classify(s.mean()),
        })
        .collect();
    let n = sentences.len().max(1) as f64;
    let mean_scores = InvolvementScores::new(
        scores.iter().map(|s| s.lex).sum::<f64>() / n,
        scores.iter().map(|s| s.gram).sum::<f64>() / n,
        scores.iter().map(|s| s.syn).sum::<f64>() / n,
    );
    let above = sentences
        .iter()
        .filter(|s| s.level != Level::None)
        .count();
    Ok(DetectionReport {
        document_id: doc.id.clone(),
        sentences,
        summary: ReportSummary {
            mean_scores,
            fraction_above_floor: above as f64 / n,
            n_sentences: scores.len(),
        },
        bands,
    })
}

impl DetectionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// A standalone page with one highlighted span per sentence and one
    /// background shade per level above the floor.
    pub fn to_html(&self) -> String {
        let mut body = String::new();
        for s in &self.sentences {
            body.push_str(&format!(
                "    <span class=\"sentence {}\" title=\"lex {:.3}, gram {:.3}, syn {:.3}\">{}</span>\n",
                s.level.css_class(),
                s.scores.lex,
                s.scores.gram,
                s.scores.syn,
                escape_html(&s.text)
            ));
        }
        format!(
            "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n\
             <title>Involvement report: {id}</title>\n<style>\n\
             body {{ font-family: serif; max-width: 48rem; margin: 2rem auto; line-height: 1.8; }}\n\
             .sentence {{ padding: 0.1rem 0.15rem; }}\n\
             .level-none {{ background: transparent; }}\n\
             .level-low {{ background: rgba(220, 120, 40, 0.15); }}\n\
             .level-medium {{ background: rgba(220, 120, 40, 0.35); }}\n\
             .level-high {{ background: rgba(220, 120, 40, 0.55); }}\n\
             .level-very-high {{ background: rgba(220, 120, 40, 0.8); }}\n\
             footer {{ margin-top: 2rem; color: #555; font-size: 0.85rem; }}\n\
             </style>\n</head>\n<body>\n  <h1>Involvement report</h1>\n  <p>\n{body}  </p>\n\
             <footer>{n} sentences; mean scores lex {lex:.3}, gram {gram:.3}, syn {syn:.3}; \
             {pct:.1}% above the {floor:.0}% involvement floor.</footer>\n</body>\n</html>\n",
            id = escape_html(&self.document_id),
            body = body,
            n = self.summary.n_sentences,
            lex = self.summary.mean_scores.lex,
            gram = self.summary.mean_scores.gram,
            syn = self.summary.mean_scores.syn,
            pct = 100.0 * self.summary.fraction_above_floor,
            floor = 100.0 * self.bands.floor,
        )
    }
}

fn escape_html(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
