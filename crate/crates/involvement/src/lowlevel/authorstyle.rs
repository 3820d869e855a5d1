//! Authorstyle feature groups over one annotated sentence, vectorized into
//! a fixed-width layout (distributions use fixed bins, POS trigrams use
//! hashed top-K buckets) so the fusion stage sees a constant width.

use std::collections::HashMap;

use super::annotate::{PosTag, TokenAnnotation};
use super::lexicons;
use super::FeatureError;

pub const POS_TRIGRAM_BUCKETS: usize = 32;
pub const WORD_LENGTH_BINS: usize = 15;
pub const SENTENCE_LENGTH_BINS: usize = 10;
/// Width in words of each sentence-length bin.
pub const SENTENCE_LENGTH_BIN_WIDTH: usize = 5;

const TAG_NAMES: [&str; 12] = [
    "noun", "verb", "adj", "adv", "pron", "det", "adp", "conj", "num", "prt", "punct", "x",
];

/// Ordered slot names for the authorstyle block.
pub fn authorstyle_layout() -> Vec<String> {
    let mut slots = Vec::new();
    slots.push("authorstyle.avg_word_length".to_string());
    for tag in TAG_NAMES {
        slots.push(format!("authorstyle.pos_freq.{tag}"));
    }
    for b in 0..POS_TRIGRAM_BUCKETS {
        slots.push(format!("authorstyle.pos_trigram.{b:02}"));
    }
    for b in 0..WORD_LENGTH_BINS {
        slots.push(format!("authorstyle.word_length_dist.{b:02}"));
    }
    slots.push("authorstyle.avg_sentence_length_words".to_string());
    slots.push("authorstyle.avg_sentence_length_chars".to_string());
    slots.push("authorstyle.avg_syllables_per_word".to_string());
    for b in 0..SENTENCE_LENGTH_BINS {
        slots.push(format!("authorstyle.sentence_length_dist.{b:02}"));
    }
    slots.extend(
        [
            "authorstyle.yule_k",
            "authorstyle.sichel_s",
            "authorstyle.avg_word_freq_class",
            "authorstyle.punctuation_freq",
            "authorstyle.special_char_freq",
            "authorstyle.uppercase_freq",
            "authorstyle.number_freq",
            "authorstyle.function_word_freq",
            "authorstyle.most_common_content_word_freq",
            "authorstyle.stopword_ratio",
            "authorstyle.top_word_bigram_freq",
            "authorstyle.top_char_bigram_freq",
            "authorstyle.top_3gram_freq",
        ]
        .map(String::from),
    );
    slots
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Yule's K over a word-frequency spectrum: `10^4 (sum i^2 V_i - N) / N^2`.
pub fn yule_k(counts: &HashMap<String, usize>) -> f64 {
    let n: usize = counts.values().sum();
    if n == 0 {
        return 0.0;
    }
    let mut spectrum: HashMap<usize, usize> = HashMap::new();
    for &c in counts.values() {
        *spectrum.entry(c).or_default() += 1;
    }
    let sum_i2_vi: f64 = spectrum
        .iter()
        .map(|(&i, &vi)| (i * i * vi) as f64)
        .sum();
    1e4 * (sum_i2_vi - n as f64) / (n as f64 * n as f64)
}

/// Sichel's S: fraction of vocabulary occurring exactly twice.
pub fn sichel_s(counts: &HashMap<String, usize>) -> f64 {
    let vocab = counts.len();
    if vocab == 0 {
        return 0.0;
    }
    let v2 = counts.values().filter(|&&c| c == 2).count();
    v2 as f64 / vocab as f64
}

/// All authorstyle features, aligned with [`authorstyle_layout`].
pub fn authorstyle_features(ann: &TokenAnnotation) -> Result<Vec<f64>, FeatureError> {
    if ann.tokens.is_empty() || ann.is_degenerate() {
        return Err(FeatureError::DegenerateInput);
    }
    let words: Vec<_> = ann.word_tokens().collect();
    let w = words.len() as f64;
    let total_tokens = ann.tokens.len() as f64;

    let mut out = Vec::with_capacity(authorstyle_layout().len());

    // Average word length in characters.
    let total_word_chars: usize = words.iter().map(|t| t.surface.chars().count()).sum();
    out.push(total_word_chars as f64 / w);

    // POS tag frequency over all tokens.
    let mut pos_counts = [0usize; 12];
    for t in &ann.tokens {
        pos_counts[t.pos.index()] += 1;
    }
    out.extend(pos_counts.iter().map(|&c| c as f64 / total_tokens));

    // POS trigram frequency, hashed into fixed buckets.
    let mut trigram = vec![0usize; POS_TRIGRAM_BUCKETS];
    let tags: Vec<PosTag> = ann.tokens.iter().map(|t| t.pos).collect();
    let n_trigrams = tags.len().saturating_sub(2);
    for win in tags.windows(3) {
        let key = [win[0].index() as u8, win[1].index() as u8, win[2].index() as u8];
        trigram[(fnv1a(&key) % POS_TRIGRAM_BUCKETS as u64) as usize] += 1;
    }
    let denom = n_trigrams.max(1) as f64;
    out.extend(trigram.iter().map(|&c| c as f64 / denom));

    // Word length distribution, bins 1..14 and 15+.
    let mut wl_bins = vec![0usize; WORD_LENGTH_BINS];
    for t in &words {
        let len = t.surface.chars().count().max(1);
        wl_bins[(len - 1).min(WORD_LENGTH_BINS - 1)] += 1;
    }
    out.extend(wl_bins.iter().map(|&c| c as f64 / w));

    // Single-sentence length statistics.
    out.push(w);
    out.push(ann.text.chars().count() as f64);
    let total_syllables: usize = words.iter().map(|t| t.syllables).sum();
    out.push(total_syllables as f64 / w);

    // Degenerate one-sentence length histogram.
    let mut sl_bins = vec![0.0; SENTENCE_LENGTH_BINS];
    let bin = ((words.len().max(1) - 1) / SENTENCE_LENGTH_BIN_WIDTH).min(SENTENCE_LENGTH_BINS - 1);
    sl_bins[bin] = 1.0;
    out.extend(sl_bins);

    // Lexical diversity over lowercased words.
    let mut word_counts: HashMap<String, usize> = HashMap::new();
    for t in &words {
        *word_counts.entry(t.surface.to_lowercase()).or_default() += 1;
    }
    out.push(yule_k(&word_counts));
    out.push(sichel_s(&word_counts));

    let avg_freq_class: f64 = words
        .iter()
        .map(|t| lexicons::frequency_class(&t.surface.to_lowercase()))
        .sum::<f64>()
        / w;
    out.push(avg_freq_class);

    // Character-class frequencies over the raw sentence text.
    let chars: Vec<char> = ann.text.chars().collect();
    let n_chars = chars.len().max(1) as f64;
    let punct = chars.iter().filter(|c| c.is_ascii_punctuation()).count();
    let special = chars
        .iter()
        .filter(|c| !c.is_alphanumeric() && !c.is_whitespace() && !c.is_ascii_punctuation())
        .count();
    let upper = chars.iter().filter(|c| c.is_uppercase()).count();
    let digits = chars.iter().filter(|c| c.is_numeric()).count();
    out.push(punct as f64 / n_chars);
    out.push(special as f64 / n_chars);
    out.push(upper as f64 / n_chars);
    out.push(digits as f64 / n_chars);

    let function_words = words.iter().filter(|t| t.is_function_word).count();
    out.push(function_words as f64 / w);

    // Most frequent content (non-stopword) word.
    let top_content = words
        .iter()
        .filter(|t| !t.is_stopword)
        .fold(HashMap::<String, usize>::new(), |mut acc, t| {
            *acc.entry(t.surface.to_lowercase()).or_default() += 1;
            acc
        })
        .values()
        .copied()
        .max()
        .unwrap_or(0);
    out.push(top_content as f64 / w);

    let stopwords = words.iter().filter(|t| t.is_stopword).count();
    out.push(stopwords as f64 / w);

    // Top word bigram / char bigram / word trigram frequencies.
    let lowered: Vec<String> = words.iter().map(|t| t.surface.to_lowercase()).collect();
    out.push(top_ngram_freq(&lowered, 2));
    let condensed: Vec<char> = ann
        .text
        .to_lowercase()
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect();
    let char_pairs: Vec<String> = condensed
        .windows(2)
        .map(|p| p.iter().collect::<String>())
        .collect();
    out.push(top_count_freq(&char_pairs));
    out.push(top_ngram_freq(&lowered, 3));

    debug_assert_eq!(out.len(), authorstyle_layout().len());
    Ok(out)
}

fn top_ngram_freq(words: &[String], n: usize) -> f64 {
    if words.len() < n {
        return 0.0;
    }
    let grams: Vec<String> = words.windows(n).map(|w| w.join(" ")).collect();
    top_count_freq(&grams)
}

fn top_count_freq(items: &[String]) -> f64 {
    if items.is_empty() {
        return 0.0;
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for item in items {
        *counts.entry(item.as_str()).or_default() += 1;
    }
    *counts.values().max().unwrap() as f64 / items.len() as f64
}
