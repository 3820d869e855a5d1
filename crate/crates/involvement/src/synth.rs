//! Seeded synthetic corpora for tests and demos.
//!
//! Sentences come in two registers: an informal human one (short common
//! words, contractions, first person) and a formal machine one (latinate
//! vocabulary, stock connectives, uniform clause structure). The two are
//! far apart in readability and authorstyle space, so a detector trained
//! on this corpus has real signal to learn from while everything stays
//! deterministic under a fixed seed.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Document, InvolvementScores, Sentence, Source};

#[derive(Debug, Clone, Copy)]
pub struct SynthConfig {
    pub n_documents: usize,
    pub sentences_per_doc: usize,
    /// Probability that a generated sentence uses the machine register.
    pub llm_fraction: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_documents: 64,
            sentences_per_doc: 4,
            llm_fraction: 0.5,
            seed: 0,
        }
    }
}

const HUMAN_OPENERS: &[&str] = &["Honestly, ", "Look, ", "To be fair, ", "Yeah, ", ""];
const HUMAN_SUBJECTS: &[&str] = &[
    "the dog", "my friend", "the game", "our trip", "the food", "her bike", "the rain",
    "that song", "the kid next door", "my old car",
];
const HUMAN_COMMENTS: &[&str] = &[
    "was fun", "got old fast", "made me laugh", "was a mess", "felt right", "went fine",
    "took too long", "was no big deal", "kind of blew up", "didn't last",
];
const HUMAN_TAILS: &[&str] = &[
    " and I'm glad it did", " but who's counting", " so we let it go", " which was fine by me", "",
];

const LLM_OPENERS: &[&str] = &[
    "Furthermore, ", "Moreover, ", "Consequently, ", "Additionally, ", "In conclusion, ",
];
const LLM_ADJECTIVES: &[&str] = &[
    "comprehensive", "systematic", "multifaceted", "significant", "considerable", "fundamental",
];
const LLM_NOUNS: &[&str] = &[
    "analysis", "methodology", "implementation", "framework", "evaluation", "configuration",
];
const LLM_ABSTRACTS: &[&str] = &[
    "optimization", "standardization", "consistency", "interconnectedness", "generalization",
    "robustness",
];

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str]) -> &'a str {
    pool[rng.gen_range(0..pool.len())]
}

fn capitalize(text: &str) -> String {
    let mut chars = text.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

/// An informal sentence; labeled as no involvement on all dimensions.
pub fn human_sentence(rng: &mut ChaCha8Rng) -> String {
    let opener = pick(rng, HUMAN_OPENERS);
    let subject = pick(rng, HUMAN_SUBJECTS);
    let comment = pick(rng, HUMAN_COMMENTS);
    let tail = pick(rng, HUMAN_TAILS);
    capitalize(&format!("{opener}{subject} {comment}{tail}."))
}

/// A formal machine-register sentence; labeled as full involvement.
pub fn llm_sentence(rng: &mut ChaCha8Rng) -> String {
    let opener = pick(rng, LLM_OPENERS);
    let adj1 = pick(rng, LLM_ADJECTIVES);
    let noun1 = pick(rng, LLM_NOUNS);
    let adj2 = pick(rng, LLM_ADJECTIVES);
    let abstract1 = pick(rng, LLM_ABSTRACTS);
    let noun2 = pick(rng, LLM_NOUNS);
    capitalize(&format!(
        "{opener}the {adj1} {noun1} demonstrates a {adj2} degree of {abstract1} \
         across the underlying {noun2}."
    ))
}

/// Generate labeled mixed-source documents. Every sentence carries binary
/// labels: all zeros for the human register, all ones for the machine one.
pub fn generate_corpus(config: &SynthConfig) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    (0..config.n_documents)
        .map(|d| {
            let sentences = (0..config.sentences_per_doc)
                .map(|index| {
                    let machine = rng.gen_bool(config.llm_fraction.clamp(0.0, 1.0));
                    let (text, label) = if machine {
                        (llm_sentence(&mut rng), 1.0)
                    } else {
                        (human_sentence(&mut rng), 0.0)
                    };
                    Sentence {
                        text,
                        index,
                        labels: Some(InvolvementScores::new(label, label, label)),
                    }
                })
                .collect();
            Document {
                id: format!("synth-{d:04}"),
                sentences,
                source: Source::Mixed,
            }
        })
        .collect()
}

/// A raw paragraph alternating human and machine sentences, for feeding
/// the CLI end to end.
pub fn mixed_paragraph(n_human: usize, n_llm: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parts = Vec::with_capacity(n_human + n_llm);
    let (mut humans, mut llms) = (n_human, n_llm);
    while humans > 0 || llms > 0 {
        if humans >= llms && humans > 0 {
            parts.push(human_sentence(&mut rng));
            humans -= 1;
        } else if llms > 0 {
            parts.push(llm_sentence(&mut rng));
            llms -= 1;
        }
    }
    parts.join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lowlevel;

    #[test]
    fn corpus_is_deterministic_for_a_seed() {
        let config = SynthConfig {
            n_documents: 8,
            ..Default::default()
        };
        assert_eq!(generate_corpus(&config), generate_corpus(&config));
        let other = SynthConfig {
            seed: 1,
            ..config
        };
        assert_ne!(generate_corpus(&config), generate_corpus(&other));
    }

    #[test]
    fn shapes_and_labels_are_binary() {
        let config = SynthConfig {
            n_documents: 16,
            sentences_per_doc: 5,
            llm_fraction: 0.5,
            seed: 7,
        };
        let docs = generate_corpus(&config);
        assert_eq!(docs.len(), 16);
        for doc in &docs {
            assert_eq!(doc.sentences.len(), 5);
            for s in &doc.sentences {
                let labels = s.labels.unwrap();
                assert!(labels.lex == 0.0 || labels.lex == 1.0);
                assert_eq!(labels.lex, labels.gram);
                assert_eq!(labels.lex, labels.syn);
            }
        }
    }

    #[test]
    fn registers_are_separable_in_feature_space() {
        // Mean word length (one of the authorstyle slots) should split the
        // two registers cleanly: the machine pool is heavily latinate.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let avg_len = |text: &str| {
            let words: Vec<&str> = text.split_whitespace().collect();
            words.iter().map(|w| w.len()).sum::<usize>() as f64 / words.len() as f64
        };
        for _ in 0..50 {
            let human = avg_len(&human_sentence(&mut rng));
            let machine = avg_len(&llm_sentence(&mut rng));
            assert!(
                machine > human + 1.0,
                "expected register gap, got machine {machine:.2} vs human {human:.2}"
            );
        }
    }

    #[test]
    fn lowlevel_features_differ_between_registers() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let feature_of = |text: String| {
            let sentence = Sentence {
                text,
                index: 0,
                labels: None,
            };
            lowlevel::extract(&sentence).values
        };
        let human = feature_of(human_sentence(&mut rng));
        let machine = feature_of(llm_sentence(&mut rng));
        let distance: f64 = human
            .iter()
            .zip(&machine)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(distance > 1.0, "feature distance too small: {distance}");
    }

    #[test]
    fn mixed_paragraph_has_requested_sentence_count() {
        let text = mixed_paragraph(6, 6, 0);
        let periods = text.matches('.').count();
        assert_eq!(periods, 12);
        assert_eq!(mixed_paragraph(6, 6, 0), mixed_paragraph(6, 6, 0));
    }
}
