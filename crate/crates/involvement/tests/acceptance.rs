//! Acceptance gate: ten end-to-end criteria, each printing one PASS line.
//!
//! Oracles are computed independently inside this file wherever a value
//! could silently drift: readability and authorstyle formulas are re-derived
//! from scratch-tokenized counts, loss fixtures are hand-expanded term by
//! term, and gradients are checked against central finite differences.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use involvement::config::TrainConfig;
use involvement::contrastive::twice_triplet_loss;
use involvement::corpus::{self, Document, SegmentMode, Sentence};
use involvement::deep::CrossAttender;
use involvement::embedding::LocalHashProvider;
use involvement::eval;
use involvement::fusion::{self, Detector, PreparedDocument};
use involvement::llm::LlmEngine;
use involvement::lowlevel::{self, annotate::count_syllables, lexicons, NormStats};
use involvement::report::{DetectionReport, Level};
use involvement::synth::{self, SynthConfig};
use involvement::tensor::{Binding, Tape, Tensor};

fn pass(n: u32, name: &str) {
    println!("criterion {n:2} [{name}]: PASS");
}

fn sentence(text: &str) -> Sentence {
    Sentence {
        text: text.to_string(),
        index: 0,
        labels: None,
    }
}

// --------------------------------------------------------------------------
// Criterion 1: formula oracles on a golden corpus.
// --------------------------------------------------------------------------

const GOLDEN: [&str; 10] = [
    "The cat sat on the mat.",
    "Our comprehensive methodology demonstrates considerable improvements.",
    "I didn't think it would rain today, but it did.",
    "Numbers like 42 and 7 appear in this sentence.",
    "Extraordinarily sophisticated vocabulary challenges inexperienced readers.",
    "Short words can be easy to read aloud.",
    "She sells seashells by the seashore every summer morning.",
    "The implementation requires careful consideration of boundary conditions.",
    "Look, that game kind of blew up, so we let it go!",
    "Repeated repeated words words appear appear twice in here.",
];

/// Independent tokenization: whitespace split with non-alphanumeric edges
/// trimmed off, mirroring how a person would count words by hand.
fn golden_words(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|chunk| {
            let trimmed = chunk.trim_matches(|c: char| !c.is_alphanumeric());
            (!trimmed.is_empty()).then(|| trimmed.to_string())
        })
        .collect()
}

struct GoldenCounts {
    w: f64,
    y: f64,
    l: f64,
    p3: f64,
    p5: f64,
    dw: f64,
    nd: f64,
}

fn golden_counts(words: &[String]) -> GoldenCounts {
    let easy = lexicons::easy_word_set();
    let mut c = GoldenCounts { w: 0.0, y: 0.0, l: 0.0, p3: 0.0, p5: 0.0, dw: 0.0, nd: 0.0 };
    for word in words {
        let lower = word.to_lowercase();
        let syl = count_syllables(&lower);
        c.w += 1.0;
        c.y += syl as f64;
        c.l += word.chars().filter(|ch| ch.is_alphabetic()).count() as f64;
        if syl >= 3 {
            c.p3 += 1.0;
        }
        if syl >= 5 {
            c.p5 += 1.0;
        }
        if !easy.contains(lower.as_str()) {
            c.nd += 1.0;
            if syl >= 2 {
                c.dw += 1.0;
            }
        }
    }
    c
}

/// The 15 indices written out by hand from their published formulas, with
/// the sentence count fixed at one.
fn golden_readability(c: &GoldenCounts) -> [f64; 15] {
    let GoldenCounts { w, y, l, p3, p5, dw, nd } = *c;
    let pct_nd = 100.0 * nd / w;
    let dale = 0.1579 * pct_nd + 0.0496 * w + if pct_nd > 5.0 { 3.6365 } else { 0.0 };
    let points = (w - p3) + 3.0 * p3;
    let linsear = if points > 20.0 { points / 2.0 } else { (points - 2.0) / 2.0 };
    [
        206.835 - 1.015 * w - 84.6 * (y / w),
        0.39 * w + 11.8 * (y / w) - 15.59,
        1.0430 * (p3 * 30.0).sqrt() + 3.1291,
        0.0588 * (100.0 * l / w) - 0.296 * (100.0 / w) - 15.8,
        4.71 * (l / w) + 0.5 * w - 21.43,
        dale,
        dw,
        linsear,
        0.4 * (w + 100.0 * p3 / w),
        206.84 - 60.0 * (y / w) - 1.02 * w,
        206.835 - 62.3 * (y / w) - w,
        95.2 - 9.7 * (l / w) - 0.35 * w,
        -0.205 * (100.0 / w) + 0.049 * (100.0 * y / w) - 3.407,
        89.0 + (300.0 - 10.0 * l) / w,
        200.791 - 1.015 * w - 24.181 * ((p5 + y) / w),
    ]
}

fn slot_value(values: &[f64], name: &str) -> f64 {
    let layout = lowlevel::layout();
    let idx = layout
        .iter()
        .position(|s| s == name)
        .unwrap_or_else(|| panic!("missing slot {name}"));
    values[idx]
}

fn top_freq(items: &[String]) -> f64 {
    if items.is_empty() {
        return 0.0;
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for item in items {
        *counts.entry(item.as_str()).or_default() += 1;
    }
    *counts.values().max().unwrap() as f64 / items.len() as f64
}

#[test]
fn criterion_01_feature_formula_oracles() {
    let start = Instant::now();
    for text in GOLDEN {
        let extracted = lowlevel::extract(&sentence(text)).values;
        let words = golden_words(text);
        let counts = golden_counts(&words);
        let expected = golden_readability(&counts);
        for (i, (&got, &want)) in extracted[..15].iter().zip(&expected).enumerate() {
            assert!(
                (got - want).abs() <= 1e-9,
                "{text:?}: readability slot {i} got {got} want {want}"
            );
        }

        // Scalar authorstyle oracles, recomputed from the same hand counts.
        let w = counts.w;
        let lowered: Vec<String> = words.iter().map(|s| s.to_lowercase()).collect();
        let word_chars: f64 = words.iter().map(|t| t.chars().count() as f64).sum();
        let check = |name: &str, want: f64| {
            let got = slot_value(&extracted, name);
            assert!((got - want).abs() <= 1e-9, "{text:?}: {name} got {got} want {want}");
        };
        check("authorstyle.avg_word_length", word_chars / w);
        check("authorstyle.avg_sentence_length_words", w);
        check(
            "authorstyle.avg_sentence_length_chars",
            text.chars().count() as f64,
        );
        check("authorstyle.avg_syllables_per_word", counts.y / w);

        let mut word_counts: HashMap<String, usize> = HashMap::new();
        for word in &lowered {
            *word_counts.entry(word.clone()).or_default() += 1;
        }
        let n: f64 = word_counts.values().sum::<usize>() as f64;
        let mut spectrum: HashMap<usize, usize> = HashMap::new();
        for &c in word_counts.values() {
            *spectrum.entry(c).or_default() += 1;
        }
        let sum_i2: f64 = spectrum.iter().map(|(&i, &v)| (i * i * v) as f64).sum();
        check("authorstyle.yule_k", 1e4 * (sum_i2 - n) / (n * n));
        let v2 = word_counts.values().filter(|&&c| c == 2).count() as f64;
        check("authorstyle.sichel_s", v2 / word_counts.len() as f64);
        let freq_class: f64 =
            lowered.iter().map(|word| lexicons::frequency_class(word)).sum::<f64>() / w;
        check("authorstyle.avg_word_freq_class", freq_class);

        let chars: Vec<char> = text.chars().collect();
        let n_chars = chars.len() as f64;
        let count_of = |pred: fn(&char) -> bool| chars.iter().filter(|c| pred(c)).count() as f64;
        check(
            "authorstyle.punctuation_freq",
            count_of(|c| c.is_ascii_punctuation()) / n_chars,
        );
        check(
            "authorstyle.special_char_freq",
            count_of(|c| !c.is_alphanumeric() && !c.is_whitespace() && !c.is_ascii_punctuation())
                / n_chars,
        );
        check("authorstyle.uppercase_freq", count_of(|c| c.is_uppercase()) / n_chars);
        check("authorstyle.number_freq", count_of(|c| c.is_numeric()) / n_chars);

        let function_words = lowered
            .iter()
            .filter(|word| lexicons::function_word_set().contains(word.as_str()))
            .count() as f64;
        check("authorstyle.function_word_freq", function_words / w);
        let stopwords = lowered
            .iter()
            .filter(|word| lexicons::stopword_set().contains(word.as_str()))
            .count() as f64;
        check("authorstyle.stopword_ratio", stopwords / w);
        let content: Vec<String> = lowered
            .iter()
            .filter(|word| !lexicons::stopword_set().contains(word.as_str()))
            .cloned()
            .collect();
        let top_content = if content.is_empty() {
            0.0
        } else {
            top_freq(&content) * content.len() as f64 / w
        };
        check("authorstyle.most_common_content_word_freq", top_content);

        let bigrams: Vec<String> = lowered.windows(2).map(|p| p.join(" ")).collect();
        check("authorstyle.top_word_bigram_freq", top_freq(&bigrams));
        let trigrams: Vec<String> = lowered.windows(3).map(|p| p.join(" ")).collect();
        check("authorstyle.top_3gram_freq", top_freq(&trigrams));
        let condensed: Vec<char> = text
            .to_lowercase()
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect();
        let char_pairs: Vec<String> =
            condensed.windows(2).map(|p| p.iter().collect()).collect();
        check("authorstyle.top_char_bigram_freq", top_freq(&char_pairs));
    }
    assert!(start.elapsed().as_secs_f64() < 1.0, "criterion 1 exceeded 1s");
    pass(1, "readability and authorstyle formula oracles");
}

// --------------------------------------------------------------------------
// Criterion 2: twice-triplet loss identities.
// --------------------------------------------------------------------------

/// Hand-expand the six hinge terms and count the active ones.
fn hinge_terms(d_pos: [f64; 2], d_neg: [f64; 3], alpha: f64) -> (f64, usize) {
    let mut total = 0.0;
    let mut active = 0;
    for dp in d_pos {
        for dn in d_neg {
            let term = (dp - dn + alpha).max(0.0);
            if term > 0.0 {
                active += 1;
            }
            total += term;
        }
    }
    (total, active)
}

#[test]
fn criterion_02_loss_fixtures() {
    // Margin satisfied: every hinge closes.
    let loss = twice_triplet_loss(&[0.1, 0.1], &[0.5, 0.5, 0.5], 0.3).unwrap();
    assert_eq!(loss, 0.0);
    assert_eq!(hinge_terms([0.1, 0.1], [0.5, 0.5, 0.5], 0.3), (0.0, 0));

    // All six hinges open at 0.5 each.
    let loss = twice_triplet_loss(&[0.4, 0.4], &[0.2, 0.2, 0.2], 0.3).unwrap();
    assert!((loss - 3.0).abs() < 1e-12);
    let (oracle, active) = hinge_terms([0.4, 0.4], [0.2, 0.2, 0.2], 0.3);
    assert!((oracle - 3.0).abs() < 1e-12);
    assert_eq!(active, 6);

    // Mixed fixture, expanded term by term:
    //   0.4-0.2+0.3=0.5, 0.4-0.6+0.3=0.1, 0.4-0.6+0.3=0.1,
    //   0.1-0.2+0.3=0.2, 0.1-0.6+0.3=-0.2->0, 0.1-0.6+0.3=-0.2->0
    // so four active hinges summing to 0.9.
    let loss = twice_triplet_loss(&[0.4, 0.1], &[0.2, 0.6, 0.6], 0.3).unwrap();
    assert!((loss - 0.9).abs() < 1e-12);
    let (oracle, active) = hinge_terms([0.4, 0.1], [0.2, 0.6, 0.6], 0.3);
    assert!((loss - oracle).abs() < 1e-12);
    assert_eq!(active, 4);
    pass(2, "twice-triplet loss identities with hinge counting");
}

// --------------------------------------------------------------------------
// Shared offline pipeline helpers.
// --------------------------------------------------------------------------

fn prepare_corpus(docs: &[Document], config: &TrainConfig) -> (Vec<PreparedDocument>, NormStats) {
    let provider = LocalHashProvider::new(config.d_model, config.seed);
    let engine = LlmEngine::offline();
    let vectors: Vec<_> = docs
        .iter()
        .flat_map(|d| d.sentences.iter())
        .map(lowlevel::extract)
        .collect();
    let stats = NormStats::fit(&vectors);
    let prepared = docs
        .iter()
        .map(|d| fusion::prepare_document(d, &provider, &engine, &stats).unwrap())
        .collect();
    (prepared, stats)
}

// --------------------------------------------------------------------------
// Criterion 3: full-model gradient integrity.
// --------------------------------------------------------------------------

#[test]
fn criterion_03_full_model_gradients() {
    let start = Instant::now();
    let config = TrainConfig {
        d_model: 16,
        d_proj: 8,
        heads: 2,
        hidden_main: 8,
        hidden_eval: 6,
        seed: 5,
        ..Default::default()
    };
    let docs = synth::generate_corpus(&SynthConfig {
        n_documents: 2,
        sentences_per_doc: 3,
        llm_fraction: 0.5,
        seed: 5,
    });
    let (prepared, stats) = prepare_corpus(&docs, &config);
    let mut detector = Detector::init(&config, stats).unwrap();
    let batch: Vec<&PreparedDocument> = prepared.iter().collect();

    let loss_value = |detector: &Detector| -> f64 {
        let mut tape = Tape::new();
        let mut binding = Binding::new();
        let loss = detector.batch_loss(&mut tape, &mut binding, &batch).unwrap();
        tape.value(loss).item().unwrap()
    };

    let mut tape = Tape::new();
    let mut binding = Binding::new();
    let loss = detector.batch_loss(&mut tape, &mut binding, &batch).unwrap();
    let grads = tape.backward(loss).unwrap();
    detector.store.zero_grad();
    binding.harvest(&grads, &mut detector.store).unwrap();

    let paths: Vec<String> = detector.store.paths().map(|s| s.to_string()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let h = 1e-5;
    let mut checked = 0;
    while checked < 20 {
        let path = &paths[rng.gen_range(0..paths.len())];
        let len = detector.store.value(path).unwrap().len();
        let idx = rng.gen_range(0..len);
        let analytic = detector
            .store
            .get(path)
            .unwrap()
            .grad
            .as_ref()
            .map(|g| g.data[idx])
            .unwrap_or(0.0);
        let original = detector.store.value(path).unwrap().data[idx];
        detector.store.get_mut(path).unwrap().value.data[idx] = original + h;
        let up = loss_value(&detector);
        detector.store.get_mut(path).unwrap().value.data[idx] = original - h;
        let down = loss_value(&detector);
        detector.store.get_mut(path).unwrap().value.data[idx] = original;
        let numeric = (up - down) / (2.0 * h);
        checked += 1;
        if numeric.abs() < 1e-6 && analytic.abs() < 1e-6 {
            continue;
        }
        let denom = numeric.abs().max(analytic.abs());
        assert!(
            ((numeric - analytic) / denom).abs() <= 1e-4,
            "{path}[{idx}]: numeric {numeric} analytic {analytic}"
        );
    }
    assert!(start.elapsed().as_secs_f64() < 30.0, "criterion 3 exceeded 30s");
    pass(3, "full-model gradients vs central finite differences");
}

// --------------------------------------------------------------------------
// Criterion 4: attention invariants.
// --------------------------------------------------------------------------

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Tensor {
    Tensor::from_vec(
        rows,
        cols,
        (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    )
}

#[test]
fn criterion_04_attention_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let d = 8;
    let attender = CrossAttender::new(d);
    for trial in 0..50 {
        let n_keys = rng.gen_range(1..7);
        let query = random_matrix(&mut rng, 1, d);
        let kv = random_matrix(&mut rng, n_keys, d);

        // Rows of the attention matrix are a probability distribution.
        let weights = attender.weights(&query, &kv).unwrap();
        let row_sum: f64 = weights.data.iter().sum();
        assert!((row_sum - 1.0).abs() <= 1e-9, "trial {trial}: row sum {row_sum}");
        assert!(weights.data.iter().all(|&w| w >= 0.0));

        // Permuting the key/value rows leaves the pooled output unchanged.
        let base = attender.attend(&query, &kv).unwrap();
        let mut order: Vec<usize> = (0..n_keys).collect();
        order.shuffle(&mut rng);
        let permuted_rows: Vec<f64> = order
            .iter()
            .flat_map(|&i| kv.data[i * d..(i + 1) * d].to_vec())
            .collect();
        let permuted = Tensor::from_vec(n_keys, d, permuted_rows);
        let shuffled = attender.attend(&query, &permuted).unwrap();
        for (a, b) in base.data.iter().zip(&shuffled.data) {
            assert!((a - b).abs() <= 1e-12, "trial {trial}: permutation changed output");
        }
    }

    // A single key receives all the attention mass, exactly.
    let query = random_matrix(&mut rng, 1, d);
    let kv = random_matrix(&mut rng, 1, d);
    let out = attender.attend(&query, &kv).unwrap();
    assert_eq!(out.data, kv.data);
    pass(4, "attention row sums, permutation invariance, single key");
}

// --------------------------------------------------------------------------
// Criterion 5: overfit oracle on 32 samples.
// --------------------------------------------------------------------------

fn overfit_config() -> TrainConfig {
    TrainConfig {
        d_model: 32,
        d_proj: 16,
        heads: 4,
        hidden_main: 32,
        hidden_eval: 16,
        lr: 1e-2,
        epochs: 500,
        batch_train: 512,
        step_size: 200,
        gamma: 0.5,
        seed: 42,
        ..Default::default()
    }
}

#[test]
fn criterion_05_overfit_oracle() {
    let start = Instant::now();
    let config = overfit_config();
    let docs = synth::generate_corpus(&SynthConfig {
        n_documents: 32,
        sentences_per_doc: 4,
        llm_fraction: 0.5,
        seed: 42,
    });
    // 128 sentences fit in one 512-sentence batch, so 500 epochs make
    // exactly 500 optimizer steps.
    let (prepared, stats) = prepare_corpus(&docs, &config);
    let mut detector = Detector::init(&config, stats).unwrap();
    fusion::train(&mut detector, &prepared, &[]).unwrap();
    let (mae, accuracy) = fusion::quick_metrics(&detector, &prepared, 0.5).unwrap();
    assert!(mae < 0.05, "train MAE {mae} not under 0.05");
    assert_eq!(accuracy, 1.0, "train accuracy {accuracy} not perfect");
    assert!(start.elapsed().as_secs_f64() < 120.0, "criterion 5 exceeded 2min");
    pass(5, "500-step overfit reaches MAE < 0.05 and accuracy 1.0");
}

// --------------------------------------------------------------------------
// Criteria 6 and 9: desk-scale learning signal and ablation harness.
// --------------------------------------------------------------------------

fn desk_config() -> TrainConfig {
    TrainConfig {
        d_model: 32,
        d_proj: 16,
        heads: 4,
        hidden_main: 32,
        hidden_eval: 16,
        lr: 1e-2,
        epochs: 8,
        step_size: 4,
        gamma: 0.5,
        seed: 6,
        ..Default::default()
    }
}

fn desk_corpus() -> (Vec<Document>, Vec<Document>) {
    let docs = synth::generate_corpus(&SynthConfig {
        n_documents: 512,
        sentences_per_doc: 3,
        llm_fraction: 0.5,
        seed: 6,
    });
    let held_out = docs[448..].to_vec();
    let train = docs[..448].to_vec();
    assert_eq!(held_out.len(), 64);
    (train, held_out)
}

fn heldout_mae(detector: &Detector, prepared: &[PreparedDocument]) -> (f64, f64) {
    fusion::quick_metrics(detector, prepared, 0.5).unwrap()
}

#[test]
fn criterion_06_desk_scale_learning() {
    let start = Instant::now();
    let config = desk_config();
    let (train_docs, held_out) = desk_corpus();
    let (prepared_train, stats) = prepare_corpus(&train_docs, &config);
    let provider = LocalHashProvider::new(config.d_model, config.seed);
    let engine = LlmEngine::offline();
    let prepared_held: Vec<PreparedDocument> = held_out
        .iter()
        .map(|d| fusion::prepare_document(d, &provider, &engine, &stats).unwrap())
        .collect();

    let mut detector = Detector::init(&config, stats).unwrap();
    fusion::train(&mut detector, &prepared_train, &prepared_held).unwrap();
    let (model_mae, _) = heldout_mae(&detector, &prepared_held);

    // Constant-0.5 baseline on binary labels has MAE exactly 0.5.
    let baseline_mae = 0.5;
    let improvement = (baseline_mae - model_mae) / baseline_mae;
    assert!(
        improvement >= 0.30,
        "held-out MAE {model_mae:.4} improves on 0.5 by only {:.1}%",
        100.0 * improvement
    );
    assert!(start.elapsed().as_secs_f64() < 600.0, "criterion 6 exceeded 10min");
    pass(6, "held-out MAE beats constant-0.5 by at least 30%");
}

#[test]
fn criterion_09_ablation_harness() {
    let (train_docs, held_out) = desk_corpus();
    let mut table = vec![("variant".to_string(), "held_out_mae".to_string(), "held_out_accuracy".to_string())];
    for (label, low, high, deep) in [
        ("full", true, true, true),
        ("no_low", false, true, true),
        ("no_high", true, false, true),
        ("no_deep", true, true, false),
    ] {
        let config = TrainConfig {
            use_low: low,
            use_high: high,
            use_deep: deep,
            epochs: 2,
            ..desk_config()
        };
        let (prepared_train, stats) = prepare_corpus(&train_docs, &config);
        let provider = LocalHashProvider::new(config.d_model, config.seed);
        let engine = LlmEngine::offline();
        let prepared_held: Vec<PreparedDocument> = held_out
            .iter()
            .map(|d| fusion::prepare_document(d, &provider, &engine, &stats).unwrap())
            .collect();
        let mut detector = Detector::init(&config, stats).unwrap();
        fusion::train(&mut detector, &prepared_train, &prepared_held).unwrap();
        let (mae, accuracy) = heldout_mae(&detector, &prepared_held);
        assert!(mae.is_finite() && (0.0..=1.0).contains(&accuracy));
        table.push((label.to_string(), format!("{mae:.4}"), format!("{accuracy:.4}")));
    }
    assert_eq!(table.len(), 5);
    println!("ablation comparison:");
    for (variant, mae, accuracy) in &table {
        println!("  {variant:<8} {mae:>12} {accuracy:>18}");
    }
    pass(9, "ablation switches run end-to-end with a comparison table");
}

// --------------------------------------------------------------------------
// Criterion 7: metric correctness.
// --------------------------------------------------------------------------

#[test]
fn criterion_07_metric_correctness() {
    // Hand arithmetic: every dimension off by exactly 0.1.
    let preds = vec![[0.6, 0.3, 0.8], [0.4, 0.5, 0.6]];
    let labels = vec![[0.5, 0.4, 0.9], [0.3, 0.6, 0.5]];
    let report = eval::regression_metrics(&preds, &labels, 0.5).unwrap();
    for dim in &report.per_dimension {
        assert!((dim.mae - 0.1).abs() < 1e-12);
        assert!((dim.mse - 0.01).abs() < 1e-12);
        assert!((dim.rmse - 0.1).abs() < 1e-12);
    }
    assert!((report.mean.mae - 0.1).abs() < 1e-12);

    // MAE never exceeds RMSE on random fixtures.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let n = rng.gen_range(1..16);
        let preds: Vec<[f64; 3]> = (0..n)
            .map(|_| [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)])
            .collect();
        let labels: Vec<[f64; 3]> = (0..n)
            .map(|_| [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)])
            .collect();
        let r = eval::regression_metrics(&preds, &labels, 0.5).unwrap();
        for dim in r.per_dimension.iter().chain([&r.mean]) {
            assert!(dim.mae <= dim.rmse + 1e-12);
        }
    }

    // Step behavior: constant 0.6 predictions against all-ones labels.
    let preds = vec![[0.6; 3]; 4];
    let labels = vec![[1.0; 3]; 4];
    let sweep = eval::threshold_sweep(&preds, &labels, &[0.5, 0.7]).unwrap();
    assert_eq!(sweep.rows[0].mean_accuracy, 1.0);
    assert_eq!(sweep.rows[1].mean_accuracy, 0.0);
    assert_eq!(sweep.rows[0].accuracy, [1.0; 3]);
    assert_eq!(sweep.rows[1].accuracy, [0.0; 3]);
    pass(7, "metric fixtures exact, MAE <= RMSE, sweep step behavior");
}

// --------------------------------------------------------------------------
// Criteria 8 and 10: CLI determinism and end-to-end detect.
// --------------------------------------------------------------------------

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_involvement"))
}

fn write_dataset(dir: &Path, name: &str, seed: u64, n: usize) -> PathBuf {
    let docs = synth::generate_corpus(&SynthConfig {
        n_documents: n,
        sentences_per_doc: 3,
        llm_fraction: 0.5,
        seed,
    });
    let path = dir.join(name);
    corpus::save_labeled_dataset(&docs, &path).unwrap();
    path
}

fn write_config(dir: &Path) -> PathBuf {
    let config = TrainConfig {
        d_model: 16,
        d_proj: 8,
        heads: 2,
        hidden_main: 8,
        hidden_eval: 6,
        epochs: 3,
        seed: 11,
        ..Default::default()
    };
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}

fn train_model(dataset: &Path, config: &Path, out: &Path) {
    let status = cli()
        .args(["train", "--offline"])
        .arg("--input")
        .arg(dataset)
        .arg("--config")
        .arg(config)
        .arg("--model-out")
        .arg(out)
        .stdout(std::process::Stdio::null())
        .status()
        .unwrap();
    assert!(status.success(), "train exited with {status}");
}

#[test]
fn criterion_08_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = write_dataset(dir.path(), "train.jsonl", 11, 8);
    let config = write_config(dir.path());

    let model_a = dir.path().join("model-a.json");
    let model_b = dir.path().join("model-b.json");
    train_model(&dataset, &config, &model_a);
    train_model(&dataset, &config, &model_b);
    let bytes_a = std::fs::read(&model_a).unwrap();
    let bytes_b = std::fs::read(&model_b).unwrap();
    assert_eq!(bytes_a, bytes_b, "checkpoints differ between identical runs");

    let input = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/mixed_document.txt");
    let mut reports = Vec::new();
    for _ in 0..2 {
        let output = cli()
            .args(["detect", "--offline", "--format", "json"])
            .arg("--model")
            .arg(&model_a)
            .arg("--input")
            .arg(&input)
            .output()
            .unwrap();
        assert!(output.status.success());
        reports.push(output.stdout);
    }
    assert_eq!(reports[0], reports[1], "detect JSON differs between identical runs");
    pass(8, "byte-identical checkpoints and reports under a fixed seed");
}

#[test]
fn criterion_10_end_to_end_cli() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = write_dataset(dir.path(), "train.jsonl", 11, 8);
    let config = write_config(dir.path());
    let model = dir.path().join("model.json");
    train_model(&dataset, &config, &model);

    let input = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/mixed_document.txt");
    let json_out = cli()
        .args(["detect", "--offline", "--format", "json"])
        .arg("--model")
        .arg(&model)
        .arg("--input")
        .arg(&input)
        .output()
        .unwrap();
    assert!(json_out.status.success(), "detect json exit {:?}", json_out.status);
    let report: DetectionReport =
        serde_json::from_slice(&json_out.stdout).expect("valid report JSON");
    assert_eq!(report.sentences.len(), 12);
    for s in &report.sentences {
        for v in s.scores.as_array() {
            assert!((0.0..=1.0).contains(&v));
        }
        // Banding under the 5% floor follows the mean of the three scores.
        let mean = s.scores.mean();
        let expected = if mean <= 0.05 {
            Level::None
        } else if mean <= 0.25 {
            Level::Low
        } else if mean <= 0.5 {
            Level::Medium
        } else if mean <= 0.75 {
            Level::High
        } else {
            Level::VeryHigh
        };
        assert_eq!(s.level, expected, "sentence {} banded wrong", s.index);
    }

    let html_out = cli()
        .args(["detect", "--offline", "--format", "html"])
        .arg("--model")
        .arg(&model)
        .arg("--input")
        .arg(&input)
        .output()
        .unwrap();
    assert!(html_out.status.success());
    let html = String::from_utf8(html_out.stdout).unwrap();
    assert_eq!(html.matches("class=\"sentence ").count(), 12);
    pass(10, "offline detect emits valid JSON and a 12-span HTML page");
}

// --------------------------------------------------------------------------
// Segmentation sanity for the bundled fixture (supports criterion 10).
// --------------------------------------------------------------------------

#[test]
fn bundled_document_segments_into_twelve_sentences() {
    let input = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/mixed_document.txt");
    let text = std::fs::read_to_string(input).unwrap();
    let doc = corpus::segment_document(&text, SegmentMode::RuleBased).unwrap();
    assert_eq!(doc.sentences.len(), 12);
}
