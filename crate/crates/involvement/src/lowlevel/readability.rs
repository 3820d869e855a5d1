//! The 15 readability indices, each applied to a single sentence
//! (sentence count is fixed at 1 in every formula).
//!
//! Constants, with `W` = word tokens, `S` = 1 sentence, `Y` = total
//! syllables, `L` = letters, `P3` = words of 3+ syllables, `P5` = words of
//! 5+ syllables, `DW` = difficult words (2+ syllables, not in the bundled
//! easy-word list), `ND` = words not on the easy-word list:
//!
//! - Flesch Reading Ease: `206.835 - 1.015 (W/S) - 84.6 (Y/W)`
//! - Flesch-Kincaid Grade: `0.39 (W/S) + 11.8 (Y/W) - 15.59`
//! - SMOG: `1.0430 sqrt(P3 * 30/S) + 3.1291`
//! - Coleman-Liau: `0.0588 (100 L/W) - 0.296 (100 S/W) - 15.8`
//! - ARI: `4.71 (L/W) + 0.5 (W/S) - 21.43`
//! - Dale-Chall: `0.1579 (100 ND/W) + 0.0496 (W/S)`, `+3.6365` when the
//!   difficult percentage exceeds 5
//! - Difficult Words: `DW`
//! - Linsear Write: points = 1 per word under 3 syllables, 3 per word of
//!   3+; `r = points/S`; result `r/2` if `r > 20` else `(r - 2)/2`
//! - Gunning Fog: `0.4 ((W/S) + 100 P3/W)`
//! - Fernandez Huerta: `206.84 - 60 (Y/W) - 1.02 (W/S)`
//! - Szigriszt-Pazos: `206.835 - 62.3 (Y/W) - (W/S)`
//! - Gutierrez Polini: `95.2 - 9.7 (L/W) - 0.35 (W/S)`
//! - Crawford: `-0.205 (100 S/W) + 0.049 (100 Y/W) - 3.407`
//! - Gulpease: `89 + (300 S - 10 L) / W`
//! - Osman: `200.791 - 1.015 (W/S) - 24.181 (P5 + Y)/W` (the
//!   script-specific letter term is zero on Latin text)

use super::annotate::TokenAnnotation;
use super::lexicons;
use super::FeatureError;

pub const READABILITY_SLOTS: [&str; 15] = [
    "readability.flesch_reading_ease",
    "readability.flesch_kincaid_grade",
    "readability.smog_index",
    "readability.coleman_liau_index",
    "readability.automated_readability_index",
    "readability.dale_chall_score",
    "readability.difficult_words",
    "readability.linsear_write",
    "readability.gunning_fog",
    "readability.fernandez_huerta",
    "readability.szigriszt_pazos",
    "readability.gutierrez_polini",
    "readability.crawford",
    "readability.gulpease",
    "readability.osman",
];

/// Raw counts the formulas consume; exposed so tests can hand-compute the
/// indices from independently verified counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SentenceCounts {
    pub words: usize,
    pub syllables: usize,
    pub letters: usize,
    pub polysyllables_3: usize,
    pub polysyllables_5: usize,
    pub difficult_words: usize,
    pub not_easy_words: usize,
}

pub fn counts(ann: &TokenAnnotation) -> Result<SentenceCounts, FeatureError> {
    if ann.is_degenerate() {
        return Err(FeatureError::DegenerateInput);
    }
    let easy = lexicons::easy_word_set();
    let mut c = SentenceCounts {
        words: 0,
        syllables: 0,
        letters: 0,
        polysyllables_3: 0,
        polysyllables_5: 0,
        difficult_words: 0,
        not_easy_words: 0,
    };
    for token in ann.word_tokens() {
        c.words += 1;
        c.syllables += token.syllables;
        c.letters += token.surface.chars().filter(|ch| ch.is_alphabetic()).count();
        if token.syllables >= 3 {
            c.polysyllables_3 += 1;
        }
        if token.syllables >= 5 {
            c.polysyllables_5 += 1;
        }
        let lower = token.surface.to_lowercase();
        let on_easy_list = easy.contains(lower.as_str());
        if !on_easy_list {
            c.not_easy_words += 1;
            if token.syllables >= 2 {
                c.difficult_words += 1;
            }
        }
    }
    Ok(c)
}

/// Evaluate the 15 indices from raw counts (sentence count fixed at 1).
pub fn indices_from_counts(c: &SentenceCounts) -> [(&'static str, f64); 15] {
    let w = c.words as f64;
    let s = 1.0;
    let y = c.syllables as f64;
    let l = c.letters as f64;
    let p3 = c.polysyllables_3 as f64;
    let p5 = c.polysyllables_5 as f64;
    let nd = c.not_easy_words as f64;

    let flesch = 206.835 - 1.015 * (w / s) - 84.6 * (y / w);
    let fk_grade = 0.39 * (w / s) + 11.8 * (y / w) - 15.59;
    let smog = 1.0430 * (p3 * 30.0 / s).sqrt() + 3.1291;
    let coleman = 0.0588 * (100.0 * l / w) - 0.296 * (100.0 * s / w) - 15.8;
    let ari = 4.71 * (l / w) + 0.5 * (w / s) - 21.43;
    let pct_nd = 100.0 * nd / w;
    let mut dale_chall = 0.1579 * pct_nd + 0.0496 * (w / s);
    if pct_nd > 5.0 {
        dale_chall += 3.6365;
    }
    let difficult = c.difficult_words as f64;
    let points = (w - p3) + 3.0 * p3;
    let r = points / s;
    let linsear = if r > 20.0 { r / 2.0 } else { (r - 2.0) / 2.0 };
    let fog = 0.4 * ((w / s) + 100.0 * p3 / w);
    let huerta = 206.84 - 60.0 * (y / w) - 1.02 * (w / s);
    let szigriszt = 206.835 - 62.3 * (y / w) - (w / s);
    let polini = 95.2 - 9.7 * (l / w) - 0.35 * (w / s);
    let crawford = -0.205 * (100.0 * s / w) + 0.049 * (100.0 * y / w) - 3.407;
    let gulpease = 89.0 + (300.0 * s - 10.0 * l) / w;
    let osman = 200.791 - 1.015 * (w / s) - 24.181 * ((p5 + y) / w);

    [
        (READABILITY_SLOTS[0], flesch),
        (READABILITY_SLOTS[1], fk_grade),
        (READABILITY_SLOTS[2], smog),
        (READABILITY_SLOTS[3], coleman),
        (READABILITY_SLOTS[4], ari),
        (READABILITY_SLOTS[5], dale_chall),
        (READABILITY_SLOTS[6], difficult),
        (READABILITY_SLOTS[7], linsear),
        (READABILITY_SLOTS[8], fog),
        (READABILITY_SLOTS[9], huerta),
        (READABILITY_SLOTS[10], szigriszt),
        (READABILITY_SLOTS[11], polini),
        (READABILITY_SLOTS[12], crawford),
        (READABILITY_SLOTS[13], gulpease),
        (READABILITY_SLOTS[14], osman),
    ]
}

/// The 15 readability indices for an annotated sentence, in layout order.
pub fn readability_features(
    ann: &TokenAnnotation,
) -> Result<[(&'static str, f64); 15], FeatureError> {
    Ok(indices_from_counts(&counts(ann)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Sentence;
    use crate::lowlevel::annotate::annotate;

    fn ann(text: &str) -> TokenAnnotation {
        annotate(&Sentence {
            text: text.to_string(),
            index: 0,
            labels: None,
        })
    }

    fn value(features: &[(&str, f64)], name: &str) -> f64 {
        features
            .iter()
            .find(|(n, _)| n.ends_with(name))
            .map(|(_, v)| *v)
            .unwrap()
    }

    #[test]
    fn flesch_the_cat_sat() {
        let f = readability_features(&ann("The cat sat.")).unwrap();
        let expected = 206.835 - 1.015 * 3.0 - 84.6 * (3.0 / 3.0);
        assert!((value(&f, "flesch_reading_ease") - expected).abs() < 1e-9);
        assert!((value(&f, "flesch_reading_ease") - 119.19).abs() < 1e-2);
    }

    #[test]
    fn ari_the_cat_sat() {
        let f = readability_features(&ann("The cat sat.")).unwrap();
        let expected = 4.71 * (9.0 / 3.0) + 0.5 * 3.0 - 21.43;
        assert!((value(&f, "automated_readability_index") - expected).abs() < 1e-9);
        assert!((expected - (-5.80)).abs() < 1e-9);
    }

    #[test]
    fn gunning_fog_no_complex_words() {
        let f = readability_features(&ann("The cat sat.")).unwrap();
        assert!((value(&f, "gunning_fog") - 1.2).abs() < 1e-9);
    }

    #[test]
    fn degenerate_input_rejected() {
        assert!(matches!(
            readability_features(&ann("?!")),
            Err(FeatureError::DegenerateInput)
        ));
    }

    #[test]
    fn deterministic() {
        let a = readability_features(&ann("Readability is computed twice.")).unwrap();
        let b = readability_features(&ann("Readability is computed twice.")).unwrap();
        assert_eq!(a, b);
    }
}
