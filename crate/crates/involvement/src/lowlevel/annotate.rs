//! Deterministic token annotation: whitespace + punctuation tokenization,
//! vowel-group syllable counting, lexicon flags, and a rule-based coarse
//! POS tagger over a fixed 12-tag set.

use serde::{Deserialize, Serialize};

use super::lexicons;
use crate::corpus::Sentence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PosTag {
    Noun,
    Verb,
    Adj,
    Adv,
    Pron,
    Det,
    Adp,
    Conj,
    Num,
    Prt,
    Punct,
    X,
}

impl PosTag {
    pub const ALL: [PosTag; 12] = [
        PosTag::Noun,
        PosTag::Verb,
        PosTag::Adj,
        PosTag::Adv,
        PosTag::Pron,
        PosTag::Det,
        PosTag::Adp,
        PosTag::Conj,
        PosTag::Num,
        PosTag::Prt,
        PosTag::Punct,
        PosTag::X,
    ];

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&t| t == self).unwrap()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub pos: PosTag,
    /// Zero for punctuation tokens, at least one for word tokens.
    pub syllables: usize,
    pub is_stopword: bool,
    pub is_function_word: bool,
    pub is_word: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TokenAnnotation {
    pub text: String,
    pub tokens: Vec<Token>,
}

impl TokenAnnotation {
    pub fn word_tokens(&self) -> impl Iterator<Item = &Token> {
        self.tokens.iter().filter(|t| t.is_word)
    }

    pub fn word_count(&self) -> usize {
        self.word_tokens().count()
    }

    /// A sentence with no word tokens (punctuation only) is degenerate and
    /// cannot support the feature formulas.
    pub fn is_degenerate(&self) -> bool {
        self.word_count() == 0
    }
}

/// Annotate a sentence. Tokenization splits on whitespace and peels
/// leading/trailing punctuation into separate tokens; interior punctuation
/// (hyphens, apostrophes) stays inside the word.
pub fn annotate(sentence: &Sentence) -> TokenAnnotation {
    let mut tokens = Vec::new();
    for chunk in sentence.text.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let mut start = 0;
        let mut end = chars.len();
        while start < end && !chars[start].is_alphanumeric() {
            tokens.push(punct_token(chars[start]));
            start += 1;
        }
        let mut trailing = Vec::new();
        while end > start && !chars[end - 1].is_alphanumeric() {
            trailing.push(punct_token(chars[end - 1]));
            end -= 1;
        }
        if end > start {
            let surface: String = chars[start..end].iter().collect();
            tokens.push(word_token(&surface));
        }
        tokens.extend(trailing.into_iter().rev());
    }
    TokenAnnotation {
        text: sentence.text.clone(),
        tokens,
    }
}

fn punct_token(c: char) -> Token {
    Token {
        surface: c.to_string(),
        pos: PosTag::Punct,
        syllables: 0,
        is_stopword: false,
        is_function_word: false,
        is_word: false,
    }
}

fn word_token(surface: &str) -> Token {
    let lower = surface.to_lowercase();
    let is_stopword = lexicons::stopword_set().contains(lower.as_str());
    let is_function_word = lexicons::function_word_set().contains(lower.as_str());
    Token {
        pos: tag_word(surface, &lower),
        syllables: count_syllables(&lower),
        is_stopword,
        is_function_word,
        is_word: true,
        surface: surface.to_string(),
    }
}

/// Vowel-group heuristic with a silent-e rule: count maximal runs of
/// `aeiouy`, drop one for a trailing `e` that is not part of `-le`, floor
/// at one syllable per word.
pub fn count_syllables(word: &str) -> usize {
    let letters: Vec<char> = word
        .chars()
        .filter(|c| c.is_alphabetic())
        .flat_map(|c| c.to_lowercase())
        .collect();
    if letters.is_empty() {
        return 1;
    }
    let is_vowel = |c: char| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y');
    let mut groups = 0;
    let mut in_group = false;
    for &c in &letters {
        if is_vowel(c) {
            if !in_group {
                groups += 1;
                in_group = true;
            }
        } else {
            in_group = false;
        }
    }
    let n = letters.len();
    let ends_silent_e = n >= 2
        && letters[n - 1] == 'e'
        && !is_vowel(letters[n - 2])
        && !(n >= 2 && letters[n - 2] == 'l');
    if ends_silent_e && groups > 1 {
        groups -= 1;
    }
    groups.max(1)
}

const DETERMINERS: &[&str] = &[
    "a", "an", "the", "this", "that", "these", "those", "each", "every", "either", "neither",
    "some", "any", "no", "all", "both",
];
const PRONOUNS: &[&str] = &[
    "i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us", "them", "mine",
    "yours", "hers", "ours", "theirs", "myself", "yourself", "himself", "herself", "itself",
    "ourselves", "themselves", "who", "whom", "whose", "which", "what", "something", "anything",
    "nothing", "everything", "someone", "anyone", "everyone",
];
const ADPOSITIONS: &[&str] = &[
    "in", "on", "at", "by", "for", "with", "about", "against", "between", "into", "through",
    "during", "before", "after", "above", "below", "from", "over", "under", "of", "onto",
    "upon", "within", "without", "toward", "towards", "among", "around", "beside", "beyond",
    "near", "since", "until",
];
const CONJUNCTIONS: &[&str] = &[
    "and", "but", "or", "nor", "so", "yet", "although", "because", "if", "unless", "while",
    "whereas", "though", "whether", "as", "than", "when",
];
const PARTICLES: &[&str] = &["to", "not", "up", "down", "out", "off"];
const VERBS: &[&str] = &[
    "be", "am", "is", "are", "was", "were", "been", "being", "have", "has", "had", "having",
    "do", "does", "did", "doing", "will", "would", "shall", "should", "can", "could", "may",
    "might", "must", "go", "goes", "went", "gone", "say", "says", "said", "get", "got", "make",
    "makes", "made", "know", "knows", "knew", "think", "thinks", "thought", "take", "takes",
    "took", "see", "sees", "saw", "seen", "come", "comes", "came", "want", "wants", "use",
    "uses", "used", "find", "finds", "found", "give", "gives", "gave", "tell", "tells", "told",
    "work", "works", "call", "calls", "called", "sat", "sit", "sits", "run", "runs", "ran",
    "write", "writes", "wrote", "read", "reads", "show", "shows", "showed", "demonstrate",
    "demonstrates", "present", "presents", "propose", "proposes",
];
const ADVERBS: &[&str] = &[
    "very", "quite", "rather", "too", "also", "just", "only", "now", "then", "here", "there",
    "always", "never", "often", "sometimes", "again", "soon", "still", "almost", "enough",
    "however", "moreover", "furthermore", "indeed", "notably", "well",
];

/// Coarse 12-tag rule-based tagger: closed-class lookup first, then digit
/// and suffix heuristics, defaulting to NOUN.
pub fn tag_word(surface: &str, lower: &str) -> PosTag {
    if lower.chars().any(|c| c.is_ascii_digit()) {
        return PosTag::Num;
    }
    if DETERMINERS.contains(&lower) {
        return PosTag::Det;
    }
    if PRONOUNS.contains(&lower) {
        return PosTag::Pron;
    }
    if ADPOSITIONS.contains(&lower) {
        return PosTag::Adp;
    }
    if CONJUNCTIONS.contains(&lower) {
        return PosTag::Conj;
    }
    if PARTICLES.contains(&lower) {
        return PosTag::Prt;
    }
    if VERBS.contains(&lower) {
        return PosTag::Verb;
    }
    if ADVERBS.contains(&lower) || (lower.ends_with("ly") && lower.len() > 3) {
        return PosTag::Adv;
    }
    for suffix in ["ing", "ed", "ize", "ise", "ate"] {
        if lower.ends_with(suffix) && lower.len() > suffix.len() + 2 {
            return PosTag::Verb;
        }
    }
    for suffix in ["ous", "ful", "ive", "able", "ible", "al", "ic", "ish", "less", "est", "er"] {
        if lower.ends_with(suffix) && lower.len() > suffix.len() + 2 {
            return PosTag::Adj;
        }
    }
    if !surface.chars().any(|c| c.is_alphabetic()) {
        return PosTag::X;
    }
    PosTag::Noun
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentence(text: &str) -> Sentence {
        Sentence {
            text: text.to_string(),
            index: 0,
            labels: None,
        }
    }

    #[test]
    fn tokenizes_words_and_punctuation() {
        let ann = annotate(&sentence("The cat sat."));
        assert_eq!(ann.tokens.len(), 4);
        assert_eq!(ann.word_count(), 3);
        assert_eq!(ann.tokens[3].pos, PosTag::Punct);
    }

    #[test]
    fn syllable_counts() {
        assert_eq!(count_syllables("cat"), 1);
        assert_eq!(count_syllables("running"), 2);
        assert_eq!(count_syllables("the"), 1);
        assert_eq!(count_syllables("make"), 1); // silent e
        assert_eq!(count_syllables("table"), 2); // -le keeps its syllable
        assert_eq!(count_syllables("beautiful"), 3);
        assert_eq!(count_syllables("x"), 1); // floor at one
    }

    #[test]
    fn degenerate_detection() {
        let ann = annotate(&sentence("?! ..."));
        assert!(ann.is_degenerate());
        assert!(!annotate(&sentence("word")).is_degenerate());
    }

    #[test]
    fn pos_tagging_basics() {
        let ann = annotate(&sentence("The quick dog quickly ran to 42 trees."));
        let tags: Vec<PosTag> = ann.tokens.iter().map(|t| t.pos).collect();
        assert_eq!(tags[0], PosTag::Det);
        assert_eq!(tags[3], PosTag::Adv); // quickly
        assert_eq!(tags[4], PosTag::Verb); // ran
        assert_eq!(tags[5], PosTag::Prt); // to
        assert_eq!(tags[6], PosTag::Num); // 42
        assert_eq!(*tags.last().unwrap(), PosTag::Punct);
    }

    #[test]
    fn stopword_and_function_flags() {
        let ann = annotate(&sentence("The cat sat."));
        assert!(ann.tokens[0].is_stopword);
        assert!(ann.tokens[0].is_function_word);
        assert!(!ann.tokens[1].is_stopword);
    }
}
