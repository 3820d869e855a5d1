//! Bundled static lexicons: stopwords, function words, an easy-word list
//! for difficult-word counting, and a frequency ranking for word frequency
//! classes. Everything ships inside the binary so feature extraction needs
//! no network or data files; [`lexicon_hash`] versions the bundle.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use sha2::{Digest, Sha256};

pub const STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
    "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few", "for",
    "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers", "herself",
    "him", "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just",
    "me", "more", "most", "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once",
    "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own", "same", "she",
    "should", "so", "some", "such", "than", "that", "the", "their", "theirs", "them",
    "themselves", "then", "there", "these", "they", "this", "those", "through", "to", "too",
    "under", "until", "up", "very", "was", "we", "were", "what", "when", "where", "which",
    "while", "who", "whom", "why", "will", "with", "would", "you", "your", "yours", "yourself",
    "yourselves",
];

/// Closed-class words: determiners, pronouns, prepositions, conjunctions,
/// auxiliaries, and particles.
pub const FUNCTION_WORDS: &[&str] = &[
    "a", "an", "the", "this", "that", "these", "those", "each", "every", "either", "neither",
    "some", "any", "no", "all", "both", "half", "several", "many", "much", "few", "little",
    "i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us", "them", "mine",
    "yours", "hers", "ours", "theirs", "myself", "yourself", "himself", "herself", "itself",
    "ourselves", "themselves", "who", "whom", "whose", "which", "what", "in", "on", "at", "by",
    "for", "with", "about", "against", "between", "into", "through", "during", "before",
    "after", "above", "below", "from", "up", "down", "out", "off", "over", "under", "of",
    "onto", "upon", "within", "without", "toward", "towards", "among", "around", "beside",
    "besides", "beyond", "near", "since", "until", "and", "but", "or", "nor", "so", "yet",
    "although", "because", "if", "unless", "while", "whereas", "though", "whether", "as",
    "than", "be", "am", "is", "are", "was", "were", "been", "being", "have", "has", "had",
    "having", "do", "does", "did", "doing", "will", "would", "shall", "should", "can", "could",
    "may", "might", "must", "ought", "to", "not",
];

/// Abridged easy-word list for difficult-word counting: a word not on this
/// list (with two or more syllables) counts as difficult.
pub const EASY_WORDS: &[&str] = &[
    "able", "about", "after", "again", "air", "all", "almost", "along", "also", "always", "am",
    "an", "and", "animal", "another", "answer", "any", "are", "around", "as", "ask", "at",
    "away", "baby", "back", "bad", "ball", "be", "bear", "beautiful", "because", "bed", "been",
    "before", "began", "begin", "behind", "being", "believe", "best", "better", "between",
    "big", "bird", "black", "blue", "boat", "body", "book", "both", "box", "boy", "bring",
    "brother", "brought", "build", "busy", "but", "buy", "by", "call", "came", "can", "car",
    "care", "carry", "cat", "catch", "change", "child", "children", "city", "class", "clean",
    "close", "cold", "color", "come", "could", "country", "cut", "dark", "day", "deep", "did",
    "do", "does", "dog", "done", "door", "down", "draw", "dream", "dress", "drink", "drive",
    "dry", "each", "ear", "early", "earth", "easy", "eat", "egg", "eight", "end", "enough",
    "even", "evening", "ever", "every", "eye", "face", "fact", "fall", "family", "far", "farm",
    "fast", "father", "feel", "feet", "fell", "felt", "few", "field", "find", "fine", "fire",
    "first", "fish", "five", "fly", "follow", "food", "foot", "for", "found", "four", "free",
    "friend", "from", "front", "full", "fun", "game", "garden", "gave", "get", "girl", "give",
    "glad", "go", "goes", "going", "gold", "gone", "good", "got", "grass", "great", "green",
    "grew", "ground", "grow", "had", "hair", "half", "hand", "happy", "hard", "has", "hat",
    "have", "he", "head", "hear", "heard", "heart", "heavy", "held", "help", "her", "here",
    "high", "hill", "him", "his", "hold", "home", "hope", "horse", "hot", "hour", "house",
    "how", "hundred", "hurt", "i", "ice", "idea", "if", "in", "into", "is", "it", "its", "job",
    "jump", "just", "keep", "kept", "kind", "king", "knew", "know", "land", "large", "last",
    "late", "laugh", "learn", "leave", "left", "leg", "let", "letter", "life", "light", "like",
    "line", "listen", "little", "live", "long", "look", "lost", "lot", "loud", "love", "low",
    "made", "make", "man", "many", "may", "me", "mean", "men", "might", "mile", "milk", "mind",
    "mine", "money", "month", "moon", "more", "morning", "most", "mother", "move", "much",
    "music", "must", "my", "name", "near", "need", "never", "new", "next", "nice", "night",
    "nine", "no", "noise", "north", "not", "note", "nothing", "now", "number", "of", "off",
    "often", "old", "on", "once", "one", "only", "open", "or", "other", "our", "out", "over",
    "own", "page", "paper", "part", "party", "pass", "past", "pay", "people", "pick",
    "picture", "place", "plan", "plant", "play", "point", "poor", "put", "question", "quick",
    "quiet", "rain", "ran", "reach", "read", "ready", "real", "red", "rest", "ride", "right",
    "river", "road", "rock", "room", "round", "run", "sad", "said", "same", "sat", "saw",
    "say", "school", "sea", "second", "see", "seen", "send", "sent", "set", "seven", "shall",
    "she", "ship", "short", "should", "show", "side", "sing", "sister", "sit", "six", "sky",
    "sleep", "slow", "small", "snow", "so", "some", "song", "soon", "sound", "south", "space",
    "stand", "star", "start", "stay", "step", "still", "stop", "story", "street", "strong",
    "such", "summer", "sun", "sure", "table", "take", "talk", "tall", "tell", "ten", "than",
    "that", "the", "their", "them", "then", "there", "these", "they", "thing", "think",
    "this", "those", "thought", "three", "through", "time", "to", "today", "together", "told",
    "too", "took", "top", "town", "tree", "true", "try", "turn", "two", "under", "until",
    "up", "us", "use", "very", "voice", "wait", "walk", "want", "warm", "was", "watch",
    "water", "way", "we", "week", "well", "went", "were", "wet", "what", "when", "where",
    "which", "while", "white", "who", "why", "wide", "will", "wind", "window", "winter",
    "wish", "with", "word", "work", "world", "would", "write", "year", "yes", "yet", "you",
    "young", "your",
];

/// Common words in descending frequency order; rank drives the word
/// frequency class: `class(word) = floor(log2(rank + 1))`, unknown words
/// take [`UNKNOWN_FREQUENCY_CLASS`].
pub const FREQUENCY_RANKING: &[&str] = &[
    "the", "of", "and", "a", "to", "in", "is", "you", "that", "it", "he", "was", "for", "on",
    "are", "as", "with", "his", "they", "i", "at", "be", "this", "have", "from", "or", "one",
    "had", "by", "word", "but", "not", "what", "all", "were", "we", "when", "your", "can",
    "said", "there", "use", "an", "each", "which", "she", "do", "how", "their", "if", "will",
    "up", "other", "about", "out", "many", "then", "them", "these", "so", "some", "her",
    "would", "make", "like", "him", "into", "time", "has", "look", "two", "more", "write",
    "go", "see", "number", "no", "way", "could", "people", "my", "than", "first", "water",
    "been", "call", "who", "oil", "its", "now", "find", "long", "down", "day", "did", "get",
    "come", "made", "may", "part", "over", "new", "sound", "take", "only", "little", "work",
    "know", "place", "year", "live", "me", "back", "give", "most", "very", "after", "thing",
    "our", "just", "name", "good", "sentence", "man", "think", "say", "great", "where",
    "help", "through", "much", "before", "line", "right", "too", "mean", "old", "any",
    "same", "tell", "boy", "follow", "came", "want", "show", "also", "around", "form",
    "three", "small", "set", "put", "end", "does", "another", "well", "large", "must",
    "big", "even", "such", "because", "turn", "here", "why", "ask", "went", "men", "read",
    "need", "land", "different", "home", "us", "move", "try", "kind", "hand", "picture",
    "again", "change", "off", "play", "spell", "air", "away", "animal", "house", "point",
    "page", "letter", "mother", "answer", "found", "study", "still", "learn", "should",
    "world", "high",
];

pub const UNKNOWN_FREQUENCY_CLASS: f64 = 20.0;

fn set(words: &'static [&'static str]) -> HashSet<&'static str> {
    words.iter().copied().collect()
}

pub fn stopword_set() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| set(STOPWORDS))
}

pub fn function_word_set() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| set(FUNCTION_WORDS))
}

pub fn easy_word_set() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| set(EASY_WORDS))
}

/// Word frequency class for a lowercased word.
pub fn frequency_class(word: &str) -> f64 {
    static MAP: OnceLock<HashMap<&'static str, f64>> = OnceLock::new();
    let map = MAP.get_or_init(|| {
        FREQUENCY_RANKING
            .iter()
            .enumerate()
            .map(|(rank, &w)| (w, ((rank + 1) as f64).log2().floor()))
            .collect()
    });
    map.get(word).copied().unwrap_or(UNKNOWN_FREQUENCY_CLASS)
}

/// Version hash of the bundled lexicons, recorded in feature manifests.
pub fn lexicon_hash() -> String {
    static HASH: OnceLock<String> = OnceLock::new();
    HASH.get_or_init(|| {
        let mut hasher = Sha256::new();
        for list in [STOPWORDS, FUNCTION_WORDS, EASY_WORDS, FREQUENCY_RANKING] {
            for word in list {
                hasher.update(word.as_bytes());
                hasher.update([0u8]);
            }
            hasher.update([1u8]);
        }
        format!("{:x}", hasher.finalize())
    })
    .clone()
}
