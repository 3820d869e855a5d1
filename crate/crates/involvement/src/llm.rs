//! Chat-completion client and prompt templates for variant generation and
//! whole-text linguistic analysis.
//!
//! Every operation has a deterministic offline fallback (a rule-based
//! paraphraser and a structured linguistic summary), so the full pipeline
//! and its tests run without any external service. Responses are cached on
//! disk keyed by template hash and input hash.

use std::fs;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{segment_document, SegmentMode};
use crate::lowlevel::{annotate, PosTag};

pub const API_KEY_ENV: &str = "INVOLVEMENT_API_KEY";

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("llm unavailable after {attempts} attempts: {last_error}")]
    LlmUnavailable { attempts: u32, last_error: String },
    #[error("llm returned an empty completion")]
    EmptyCompletion,
    #[error("empty input text")]
    EmptyInput,
    #[error("template placeholder missing: {0}")]
    BadTemplate(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    HumanLike,
    Rewrite,
    LinguisticAnalysis,
}

/// A versioned prompt template with a single `{text}` placeholder.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub id: TemplateId,
    pub template: String,
    pub version: String,
}

impl PromptTemplate {
    pub fn render(&self, text: &str) -> Result<String, LlmError> {
        if !self.template.contains("{text}") {
            return Err(LlmError::BadTemplate("{text}".into()));
        }
        Ok(self.template.replace("{text}", text))
    }

    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.version.as_bytes());
        hasher.update([0u8]);
        hasher.update(self.template.as_bytes());
        format!("{:x}", hasher.finalize())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Templates {
    pub human_like: PromptTemplate,
    pub rewrite: PromptTemplate,
    pub analysis: PromptTemplate,
}

impl Default for Templates {
    fn default() -> Self {
        Self {
            human_like: PromptTemplate {
                id: TemplateId::HumanLike,
                version: "1.0.0".into(),
                template: "Rewrite the following text so that it closely imitates natural human \
                           writing patterns, varying sentence structure and word choice while \
                           preserving the meaning. Return only the rewritten text.\n\n{text}"
                    .into(),
            },
            rewrite: PromptTemplate {
                id: TemplateId::Rewrite,
                version: "1.0.0".into(),
                template: "Paraphrase the following text, changing the wording and sentence \
                           order while keeping the original meaning intact. Return only the \
                           paraphrased text.\n\n{text}"
                    .into(),
            },
            analysis: PromptTemplate {
                id: TemplateId::LinguisticAnalysis,
                version: "1.0.0".into(),
                template: "Analyze the following text in depth, focusing on lexicon, grammar, \
                           and syntax. Describe vocabulary choice, grammatical structure, and \
                           syntactic patterns, sentence by sentence where relevant.\n\n{text}"
                    .into(),
            },
        }
    }
}

impl Templates {
    /// Hashes recorded in checkpoints and reports.
    pub fn hashes(&self) -> Vec<(String, String)> {
        vec![
            ("human_like".into(), self.human_like.content_hash()),
            ("rewrite".into(), self.rewrite.content_hash()),
            ("analysis".into(), self.analysis.content_hash()),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: usize,
    pub completion_tokens: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmResponse {
    pub text: String,
    pub model_id: String,
    pub usage: TokenUsage,
    pub cached: bool,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    temperature: f64,
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatChoiceMessage,
}

#[derive(Deserialize)]
struct ChatChoiceMessage {
    content: String,
}

/// Blocking chat-completions client with exponential-backoff retries.
pub struct ChatClient {
    pub base_url: String,
    pub model: String,
    pub max_attempts: u32,
    pub backoff_base_ms: u64,
    client: reqwest::blocking::Client,
}

impl ChatClient {
    pub fn new(base_url: &str, model: &str) -> Self {
        Self {
            base_url: base_url.trim_end_matches('/').to_string(),
            model: model.to_string(),
            max_attempts: 3,
            backoff_base_ms: 500,
            client: reqwest::blocking::Client::new(),
        }
    }

    pub fn complete(&self, prompt: &str, temperature: f64) -> Result<String, LlmError> {
        let url = format!("{}/chat/completions", self.base_url);
        let mut last_error = String::new();
        for attempt in 0..self.max_attempts {
            if attempt > 0 {
                let delay = self.backoff_base_ms * (1u64 << (attempt - 1));
                std::thread::sleep(std::time::Duration::from_millis(delay));
            }
            let mut request = self.client.post(&url).json(&ChatRequest {
                model: &self.model,
                messages: vec![ChatMessage {
                    role: "user",
                    content: prompt,
                }],
                temperature,
            });
            if let Ok(key) = std::env::var(API_KEY_ENV) {
                request = request.bearer_auth(key);
            }
            match request.send() {
                Ok(response) if response.status().is_success() => {
                    match response.json::<ChatResponse>() {
                        Ok(body) => {
                            let text = body
                                .choices
                                .first()
                                .map(|c| c.message.content.clone())
                                .unwrap_or_default();
                            if text.trim().is_empty() {
                                return Err(LlmError::EmptyCompletion);
                            }
                            return Ok(text);
                        }
                        Err(e) => last_error = e.to_string(),
                    }
                }
                Ok(response) => last_error = format!("status {}", response.status()),
                Err(e) => last_error = e.to_string(),
            }
        }
        Err(LlmError::LlmUnavailable {
            attempts: self.max_attempts,
            last_error,
        })
    }
}

/// Generation temperature defaults: creative rewrites vs deterministic
/// analysis.
pub const GENERATION_TEMPERATURE: f64 = 0.7;
pub const ANALYSIS_TEMPERATURE: f64 = 0.0;

pub enum Backend {
    /// Deterministic rule-based generation; no network.
    Offline,
    Remote(ChatClient),
}

/// Front door for variant generation and whole-text analysis.
pub struct LlmEngine {
    pub backend: Backend,
    pub templates: Templates,
    cache_dir: Option<PathBuf>,
    network_requests: AtomicU64,
}

impl LlmEngine {
    pub fn offline() -> Self {
        Self {
            backend: Backend::Offline,
            templates: Templates::default(),
            cache_dir: None,
            network_requests: AtomicU64::new(0),
        }
    }

    pub fn remote(client: ChatClient) -> Self {
        Self {
            backend: Backend::Remote(client),
            templates: Templates::default(),
            cache_dir: None,
            network_requests: AtomicU64::new(0),
        }
    }

    pub fn with_cache_dir(mut self, dir: PathBuf) -> Result<Self, LlmError> {
        fs::create_dir_all(&dir)?;
        self.cache_dir = Some(dir);
        Ok(self)
    }

    pub fn network_requests(&self) -> u64 {
        self.network_requests.load(Ordering::Relaxed)
    }

    pub fn model_id(&self) -> String {
        match &self.backend {
            Backend::Offline => "offline-rulebased-v1".into(),
            Backend::Remote(c) => c.model.clone(),
        }
    }

    fn cache_key(&self, template: &PromptTemplate, input: &str) -> String {
        let mut hasher = Sha256::new();
        hasher.update(template.content_hash().as_bytes());
        hasher.update([0u8]);
        hasher.update(self.model_id().as_bytes());
        hasher.update([0u8]);
        hasher.update(input.as_bytes());
        format!("{:x}", hasher.finalize())
    }

    fn cached(&self, key: &str) -> Option<LlmResponse> {
        let dir = self.cache_dir.as_ref()?;
        let json = fs::read_to_string(dir.join(format!("{key}.json"))).ok()?;
        let mut response: LlmResponse = serde_json::from_str(&json).ok()?;
        response.cached = true;
        Some(response)
    }

    fn store(&self, key: &str, response: &LlmResponse) -> Result<(), LlmError> {
        if let Some(dir) = &self.cache_dir {
            let path = dir.join(format!("{key}.json"));
            let tmp = path.with_extension("tmp");
            fs::write(&tmp, serde_json::to_string(response).unwrap())?;
            fs::rename(&tmp, &path)?;
        }
        Ok(())
    }

    fn run(
        &self,
        template: &PromptTemplate,
        input: &str,
        temperature: f64,
        offline: impl Fn(&str) -> String,
    ) -> Result<LlmResponse, LlmError> {
        if input.trim().is_empty() {
            return Err(LlmError::EmptyInput);
        }
        let key = self.cache_key(template, input);
        if let Some(hit) = self.cached(&key) {
            return Ok(hit);
        }
        let text = match &self.backend {
            Backend::Offline => offline(input),
            Backend::Remote(client) => {
                self.network_requests.fetch_add(1, Ordering::Relaxed);
                client.complete(&template.render(input)?, temperature)?
            }
        };
        if text.trim().is_empty() {
            return Err(LlmError::EmptyCompletion);
        }
        let response = LlmResponse {
            usage: TokenUsage {
                prompt_tokens: input.split_whitespace().count(),
                completion_tokens: text.split_whitespace().count(),
            },
            text,
            model_id: self.model_id(),
            cached: false,
        };
        self.store(&key, &response)?;
        Ok(response)
    }

    /// The two evasion-style variants of an LLM-generated text: a
    /// human-imitating rewrite and a paraphrase.
    pub fn generate_variants(&self, t_llm: &str) -> Result<(String, String), LlmError> {
        let human_like = self.run(
            &self.templates.human_like.clone(),
            t_llm,
            GENERATION_TEMPERATURE,
            offline_human_like,
        )?;
        let rewritten = self.run(
            &self.templates.rewrite.clone(),
            t_llm,
            GENERATION_TEMPERATURE,
            offline_rewrite,
        )?;
        Ok((human_like.text, rewritten.text))
    }

    /// Whole-text linguistic analysis covering lexicon, grammar, and syntax.
    pub fn analyze_text(&self, full_text: &str) -> Result<LlmResponse, LlmError> {
        self.run(
            &self.templates.analysis.clone(),
            full_text,
            ANALYSIS_TEMPERATURE,
            offline_analysis,
        )
    }
}

/// Synonym table used by the offline paraphraser; first entry is the
/// informal form, second the formal form.
const SYNONYMS: &[(&str, &str)] = &[
    ("use", "utilize"),
    ("show", "demonstrate"),
    ("help", "assist"),
    ("big", "large"),
    ("small", "compact"),
    ("start", "commence"),
    ("end", "conclude"),
    ("make", "construct"),
    ("get", "obtain"),
    ("need", "require"),
    ("also", "furthermore"),
    ("but", "however"),
    ("so", "therefore"),
    ("think", "consider"),
    ("find", "identify"),
    ("give", "provide"),
    ("keep", "maintain"),
    ("ask", "inquire"),
    ("fast", "rapid"),
    ("new", "novel"),
    ("good", "beneficial"),
    ("many", "numerous"),
];

fn swap_words(text: &str, formal_direction: bool) -> (String, bool) {
    let mut edited = false;
    let out: Vec<String> = text
        .split_whitespace()
        .map(|token| {
            let trailing: String = token
                .chars()
                .rev()
                .take_while(|c| !c.is_alphanumeric())
                .collect::<Vec<_>>()
                .into_iter()
                .rev()
                .collect();
            let core = &token[..token.len() - trailing.len()];
            let lower = core.to_lowercase();
            let replacement = SYNONYMS.iter().find_map(|&(informal, formal)| {
                if formal_direction && lower == informal {
                    Some(formal)
                } else if !formal_direction && lower == formal {
                    Some(informal)
                } else {
                    None
                }
            });
            match replacement {
                Some(word) => {
                    edited = true;
                    let cased = if core.chars().next().is_some_and(|c| c.is_uppercase()) {
                        let mut cs = word.chars();
                        cs.next()
                            .map(|c| c.to_uppercase().collect::<String>() + cs.as_str())
                            .unwrap_or_default()
                    } else {
                        word.to_string()
                    };
                    format!("{cased}{trailing}")
                }
                None => token.to_string(),
            }
        })
        .collect();
    (out.join(" "), edited)
}

/// Offline human-imitation rewrite: formal vocabulary is relaxed to
/// informal choices and common contractions are applied. Guarantees at
/// least one edit for inputs of five or more words.
pub fn offline_human_like(text: &str) -> String {
    let (mut out, mut edited) = swap_words(text, false);
    for (long, short) in [
        ("do not", "don't"),
        ("does not", "doesn't"),
        ("it is", "it's"),
        ("we are", "we're"),
        ("cannot", "can't"),
    ] {
        if out.contains(long) {
            out = out.replace(long, short);
            edited = true;
        }
    }
    if !edited && text.split_whitespace().count() >= 5 {
        out = format!("Honestly, {out}");
    }
    out
}

/// Offline paraphrase: informal vocabulary is formalized and the leading
/// clause of comma-bearing sentences moves to the end. Guarantees at least
/// one edit for inputs of five or more words.
pub fn offline_rewrite(text: &str) -> String {
    let (swapped, mut edited) = swap_words(text, true);
    let Ok(doc) = segment_document(&swapped, SegmentMode::RuleBased) else {
        return swapped;
    };
    let sentences: Vec<String> = doc
        .sentences
        .iter()
        .map(|s| {
            let t = &s.text;
            if let Some(pos) = t.find(", ") {
                let (head, tail) = t.split_at(pos);
                let tail = tail.trim_start_matches(", ");
                let terminal = tail
                    .chars()
                    .last()
                    .filter(|c| ['.', '!', '?'].contains(c));
                let body = match terminal {
                    Some(_) => &tail[..tail.len() - 1],
                    None => tail,
                };
                edited = true;
                let mut head_lower = head.to_string();
                if let Some(first) = head_lower.get(0..1) {
                    head_lower.replace_range(0..1, &first.to_lowercase());
                }
                format!(
                    "{}{}, {}{}",
                    body.get(0..1).map(|c| c.to_uppercase()).unwrap_or_default(),
                    body.get(1..).unwrap_or(""),
                    head_lower,
                    terminal.map(String::from).unwrap_or_default()
                )
            } else {
                t.clone()
            }
        })
        .collect();
    let mut out = sentences.join(" ");
    if !edited && text.split_whitespace().count() >= 5 {
        out = format!("In other words, {out}");
    }
    out
}

/// Offline whole-text analysis: a deterministic structured summary of the
/// text's lexicon, grammar, and syntax built from the low-level annotator.
pub fn offline_analysis(text: &str) -> String {
    let Ok(doc) = segment_document(text, SegmentMode::RuleBased) else {
        return String::new();
    };
    let annotations: Vec<_> = doc.sentences.iter().map(annotate).collect();
    let mut words = 0usize;
    let mut chars = 0usize;
    let mut syllables = 0usize;
    let mut function_words = 0usize;
    let mut nouns = 0usize;
    let mut verbs = 0usize;
    let mut tokens = 0usize;
    let mut vocab = std::collections::HashSet::new();
    for ann in &annotations {
        for t in &ann.tokens {
            tokens += 1;
            match t.pos {
                PosTag::Noun => nouns += 1,
                PosTag::Verb => verbs += 1,
                _ => {}
            }
            if t.is_word {
                words += 1;
                chars += t.surface.chars().count();
                syllables += t.syllables;
                if t.is_function_word {
                    function_words += 1;
                }
                vocab.insert(t.surface.to_lowercase());
            }
        }
    }
    let n_sentences = doc.sentences.len().max(1);
    let w = words.max(1) as f64;
    format!(
        "Lexicon: the text contains {} distinct word types over {} word tokens, with an average \
         word length of {:.2} characters and {:.2} syllables per word, suggesting {} vocabulary. \
         Grammar: function words make up {:.1}% of the words and the average sentence length is \
         {:.1} words across {} sentences, indicating {} grammatical structure. \
         Syntax: nouns account for {:.1}% and verbs for {:.1}% of all tokens, a pattern of {} \
         syntactic construction.",
        vocab.len(),
        words,
        chars as f64 / w,
        syllables as f64 / w,
        if syllables as f64 / w > 1.8 { "elaborate" } else { "plain" },
        100.0 * function_words as f64 / w,
        words as f64 / n_sentences as f64,
        n_sentences,
        if words as f64 / n_sentences as f64 > 18.0 { "complex" } else { "simple" },
        100.0 * nouns as f64 / tokens.max(1) as f64,
        100.0 * verbs as f64 / tokens.max(1) as f64,
        if nouns >= verbs { "nominal" } else { "verbal" },
    )
}
