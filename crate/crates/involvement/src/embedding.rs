//! Pluggable sentence/text embedding providers.
//!
//! The encoder behind the pipeline is abstracted as [`EmbeddingProvider`]:
//! a deterministic local hashing provider keeps everything offline and
//! reproducible, while [`RemoteProvider`] speaks a JSON-over-HTTP
//! embeddings endpoint. [`CachedProvider`] wraps either with an on-disk
//! content-addressed cache.

use std::fs;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{segment_document, Document, SegmentMode};
use crate::tensor::Tensor;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("provider {provider} failed after {attempts} attempts: {message}")]
    Provider {
        provider: String,
        message: String,
        attempts: u32,
    },
    #[error("empty input text")]
    DegenerateInput,
    #[error("chunk budget {0} is below the minimum of 16 tokens")]
    ChunkBudgetTooSmall(usize),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    Mean,
    ClsLike,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub vector: Vec<f64>,
    pub provider_id: String,
    pub pooling: Pooling,
}

impl Embedding {
    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn as_row(&self) -> Tensor {
        Tensor::row_vector(self.vector.clone())
    }
}

pub trait EmbeddingProvider: Send + Sync {
    fn embed(&self, texts: &[String]) -> Result<Vec<Embedding>, EmbeddingError>;
    fn dimension(&self) -> usize;
    fn id(&self) -> String;

    fn embed_single(&self, text: &str) -> Result<Embedding, EmbeddingError> {
        Ok(self
            .embed(std::slice::from_ref(&text.to_string()))?
            .into_iter()
            .next()
            .expect("one embedding per input"))
    }
}

impl<P: EmbeddingProvider + ?Sized> EmbeddingProvider for Box<P> {
    fn embed(&self, texts: &[String]) -> Result<Vec<Embedding>, EmbeddingError> {
        (**self).embed(texts)
    }

    fn dimension(&self) -> usize {
        (**self).dimension()
    }

    fn id(&self) -> String {
        (**self).id()
    }
}

/// Deterministic offline provider: hashed character trigram frequencies
/// projected through a seeded random matrix, L2-normalized.
pub struct LocalHashProvider {
    dim: usize,
    seed: u64,
    buckets: usize,
    projection: Vec<f64>, // dim x buckets, row-major
}

impl LocalHashProvider {
    pub const DEFAULT_DIM: usize = 256;

    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim >= 8, "embedding dimension must be at least 8");
        let buckets = 1024;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let projection = (0..dim * buckets)
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        Self {
            dim,
            seed,
            buckets,
            projection,
        }
    }

    fn embed_one(&self, text: &str) -> Vec<f64> {
        let chars: Vec<char> = text.to_lowercase().chars().collect();
        let mut counts = vec![0.0f64; self.buckets];
        if chars.len() < 3 {
            let mut bytes = Vec::new();
            for c in &chars {
                let mut buf = [0u8; 4];
                bytes.extend_from_slice(c.encode_utf8(&mut buf).as_bytes());
            }
            counts[(fnv1a(&bytes) % self.buckets as u64) as usize] += 1.0;
        } else {
            for win in chars.windows(3) {
                let gram: String = win.iter().collect();
                counts[(fnv1a(gram.as_bytes()) % self.buckets as u64) as usize] += 1.0;
            }
        }
        let total: f64 = counts.iter().sum::<f64>().max(1.0);
        for c in &mut counts {
            *c /= total;
        }
        let mut out = vec![0.0; self.dim];
        for (b, &c) in counts.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for d in 0..self.dim {
                out[d] += self.projection[d * self.buckets + b] * c;
            }
        }
        let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in &mut out {
                *x /= norm;
            }
        } else {
            out[0] = 1.0;
        }
        out
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

impl EmbeddingProvider for LocalHashProvider {
    fn embed(&self, texts: &[String]) -> Result<Vec<Embedding>, EmbeddingError> {
        Ok(texts
            .iter()
            .map(|t| Embedding {
                vector: self.embed_one(t),
                provider_id: self.id(),
                pooling: Pooling::Mean,
            })
            .collect())
    }

    fn dimension(&self) -> usize {
        self.dim
    }

    fn id(&self) -> String {
        format!("local-hash-v1:d{}:s{}", self.dim, self.seed)
    }
}

#[derive(Serialize)]
struct EmbeddingsRequest<'a> {
    model: &'a str,
    input: &'a [String],
}

#[derive(Deserialize)]
struct EmbeddingsResponse {
    data: Vec<EmbeddingsDatum>,
}

#[derive(Deserialize)]
struct EmbeddingsDatum {
    embedding: Vec<f64>,
}

/// JSON-over-HTTP embeddings endpoint client. The API key comes from the
/// `INVOLVEMENT_API_KEY` environment variable.
pub struct RemoteProvider {
    pub base_url: String,
    pub model: String,
    pub dim: usize,
    pub pooling: Pooling,
    client: reqwest::blocking::Client,
}

pub const API_KEY_ENV: &str = "INVOLVEMENT_API_KEY";

impl RemoteProvider {
    pub fn new(base_url: &str, model: &str, dim: usize, pooling: Pooling) -> Self {
        Self {
            base_url: base_url.trim_end_matches('/').to_string(),
            model: model.to_string(),
            dim,
            pooling,
            client: reqwest::blocking::Client::new(),
        }
    }
}

impl EmbeddingProvider for RemoteProvider {
    fn embed(&self, texts: &[String]) -> Result<Vec<Embedding>, EmbeddingError> {
        let url = format!("{}/embeddings", self.base_url);
        let mut request = self
            .client
            .post(&url)
            .json(&EmbeddingsRequest {
                model: &self.model,
                input: texts,
            });
        if let Ok(key) = std::env::var(API_KEY_ENV) {
            request = request.bearer_auth(key);
        }
        let fail = |message: String| EmbeddingError::Provider {
            provider: self.id(),
            message,
            attempts: 1,
        };
        let response = request.send().map_err(|e| fail(e.to_string()))?;
        if !response.status().is_success() {
            return Err(fail(format!("status {}", response.status())));
        }
        let body: EmbeddingsResponse = response.json().map_err(|e| fail(e.to_string()))?;
        if body.data.len() != texts.len() {
            return Err(fail(format!(
                "expected {} embeddings, got {}",
                texts.len(),
                body.data.len()
            )));
        }
        Ok(body
            .data
            .into_iter()
            .map(|d| Embedding {
                vector: d.embedding,
                provider_id: self.id(),
                pooling: self.pooling,
            })
            .collect())
    }

    fn dimension(&self) -> usize {
        self.dim
    }

    fn id(&self) -> String {
        format!("remote:{}:{}", self.base_url, self.model)
    }
}

/// On-disk content-addressed cache around any provider. Keys are SHA-256
/// of `provider_id || 0x00 || text`, so distinct texts cannot collide.
pub struct CachedProvider<P: EmbeddingProvider> {
    inner: P,
    dir: PathBuf,
    hits: AtomicU64,
    misses: AtomicU64,
    write_lock: Mutex<()>,
}

impl<P: EmbeddingProvider> CachedProvider<P> {
    pub fn new(inner: P, dir: PathBuf) -> Result<Self, EmbeddingError> {
        fs::create_dir_all(&dir)?;
        Ok(Self {
            inner,
            dir,
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
            write_lock: Mutex::new(()),
        })
    }

    pub fn cache_hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn cache_misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    fn key(&self, text: &str) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.inner.id().as_bytes());
        hasher.update([0u8]);
        hasher.update(text.as_bytes());
        format!("{:x}", hasher.finalize())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }
}

impl<P: EmbeddingProvider> EmbeddingProvider for CachedProvider<P> {
    fn embed(&self, texts: &[String]) -> Result<Vec<Embedding>, EmbeddingError> {
        let mut out: Vec<Option<Embedding>> = vec![None; texts.len()];
        let mut missing: Vec<usize> = Vec::new();
        for (i, text) in texts.iter().enumerate() {
            let path = self.path(&self.key(text));
            match fs::read_to_string(&path) {
                Ok(json) => match serde_json::from_str(&json) {
                    Ok(embedding) => {
                        self.hits.fetch_add(1, Ordering::Relaxed);
                        out[i] = Some(embedding);
                    }
                    Err(_) => missing.push(i),
                },
                Err(_) => missing.push(i),
            }
        }
        if !missing.is_empty() {
            let batch: Vec<String> = missing.iter().map(|&i| texts[i].clone()).collect();
            let fresh = self.inner.embed(&batch)?;
            self.misses.fetch_add(missing.len() as u64, Ordering::Relaxed);
            let _guard = self.write_lock.lock().unwrap();
            for (&i, embedding) in missing.iter().zip(fresh) {
                let path = self.path(&self.key(&texts[i]));
                let tmp = path.with_extension("tmp");
                fs::write(&tmp, serde_json::to_string(&embedding).unwrap())?;
                fs::rename(&tmp, &path)?;
                out[i] = Some(embedding);
            }
        }
        Ok(out.into_iter().map(|e| e.unwrap()).collect())
    }

    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn id(&self) -> String {
        self.inner.id()
    }
}

/// One embedding per sentence, order-aligned with the document.
pub fn embed_document(
    doc: &Document,
    provider: &dyn EmbeddingProvider,
) -> Result<Vec<Embedding>, EmbeddingError> {
    let texts: Vec<String> = doc.sentences.iter().map(|s| s.text.clone()).collect();
    provider.embed(&texts)
}

/// Embed a long text as a matrix of chunk embeddings. The text splits at
/// sentence boundaries into chunks of at most `max_chunk_tokens`
/// whitespace tokens (a chunk always takes at least one sentence).
pub fn embed_text_chunked(
    text: &str,
    max_chunk_tokens: usize,
    provider: &dyn EmbeddingProvider,
) -> Result<Vec<Embedding>, EmbeddingError> {
    if max_chunk_tokens < 16 {
        return Err(EmbeddingError::ChunkBudgetTooSmall(max_chunk_tokens));
    }
    let chunks = chunk_text(text, max_chunk_tokens)?;
    provider.embed(&chunks)
}

/// Split text at sentence boundaries into chunks whose concatenation
/// reconstructs the input.
pub fn chunk_text(text: &str, max_chunk_tokens: usize) -> Result<Vec<String>, EmbeddingError> {
    if text.trim().is_empty() {
        return Err(EmbeddingError::DegenerateInput);
    }
    let doc = segment_document(text, SegmentMode::RuleBased)
        .map_err(|_| EmbeddingError::DegenerateInput)?;
    let mut chunks: Vec<String> = Vec::new();
    let mut current = String::new();
    let mut current_tokens = 0usize;
    for sentence in &doc.sentences {
        let tokens = sentence.text.split_whitespace().count();
        if current_tokens > 0 && current_tokens + tokens > max_chunk_tokens {
            chunks.push(std::mem::take(&mut current));
            current_tokens = 0;
        }
        if !current.is_empty() {
            current.push(' ');
        }
        current.push_str(&sentence.text);
        current_tokens += tokens;
    }
    if !current.is_empty() {
        chunks.push(current);
    }
    Ok(chunks)
}
