//! Unit-normalized sentence embeddings and cosine similarity.
//!
//! Two embedders live behind the [`Embedder`] contract: a remote HTTP
//! endpoint client and a deterministic hashing embedder used for offline
//! runs, tests, and reproducible fixtures. Vectors are always re-normalized
//! locally on construction, so downstream cosine is a plain dot product.

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::retry::{run_with_retries, Attempt, RetryPolicy};

/// Environment variable holding the bearer token for the remote embedder.
pub const EMBED_API_KEY_VAR: &str = "EMBED_API_KEY";

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("embed called with an empty input batch")]
    EmptyInput,
    #[error("input text at index {0} is empty after trimming")]
    EmptyText(usize),
    #[error("text produced no tokens to embed: {0:?}")]
    NoTokens(String),
    #[error("vector contains a non-finite entry")]
    NonFinite,
    #[error("cannot normalize a zero vector")]
    ZeroNorm,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("embedding backend unavailable after {attempts} attempts: {message}")]
    BackendUnavailable { attempts: u32, message: String },
    #[error("embedding endpoint returned a bad response: {0}")]
    BadResponse(String),
    #[error("invalid embedder config: {0}")]
    InvalidConfig(String),
}

// ---------------------------------------------------------------------------
// Vectors
// ---------------------------------------------------------------------------

/// A unit-norm embedding vector. Construction normalizes and checks
/// finiteness, so every value of this type has L2 norm within 1e-9 of 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingVector {
    values: Vec<f64>,
}

impl EmbeddingVector {
    /// Normalize `values` to unit L2 norm.
    pub fn normalized(values: Vec<f64>) -> Result<Self, EmbeddingError> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(EmbeddingError::NonFinite);
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(EmbeddingError::ZeroNorm);
        }
        let values = values.into_iter().map(|v| v / norm).collect();
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Cosine similarity of two unit vectors: their dot product, clamped to
/// [-1, 1] against round-off.
pub fn cosine_similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, EmbeddingError> {
    if a.dim() != b.dim() {
        return Err(EmbeddingError::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    Ok(dot_clamped(a.values(), b.values()))
}

/// Dot product of two unit-norm slices, clamped to [-1, 1].
pub(crate) fn dot_clamped(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    dot.clamp(-1.0, 1.0)
}

// ---------------------------------------------------------------------------
// Config and contract
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbedderKind {
    Remote,
    DeterministicHash,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedderConfig {
    pub kind: EmbedderKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_name: Option<String>,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
}

fn default_dim() -> usize {
    256
}

fn default_batch_size() -> usize {
    32
}

impl Default for EmbedderConfig {
    fn default() -> Self {
        Self {
            kind: EmbedderKind::DeterministicHash,
            endpoint: None,
            model_name: None,
            dim: default_dim(),
            batch_size: default_batch_size(),
        }
    }
}

impl EmbedderConfig {
    pub fn validate(&self) -> Result<(), EmbeddingError> {
        match self.kind {
            EmbedderKind::Remote if self.endpoint.is_none() => Err(
                EmbeddingError::InvalidConfig("remote embedder requires an endpoint".into()),
            ),
            EmbedderKind::DeterministicHash if self.dim == 0 => Err(
                EmbeddingError::InvalidConfig("deterministic embedder requires dim >= 1".into()),
            ),
            _ if self.batch_size == 0 => {
                Err(EmbeddingError::InvalidConfig("batch_size must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }
}

/// The embedding contract: one unit vector per input text, same order.
/// Implementations are stateless after configuration and safe to share.
pub trait Embedder: Send + Sync {
    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbeddingError>;
}

fn check_inputs(texts: &[String]) -> Result<(), EmbeddingError> {
    if texts.is_empty() {
        return Err(EmbeddingError::EmptyInput);
    }
    for (i, t) in texts.iter().enumerate() {
        if t.trim().is_empty() {
            return Err(EmbeddingError::EmptyText(i));
        }
    }
    Ok(())
}

/// Build the configured embedder.
pub fn build_embedder(cfg: &EmbedderConfig) -> Result<Box<dyn Embedder>, EmbeddingError> {
    cfg.validate()?;
    match cfg.kind {
        EmbedderKind::DeterministicHash => {
            Ok(Box::new(DeterministicHashEmbedder::new(cfg.dim)))
        }
        EmbedderKind::Remote => Ok(Box::new(RemoteEmbedder::from_config(cfg)?)),
    }
}

/// Embed `texts` with the configured backend. Convenience over
/// [`build_embedder`] for one-shot calls.
pub fn embed(texts: &[String], cfg: &EmbedderConfig) -> Result<Vec<EmbeddingVector>, EmbeddingError> {
    build_embedder(cfg)?.embed(texts)
}

// ---------------------------------------------------------------------------
// Deterministic hashing embedder
// ---------------------------------------------------------------------------

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Fully specified offline embedder: lowercase, split on non-alphanumeric,
/// FNV-1a 64-bit token hashing into `dim` buckets, token counts, L2 norm.
///
/// The exact recipe is frozen so fixtures are reproducible bit-for-bit
/// across implementations; a text with no tokens is an error.
#[derive(Debug, Clone)]
pub struct DeterministicHashEmbedder {
    dim: usize,
}

impl DeterministicHashEmbedder {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "dim must be positive");
        Self { dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn embed_one(&self, text: &str) -> Result<EmbeddingVector, EmbeddingError> {
        let mut counts = vec![0.0f64; self.dim];
        let lowered = text.to_lowercase();
        let mut any = false;
        for token in lowered.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()) {
            let bucket = (fnv1a64(token.as_bytes()) % self.dim as u64) as usize;
            counts[bucket] += 1.0;
            any = true;
        }
        if !any {
            return Err(EmbeddingError::NoTokens(text.to_string()));
        }
        EmbeddingVector::normalized(counts)
    }
}

impl Embedder for DeterministicHashEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbeddingError> {
        check_inputs(texts)?;
        texts.iter().map(|t| self.embed_one(t)).collect()
    }
}

// ---------------------------------------------------------------------------
// Remote endpoint embedder
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct RemoteEmbeddingItem {
    embedding: Vec<f64>,
}

#[derive(Deserialize)]
struct RemoteEmbeddingResponse {
    data: Vec<RemoteEmbeddingItem>,
}

/// Client for a JSON embedding endpoint:
/// POST `{"model": ..., "input": [texts]}` returning
/// `{"data": [{"embedding": [...]}, ...]}` in input order.
///
/// Vectors are re-normalized locally regardless of what the server returns.
pub struct RemoteEmbedder {
    endpoint: String,
    model_name: String,
    batch_size: usize,
    api_key: Option<String>,
    retry: RetryPolicy,
    client: reqwest::blocking::Client,
}

impl RemoteEmbedder {
    pub fn new(
        endpoint: impl Into<String>,
        model_name: impl Into<String>,
        batch_size: usize,
        api_key: Option<String>,
        retry: RetryPolicy,
    ) -> Self {
        Self {
            endpoint: endpoint.into(),
            model_name: model_name.into(),
            batch_size: batch_size.max(1),
            api_key,
            retry,
            client: reqwest::blocking::Client::new(),
        }
    }

    /// Build from config; the bearer token comes from `EMBED_API_KEY` when set.
    pub fn from_config(cfg: &EmbedderConfig) -> Result<Self, EmbeddingError> {
        let endpoint = cfg
            .endpoint
            .clone()
            .ok_or_else(|| EmbeddingError::InvalidConfig("remote embedder requires an endpoint".into()))?;
        Ok(Self::new(
            endpoint,
            cfg.model_name.clone().unwrap_or_else(|| "all-mpnet-base-v2".to_string()),
            cfg.batch_size,
            std::env::var(EMBED_API_KEY_VAR).ok(),
            RetryPolicy::default(),
        ))
    }

    fn post_batch(&self, batch: &[String]) -> Result<Vec<Vec<f64>>, EmbeddingError> {
        let body = json!({ "model": self.model_name, "input": batch });
        let outcome = run_with_retries(&self.retry, || {
            let mut req = self.client.post(&self.endpoint).json(&body);
            if let Some(key) = &self.api_key {
                req = req.bearer_auth(key);
            }
            match req.send() {
                Err(e) => Attempt::Retryable(e.to_string()),
                Ok(resp) => {
                    let status = resp.status();
                    if status.is_server_error() {
                        Attempt::Retryable(format!("server error {status}"))
                    } else if !status.is_success() {
                        Attempt::Fatal(format!("unexpected status {status}"))
                    } else {
                        match resp.json::<RemoteEmbeddingResponse>() {
                            Ok(parsed) => Attempt::Ok(parsed),
                            Err(e) => Attempt::Fatal(format!("undecodable body: {e}")),
                        }
                    }
                }
            }
        });
        let parsed = outcome.map_err(|(message, attempts)| EmbeddingError::BackendUnavailable {
            attempts,
            message,
        })?;
        if parsed.data.len() != batch.len() {
            return Err(EmbeddingError::BadResponse(format!(
                "expected {} embeddings, got {}",
                batch.len(),
                parsed.data.len()
            )));
        }
        Ok(parsed.data.into_iter().map(|d| d.embedding).collect())
    }
}

impl Embedder for RemoteEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbeddingError> {
        check_inputs(texts)?;
        let mut out = Vec::with_capacity(texts.len());
        let mut dim: Option<usize> = None;
        for batch in texts.chunks(self.batch_size) {
            for raw in self.post_batch(batch)? {
                match dim {
                    None => dim = Some(raw.len()),
                    Some(d) if d != raw.len() => {
                        return Err(EmbeddingError::DimensionMismatch { left: d, right: raw.len() })
                    }
                    _ => {}
                }
                out.push(EmbeddingVector::normalized(raw)?);
            }
        }
        Ok(out)
    }
}
