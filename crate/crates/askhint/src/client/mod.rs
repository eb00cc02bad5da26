//! Backend abstraction for chat and embedding calls.
//!
//! Everything upstream talks to [`VlmClient`]; behind it sit a live HTTP
//! chat-completions backend, a content-addressed response cache (with a
//! replay-only mode that never touches the network), a scripted oracle
//! answering from ground-truth labels for offline runs, and a seeded
//! hash-to-unit-sphere embedder.

mod cache;
mod hash_embed;
mod http;
mod key;
mod oracle;

pub use cache::{CachingClient, ReplayClient, ResponseCache};
pub use hash_embed::HashEmbedder;
pub use http::HttpBackend;
pub use key::CacheKey;
pub use oracle::{AnswerStyle, ScriptedOracle};

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compression::EmbeddingVector;

/// Decoding parameters; temperature defaults to 0 so repeated runs are
/// greedy and reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decoding {
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_max_tokens() -> u32 {
    512
}

impl Default for Decoding {
    fn default() -> Self {
        Decoding {
            temperature: 0.0,
            max_tokens: default_max_tokens(),
            seed: None,
        }
    }
}

/// One frame attachment: the source path (kept for provenance and for the
/// scripted oracle) and the encoded bytes that go over the wire.
#[derive(Debug, Clone)]
pub struct FramePayload {
    pub path: PathBuf,
    pub bytes: Vec<u8>,
}

impl FramePayload {
    pub fn digest(&self) -> String {
        key::sha256_hex(&self.bytes)
    }
}

/// A chat call: ordered frames first, then the prompt text.
#[derive(Debug, Clone)]
pub struct ChatRequest {
    pub model_id: String,
    pub frames: Vec<FramePayload>,
    pub prompt: String,
    pub decoding: Decoding,
}

impl ChatRequest {
    pub fn cache_key(&self) -> CacheKey {
        CacheKey::for_chat(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub text: String,
    /// Best-effort probability of the abnormal decision token, when the
    /// backend exposes token likelihoods. Absent means the confidence score
    /// rule degrades to binary.
    pub abnormal_likelihood: Option<f64>,
}

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("timeout after {attempts} attempts (key {key})")]
    Timeout { attempts: u32, key: String },
    #[error("backend returned HTTP {code} (key {key})")]
    HttpStatus { code: u16, key: String },
    #[error("malformed backend response: {msg} (key {key})")]
    MalformedResponse { msg: String, key: String },
    #[error("cache miss in replay mode (key {key})")]
    CacheMiss { key: String },
    #[error("scripted oracle knows no video for frame {0:?}")]
    UnknownVideo(String),
    #[error("cache I/O: {0}")]
    CacheIo(String),
    #[error("{0}")]
    Other(String),
}

/// Chat + embedding backend. Implementations must be shareable across the
/// batch runner's worker threads.
pub trait VlmClient: Send + Sync {
    fn chat(&self, request: &ChatRequest) -> Result<ChatResponse, ClientError>;
    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ClientError>;
}

impl<T: VlmClient + ?Sized> VlmClient for &T {
    fn chat(&self, request: &ChatRequest) -> Result<ChatResponse, ClientError> {
        (**self).chat(request)
    }
    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ClientError> {
        (**self).embed(texts)
    }
}

impl<T: VlmClient + ?Sized> VlmClient for std::sync::Arc<T> {
    fn chat(&self, request: &ChatRequest) -> Result<ChatResponse, ClientError> {
        (**self).chat(request)
    }
    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ClientError> {
        (**self).embed(texts)
    }
}

impl<T: VlmClient + ?Sized> VlmClient for Box<T> {
    fn chat(&self, request: &ChatRequest) -> Result<ChatResponse, ClientError> {
        (**self).chat(request)
    }
    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ClientError> {
        (**self).embed(texts)
    }
}
