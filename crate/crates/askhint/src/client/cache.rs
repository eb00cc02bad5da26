//! Directory-backed response cache, caching wrapper, and replay client.

use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::compression::EmbeddingVector;

use super::{CacheKey, ChatRequest, ChatResponse, ClientError, VlmClient};

#[derive(Debug, Serialize, Deserialize)]
struct CachedChat {
    key: String,
    model_id: String,
    prompt_sha256: String,
    response: ChatResponse,
}

#[derive(Debug, Serialize, Deserialize)]
struct CachedEmbed {
    key: String,
    model_id: String,
    vectors: Vec<Vec<f64>>,
}

/// One JSON file per digest under the cache directory. Reads are lock-free;
/// writes go through a temp file + rename behind a mutex.
#[derive(Debug)]
pub struct ResponseCache {
    dir: PathBuf,
    write_lock: Mutex<()>,
}

impl ResponseCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<ResponseCache, ClientError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)
            .map_err(|e| ClientError::CacheIo(format!("create {}: {e}", dir.display())))?;
        Ok(ResponseCache {
            dir,
            write_lock: Mutex::new(()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get_chat(&self, key: &CacheKey) -> Option<ChatResponse> {
        let text = std::fs::read_to_string(self.path_for(key)).ok()?;
        serde_json::from_str::<CachedChat>(&text).ok().map(|c| c.response)
    }

    pub fn put_chat(
        &self,
        key: &CacheKey,
        request: &ChatRequest,
        response: &ChatResponse,
    ) -> Result<(), ClientError> {
        let entry = CachedChat {
            key: key.to_string(),
            model_id: request.model_id.clone(),
            prompt_sha256: super::key::sha256_hex(request.prompt.as_bytes()),
            response: response.clone(),
        };
        self.write(key, &serde_json::to_vec_pretty(&entry).expect("serializable"))
    }

    pub fn get_embed(&self, key: &CacheKey) -> Option<Vec<EmbeddingVector>> {
        let text = std::fs::read_to_string(self.path_for(key)).ok()?;
        serde_json::from_str::<CachedEmbed>(&text)
            .ok()
            .map(|c| c.vectors.into_iter().map(EmbeddingVector::new).collect())
    }

    pub fn put_embed(
        &self,
        key: &CacheKey,
        model_id: &str,
        vectors: &[EmbeddingVector],
    ) -> Result<(), ClientError> {
        let entry = CachedEmbed {
            key: key.to_string(),
            model_id: model_id.to_string(),
            vectors: vectors.iter().map(|v| v.values.clone()).collect(),
        };
        self.write(key, &serde_json::to_vec_pretty(&entry).expect("serializable"))
    }

    fn write(&self, key: &CacheKey, bytes: &[u8]) -> Result<(), ClientError> {
        let _guard = self.write_lock.lock().expect("cache lock poisoned");
        let tmp = self.dir.join(format!("{key}.tmp"));
        let final_path = self.path_for(key);
        std::fs::write(&tmp, bytes)
            .and_then(|_| std::fs::rename(&tmp, &final_path))
            .map_err(|e| ClientError::CacheIo(format!("write {}: {e}", final_path.display())))
    }
}

/// Wraps any client with the cache: equal requests never trigger two live
/// calls within one cache directory.
pub struct CachingClient<C> {
    inner: C,
    cache: ResponseCache,
    model_id_for_embed: String,
}

impl<C: VlmClient> CachingClient<C> {
    pub fn new(inner: C, cache: ResponseCache, model_id_for_embed: impl Into<String>) -> Self {
        CachingClient {
            inner,
            cache,
            model_id_for_embed: model_id_for_embed.into(),
        }
    }

    pub fn cache(&self) -> &ResponseCache {
        &self.cache
    }
}

impl<C: VlmClient> VlmClient for CachingClient<C> {
    fn chat(&self, request: &ChatRequest) -> Result<ChatResponse, ClientError> {
        let key = request.cache_key();
        if let Some(hit) = self.cache.get_chat(&key) {
            return Ok(hit);
        }
        let response = self.inner.chat(request)?;
        self.cache.put_chat(&key, request, &response)?;
        Ok(response)
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ClientError> {
        let key = CacheKey::for_embed(&self.model_id_for_embed, texts);
        if let Some(hit) = self.cache.get_embed(&key) {
            return Ok(hit);
        }
        let vectors = self.inner.embed(texts)?;
        self.cache.put_embed(&key, &self.model_id_for_embed, &vectors)?;
        Ok(vectors)
    }
}

/// Cache-only client: a miss is an error, never a network call.
pub struct ReplayClient {
    cache: ResponseCache,
    model_id_for_embed: String,
}

impl ReplayClient {
    pub fn new(cache: ResponseCache, model_id_for_embed: impl Into<String>) -> Self {
        ReplayClient {
            cache,
            model_id_for_embed: model_id_for_embed.into(),
        }
    }
}

impl VlmClient for ReplayClient {
    fn chat(&self, request: &ChatRequest) -> Result<ChatResponse, ClientError> {
        let key = request.cache_key();
        self.cache
            .get_chat(&key)
            .ok_or(ClientError::CacheMiss { key: key.to_string() })
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ClientError> {
        let key = CacheKey::for_embed(&self.model_id_for_embed, texts);
        self.cache
            .get_embed(&key)
            .ok_or(ClientError::CacheMiss { key: key.to_string() })
    }
}
