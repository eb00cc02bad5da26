//! Live HTTP backend speaking the chat-completions JSON protocol.
//!
//! Frames are attached as base64 data URLs, ordered before the prompt text.
//! Transient failures (timeouts and 5xx) are retried with exponential
//! backoff; the final error carries the request's cache key for diagnosis.

use serde_json::{json, Value};

use crate::compression::EmbeddingVector;

use super::{ChatRequest, ChatResponse, ClientError, VlmClient};

#[derive(Debug, Clone)]
pub struct HttpBackend {
    pub chat_endpoint: String,
    pub embed_endpoint: Option<String>,
    pub api_key: Option<String>,
    pub embed_model_id: Option<String>,
    pub retries: u32,
    pub backoff_base_ms: u64,
    pub timeout_s: u64,
}

impl HttpBackend {
    pub fn new(chat_endpoint: impl Into<String>) -> HttpBackend {
        HttpBackend {
            chat_endpoint: chat_endpoint.into(),
            embed_endpoint: None,
            api_key: None,
            embed_model_id: None,
            retries: 3,
            backoff_base_ms: 1000,
            timeout_s: 120,
        }
    }

    fn agent(&self) -> Result<reqwest::blocking::Client, ClientError> {
        reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_secs(self.timeout_s))
            .build()
            .map_err(|e| ClientError::Other(format!("http client: {e}")))
    }

    /// POSTs `body`, retrying timeouts and 5xx with backoff. 4xx fails fast.
    fn post_with_retry(&self, url: &str, body: &Value, key: &str) -> Result<Value, ClientError> {
        let agent = self.agent()?;
        let attempts = self.retries.max(1);
        let mut last: Option<ClientError> = None;
        for attempt in 0..attempts {
            if attempt > 0 {
                let backoff = self.backoff_base_ms.saturating_mul(1 << (attempt - 1));
                std::thread::sleep(std::time::Duration::from_millis(backoff));
            }
            let mut request = agent.post(url).json(body);
            if let Some(token) = &self.api_key {
                request = request.bearer_auth(token);
            }
            match request.send() {
                Err(e) if e.is_timeout() => {
                    last = Some(ClientError::Timeout {
                        attempts: attempt + 1,
                        key: key.to_string(),
                    });
                }
                Err(e) => {
                    last = Some(ClientError::Other(format!("request failed: {e} (key {key})")));
                }
                Ok(response) => {
                    let status = response.status();
                    if status.is_success() {
                        return response.json::<Value>().map_err(|e| {
                            ClientError::MalformedResponse {
                                msg: format!("invalid JSON body: {e}"),
                                key: key.to_string(),
                            }
                        });
                    }
                    let err = ClientError::HttpStatus {
                        code: status.as_u16(),
                        key: key.to_string(),
                    };
                    if status.is_server_error() {
                        last = Some(err);
                    } else {
                        return Err(err);
                    }
                }
            }
        }
        Err(last.unwrap_or_else(|| ClientError::Other(format!("no attempts made (key {key})"))))
    }
}

/// Best-effort abnormal-token likelihood from an OpenAI-style logprobs
/// block: the first token that starts a decision word, exponentiated, and
/// complemented when the decision word is "normal".
fn abnormal_likelihood_from(choice: &Value) -> Option<f64> {
    let content = choice.get("logprobs")?.get("content")?.as_array()?;
    for entry in content.iter().take(8) {
        let token = entry.get("token")?.as_str()?.trim().to_lowercase();
        let logprob = entry.get("logprob")?.as_f64()?;
        let p = logprob.exp().clamp(0.0, 1.0);
        if token.starts_with("ab") {
            return Some(p);
        }
        if token.starts_with("norm") || token.starts_with("no") {
            return Some(1.0 - p);
        }
        if token.starts_with("yes") {
            return Some(p);
        }
    }
    None
}

impl VlmClient for HttpBackend {
    fn chat(&self, request: &ChatRequest) -> Result<ChatResponse, ClientError> {
        use base64_encode as b64;
        let key = request.cache_key().to_string();
        let mut content: Vec<Value> = request
            .frames
            .iter()
            .map(|frame| {
                json!({
                    "type": "image_url",
                    "image_url": {"url": format!("data:image/jpeg;base64,{}", b64(&frame.bytes))}
                })
            })
            .collect();
        content.push(json!({"type": "text", "text": request.prompt}));
        let mut body = json!({
            "model": request.model_id,
            "temperature": request.decoding.temperature,
            "max_tokens": request.decoding.max_tokens,
            "messages": [{"role": "user", "content": content}],
        });
        if let Some(seed) = request.decoding.seed {
            body["seed"] = json!(seed);
        }
        let value = self.post_with_retry(&self.chat_endpoint, &body, &key)?;
        let choice = value
            .get("choices")
            .and_then(|c| c.get(0))
            .ok_or_else(|| ClientError::MalformedResponse {
                msg: "response has no choices".into(),
                key: key.clone(),
            })?;
        let text = choice
            .get("message")
            .and_then(|m| m.get("content"))
            .and_then(|c| c.as_str())
            .ok_or_else(|| ClientError::MalformedResponse {
                msg: "choice has no message content".into(),
                key: key.clone(),
            })?
            .to_string();
        Ok(ChatResponse {
            text,
            abnormal_likelihood: abnormal_likelihood_from(choice),
        })
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ClientError> {
        assert!(!texts.is_empty(), "embed requires at least one text");
        let endpoint = self.embed_endpoint.as_ref().ok_or_else(|| {
            ClientError::Other("no embeddings endpoint configured".into())
        })?;
        let model = self.embed_model_id.clone().unwrap_or_else(|| "default".into());
        let key = super::CacheKey::for_embed(&model, texts).to_string();
        let body = json!({"model": model, "input": texts});
        let value = self.post_with_retry(endpoint, &body, &key)?;
        let data = value
            .get("data")
            .and_then(|d| d.as_array())
            .ok_or_else(|| ClientError::MalformedResponse {
                msg: "embeddings response has no data array".into(),
                key: key.clone(),
            })?;
        let mut indexed: Vec<(usize, EmbeddingVector)> = Vec::with_capacity(data.len());
        for (pos, item) in data.iter().enumerate() {
            let index = item.get("index").and_then(|i| i.as_u64()).unwrap_or(pos as u64) as usize;
            let values = item
                .get("embedding")
                .and_then(|e| e.as_array())
                .ok_or_else(|| ClientError::MalformedResponse {
                    msg: format!("embedding {pos} missing values"),
                    key: key.clone(),
                })?
                .iter()
                .map(|v| v.as_f64().unwrap_or(f64::NAN))
                .collect::<Vec<f64>>();
            indexed.push((index, EmbeddingVector::new(values)));
        }
        indexed.sort_by_key(|(i, _)| *i);
        if indexed.len() != texts.len() {
            return Err(ClientError::MalformedResponse {
                msg: format!("expected {} embeddings, got {}", texts.len(), indexed.len()),
                key,
            });
        }
        Ok(indexed.into_iter().map(|(_, v)| v).collect())
    }
}

/// Standard base64 (RFC 4648 with padding); small enough to keep local
/// rather than pulling a crate for one call site.
fn base64_encode(bytes: &[u8]) -> String {
    const TABLE: &[u8; 64] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    let mut out = String::with_capacity(bytes.len().div_ceil(3) * 4);
    for chunk in bytes.chunks(3) {
        let b = [chunk[0], *chunk.get(1).unwrap_or(&0), *chunk.get(2).unwrap_or(&0)];
        let n = u32::from(b[0]) << 16 | u32::from(b[1]) << 8 | u32::from(b[2]);
        out.push(TABLE[(n >> 18 & 0x3f) as usize] as char);
        out.push(TABLE[(n >> 12 & 0x3f) as usize] as char);
        out.push(if chunk.len() > 1 { TABLE[(n >> 6 & 0x3f) as usize] as char } else { '=' });
        out.push(if chunk.len() > 2 { TABLE[(n & 0x3f) as usize] as char } else { '=' });
    }
    out
}
