//! Run configuration: one JSON file with environment-variable interpolation
//! for secrets; CLI flags override file values.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::client::{
    AnswerStyle, CachingClient, HashEmbedder, HttpBackend, ReplayClient, ResponseCache,
    ScriptedOracle, VlmClient,
};
use crate::compression::Linkage;
use crate::error::{Error, Result};
use crate::inference::{InferConfig, ScoreRule, WindowCfg};
use crate::manifest::Manifest;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendConfig {
    /// Chat-completions-style HTTP backend.
    Http {
        chat_endpoint: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        embed_endpoint: Option<String>,
        model_id: String,
        /// Name of the environment variable holding the bearer token.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        api_key_env: Option<String>,
        #[serde(default = "default_retries")]
        retries: u32,
        #[serde(default = "default_backoff_ms")]
        backoff_base_ms: u64,
        #[serde(default = "default_timeout_s")]
        timeout_s: u64,
    },
    /// Serve everything from the response cache; misses are errors.
    Replay { model_id: String },
    /// Scripted oracle over the manifest's ground-truth labels.
    Oracle {
        #[serde(default)]
        flip_p: f64,
        #[serde(default)]
        style: Option<String>,
        #[serde(default = "default_model_id")]
        model_id: String,
    },
}

fn default_retries() -> u32 {
    3
}

fn default_backoff_ms() -> u64 {
    1000
}

fn default_timeout_s() -> u64 {
    120
}

fn default_model_id() -> String {
    "scripted-oracle".into()
}

impl BackendConfig {
    pub fn model_id(&self) -> &str {
        match self {
            BackendConfig::Http { model_id, .. } => model_id,
            BackendConfig::Replay { model_id } => model_id,
            BackendConfig::Oracle { model_id, .. } => model_id,
        }
    }
}

/// Semantic-compression knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionCfg {
    /// `vlm` (meta-prompt + parse) or `embedding` (cosine + clustering).
    #[serde(default = "default_compress_mode")]
    pub mode: String,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_linkage")]
    pub linkage: String,
    /// Questions per group in embedding mode.
    #[serde(default = "default_per_group")]
    pub per_group: usize,
    /// Reject groups outside 2-3 questions when parsing model output.
    #[serde(default = "default_strict")]
    pub strict: bool,
}

fn default_compress_mode() -> String {
    "embedding".into()
}

fn default_k() -> usize {
    3
}

fn default_linkage() -> String {
    "average".into()
}

fn default_per_group() -> usize {
    2
}

fn default_strict() -> bool {
    true
}

impl Default for CompressionCfg {
    fn default() -> Self {
        CompressionCfg {
            mode: default_compress_mode(),
            k: default_k(),
            linkage: default_linkage(),
            per_group: default_per_group(),
            strict: default_strict(),
        }
    }
}

impl CompressionCfg {
    pub fn linkage(&self) -> Result<Linkage> {
        self.linkage.parse()
    }
}

/// The one run configuration object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub backend: BackendConfig,
    #[serde(default = "default_max_frames")]
    pub max_frames: usize,
    #[serde(default = "default_mode")]
    pub mode: String,
    /// Prompt-set path or preset name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_set: Option<String>,
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub score_rule: ScoreRule,
    #[serde(default)]
    pub decoding: crate::client::Decoding,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_max_edge: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowCfg>,
    #[serde(default = "default_embed_dim")]
    pub embed_dim: usize,
    #[serde(default)]
    pub compression: CompressionCfg,
}

fn default_max_frames() -> usize {
    128
}

fn default_mode() -> String {
    "askhint".into()
}

fn default_concurrency() -> usize {
    4
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("runs")
}

fn default_embed_dim() -> usize {
    64
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            backend: BackendConfig::Oracle {
                flip_p: 0.0,
                style: None,
                model_id: default_model_id(),
            },
            max_frames: default_max_frames(),
            mode: default_mode(),
            prompt_set: None,
            concurrency: default_concurrency(),
            seed: 0,
            cache_dir: None,
            out_dir: default_out_dir(),
            score_rule: ScoreRule::Binary,
            decoding: crate::client::Decoding::default(),
            frame_max_edge: None,
            window: None,
            embed_dim: default_embed_dim(),
            compression: CompressionCfg::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("read config {}", path.display()), e))?;
        RunConfig::parse(&text)
    }

    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("invalid config JSON: {e}")))?;
        interpolate_env(&mut value)?;
        serde_json::from_value(value).map_err(|e| Error::Config(format!("bad config: {e}")))
    }

    pub fn infer_config(&self) -> Result<InferConfig> {
        if self.max_frames < 1 {
            return Err(Error::Config("max_frames must be >= 1".into()));
        }
        Ok(InferConfig {
            model_id: self.backend.model_id().to_string(),
            max_frames: self.max_frames,
            decoding: self.decoding.clone(),
            score_rule: self.score_rule,
            concurrency: self.concurrency,
            frame_max_edge: self.frame_max_edge,
            window: self.window,
        })
    }

    pub fn embedder(&self) -> HashEmbedder {
        HashEmbedder::new(self.embed_dim, self.seed)
    }

    /// Builds the configured client. The oracle needs the manifest for its
    /// ground truth; a caching layer wraps any backend when `cache_dir` is
    /// set (replay requires it).
    pub fn build_client(&self, manifest: Option<&Manifest>) -> Result<Box<dyn VlmClient>> {
        let model_id = self.backend.model_id().to_string();
        match &self.backend {
            BackendConfig::Http {
                chat_endpoint,
                embed_endpoint,
                api_key_env,
                retries,
                backoff_base_ms,
                timeout_s,
                ..
            } => {
                let api_key = match api_key_env {
                    None => None,
                    Some(var) => Some(std::env::var(var).map_err(|_| {
                        Error::Config(format!("environment variable {var} is not set"))
                    })?),
                };
                let backend = HttpBackend {
                    chat_endpoint: chat_endpoint.clone(),
                    embed_endpoint: embed_endpoint.clone(),
                    api_key,
                    embed_model_id: Some(model_id.clone()),
                    retries: *retries,
                    backoff_base_ms: *backoff_base_ms,
                    timeout_s: *timeout_s,
                };
                self.maybe_cache(Box::new(backend), &model_id)
            }
            BackendConfig::Replay { .. } => {
                let dir = self.cache_dir.as_ref().ok_or_else(|| {
                    Error::Config("replay backend requires cache_dir".into())
                })?;
                Ok(Box::new(ReplayClient::new(ResponseCache::open(dir)?, model_id)))
            }
            BackendConfig::Oracle { flip_p, style, .. } => {
                let manifest = manifest.ok_or_else(|| {
                    Error::Config("oracle backend requires a manifest".into())
                })?;
                let style = match style.as_deref() {
                    None => AnswerStyle::Fig5,
                    Some(s) => s.parse()?,
                };
                let oracle = ScriptedOracle::new(manifest, *flip_p, self.seed, style)
                    .with_embedder(self.embedder());
                self.maybe_cache(Box::new(oracle), &model_id)
            }
        }
    }

    fn maybe_cache(
        &self,
        client: Box<dyn VlmClient>,
        model_id: &str,
    ) -> Result<Box<dyn VlmClient>> {
        match &self.cache_dir {
            None => Ok(client),
            Some(dir) => Ok(Box::new(CachingClient::new(
                client,
                ResponseCache::open(dir)?,
                model_id,
            ))),
        }
    }
}

/// Replaces `${VAR}` in every string value with the environment variable's
/// content; an unset variable is a config error.
fn interpolate_env(value: &mut serde_json::Value) -> Result<()> {
    match value {
        serde_json::Value::String(s) => {
            if let Some(interpolated) = interpolate_one(s)? {
                *s = interpolated;
            }
            Ok(())
        }
        serde_json::Value::Array(items) => items.iter_mut().try_for_each(interpolate_env),
        serde_json::Value::Object(map) => map.values_mut().try_for_each(interpolate_env),
        _ => Ok(()),
    }
}

fn interpolate_one(s: &str) -> Result<Option<String>> {
    if !s.contains("${") {
        return Ok(None);
    }
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(start) = rest.find("${") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        let end = after
            .find('}')
            .ok_or_else(|| Error::Config(format!("unterminated ${{...}} in {s:?}")))?;
        let var = &after[..end];
        let value = std::env::var(var)
            .map_err(|_| Error::Config(format!("environment variable {var} is not set")))?;
        out.push_str(&value);
        rest = &after[end + 1..];
    }
    out.push_str(rest);
    Ok(Some(out))
}
