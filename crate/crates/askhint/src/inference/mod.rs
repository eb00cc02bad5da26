//! Structured inference: frame sampling, prompt rendering, model invocation
//! and verdict parsing, batched over a manifest with bounded concurrency.

mod frames;
mod prompt;
mod verdict;

pub use frames::{sample_frame_indices, sample_frames, window_frame_ranges, WindowCfg};
pub use prompt::{
    fine_grained_set_for_class, render_abstract_prompt, render_askhint_prompt,
    render_class_label_prompt, render_inference_prompt,
};
pub use verdict::{
    parse_verdict, render_answer_line, verdict_to_score, Decision, ParseStatus, ScoreRule, Verdict,
};

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::client::{ChatRequest, Decoding, FramePayload, VlmClient};
use crate::compression::CompactPromptSet;
use crate::error::{Error, Result};
use crate::manifest::{Manifest, VideoRecord};
use crate::pool::PromptPool;

/// Prompting strategy. `class_label` carries exactly one target class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "target")]
pub enum PromptMode {
    AskHint,
    Abstract,
    ClassLabel { target: String },
    FullPool,
}

impl PromptMode {
    pub fn name(&self) -> &'static str {
        match self {
            PromptMode::AskHint => "askhint",
            PromptMode::Abstract => "abstract",
            PromptMode::ClassLabel { .. } => "class_label",
            PromptMode::FullPool => "full_pool",
        }
    }

    /// Wire form used in configs and CLI flags: `askhint`, `abstract`,
    /// `full_pool`, `class_label:<Target>`.
    pub fn parse(s: &str) -> Result<PromptMode> {
        let lower = s.trim().to_lowercase();
        match lower.as_str() {
            "askhint" => Ok(PromptMode::AskHint),
            "abstract" => Ok(PromptMode::Abstract),
            "full_pool" | "fullpool" => Ok(PromptMode::FullPool),
            _ => {
                if let Some(target) = s.trim().strip_prefix("class_label:") {
                    let target = target.trim();
                    if target.is_empty() {
                        return Err(Error::Config("class_label needs a target class".into()));
                    }
                    return Ok(PromptMode::ClassLabel { target: target.to_string() });
                }
                Err(Error::Config(format!("unknown prompt mode {s:?}")))
            }
        }
    }

    pub fn answer_format(&self) -> AnswerFormat {
        match self {
            PromptMode::FullPool => AnswerFormat::JsonLabel,
            _ => AnswerFormat::Structured,
        }
    }

    pub fn to_config_string(&self) -> String {
        match self {
            PromptMode::ClassLabel { target } => format!("class_label:{target}"),
            other => other.name().to_string(),
        }
    }
}

/// Which answer grammar to expect from the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnswerFormat {
    Structured,
    JsonLabel,
}

/// The prompt material an inference run carries: a compact grouped set or a
/// full class-wise pool.
#[derive(Debug, Clone, PartialEq)]
pub enum PromptSet {
    Compact(CompactPromptSet),
    Pool(PromptPool),
}

impl PromptSet {
    pub fn kind(&self) -> &'static str {
        match self {
            PromptSet::Compact(_) => "compact",
            PromptSet::Pool(_) => "pool",
        }
    }

    /// Canonical serialization, used in config fingerprints.
    pub fn canonical_text(&self) -> String {
        match self {
            PromptSet::Compact(set) => {
                crate::compression::save_compact_set(set).unwrap_or_default()
            }
            PromptSet::Pool(pool) => crate::pool::save_pool(pool).unwrap_or_default(),
        }
    }
}

/// Per-run inference knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferConfig {
    pub model_id: String,
    #[serde(default = "default_max_frames")]
    pub max_frames: usize,
    #[serde(default)]
    pub decoding: Decoding,
    #[serde(default)]
    pub score_rule: ScoreRule,
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    /// Resize frames so their longest edge is at most this many pixels
    /// before encoding; `None` sends the stored bytes untouched.
    #[serde(default)]
    pub frame_max_edge: Option<u32>,
    #[serde(default)]
    pub window: Option<WindowCfg>,
}

fn default_max_frames() -> usize {
    128
}

fn default_concurrency() -> usize {
    4
}

impl Default for InferConfig {
    fn default() -> Self {
        InferConfig {
            model_id: "default-model".into(),
            max_frames: default_max_frames(),
            decoding: Decoding::default(),
            score_rule: ScoreRule::Binary,
            concurrency: default_concurrency(),
            frame_max_edge: None,
            window: None,
        }
    }
}

/// Reads one frame file; when `max_edge` is set and the bytes decode as an
/// image, downscales so the longest edge fits and re-encodes as JPEG.
/// Non-decodable bytes pass through untouched.
fn load_frame(path: &str, max_edge: Option<u32>) -> Result<FramePayload> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(format!("read frame {path}"), e))?;
    let bytes = match max_edge {
        None => bytes,
        Some(limit) => match image::load_from_memory(&bytes) {
            Ok(img) if img.width().max(img.height()) > limit => {
                let resized = img.resize(limit, limit, image::imageops::FilterType::Triangle);
                let mut out = std::io::Cursor::new(Vec::new());
                resized
                    .write_to(&mut out, image::ImageFormat::Jpeg)
                    .map(|_| out.into_inner())
                    .unwrap_or(bytes)
            }
            _ => bytes,
        },
    };
    Ok(FramePayload { path: path.into(), bytes })
}

fn chat_once(
    client: &dyn VlmClient,
    record: &VideoRecord,
    frame_paths: &[String],
    prompt: &str,
    format: AnswerFormat,
    config: &InferConfig,
) -> Result<(Verdict, String)> {
    let mut frames = Vec::with_capacity(frame_paths.len());
    for path in frame_paths {
        frames.push(load_frame(path, config.frame_max_edge)?);
    }
    let request = ChatRequest {
        model_id: config.model_id.clone(),
        frames,
        prompt: prompt.to_string(),
        decoding: config.decoding.clone(),
    };
    let prompt_hash = crate::client::CacheKey::for_chat(&request).to_string();
    let response = client.chat(&request).map_err(|e| Error::Backend {
        video_id: record.video_id.clone(),
        cause: e.to_string(),
    })?;
    let mut verdict = parse_verdict(&record.video_id, &response.text, format);
    verdict.score = verdict_to_score(&verdict, config.score_rule, response.abnormal_likelihood);
    Ok((verdict, prompt_hash))
}

/// Runs one video end to end: sample frames, render the prompt, call the
/// model, parse, score. Under windowing, each window is inferred separately
/// and scores are max-pooled.
pub fn infer_video(
    client: &dyn VlmClient,
    record: &VideoRecord,
    mode: &PromptMode,
    set: &PromptSet,
    config: &InferConfig,
) -> Result<Verdict> {
    let prompt = render_inference_prompt(mode, set)?;
    let windows: Vec<Vec<String>> = match &config.window {
        None => vec![sample_frames(record, config.max_frames)],
        Some(cfg) => window_frame_ranges(record, cfg)
            .into_iter()
            .map(|range| {
                let slice = &record.frames[range];
                let indices = sample_frame_indices(
                    slice.len(),
                    record.fps_native,
                    None,
                    config.max_frames,
                );
                indices.into_iter().map(|i| slice[i].clone()).collect()
            })
            .collect(),
    };

    let mut best: Option<Verdict> = None;
    let mut prompt_hash = String::new();
    for frame_paths in &windows {
        let (verdict, hash) =
            chat_once(client, record, frame_paths, &prompt, mode.answer_format(), config)?;
        prompt_hash = hash;
        let replace = match &best {
            None => true,
            // Max-pool: strictly higher score wins; first window wins ties.
            Some(current) => verdict.score > current.score,
        };
        if replace {
            best = Some(verdict);
        }
    }
    let mut verdict = best.expect("at least one window");
    verdict.prompt_hash = Some(prompt_hash);
    verdict.model_id = Some(config.model_id.clone());
    Ok(verdict)
}

/// Placeholder verdict for a video whose backend call failed after retries:
/// decision normal, score 0, `parse_status: failed`, error recorded in the
/// raw text. Keeps the batch going and the failure visible.
pub fn failed_verdict(video_id: &str, cause: &str, config: &InferConfig) -> Verdict {
    Verdict {
        video_id: video_id.to_string(),
        decision: Decision::Normal,
        group: None,
        rationale: String::new(),
        score: 0.0,
        parse_status: ParseStatus::Failed,
        raw_text: format!("<backend error: {cause}>"),
        prompt_hash: None,
        model_id: Some(config.model_id.clone()),
    }
}

/// Fans the manifest out over `config.concurrency` workers and re-orders
/// results by manifest position, so output is independent of completion
/// order. Backend failures become [`failed_verdict`] entries.
pub fn run_batch(
    client: &dyn VlmClient,
    manifest: &Manifest,
    mode: &PromptMode,
    set: &PromptSet,
    config: &InferConfig,
) -> Vec<Verdict> {
    let n = manifest.records.len();
    let results: Mutex<Vec<Option<Verdict>>> = Mutex::new(vec![None; n]);
    let next: AtomicUsize = AtomicUsize::new(0);
    let workers = config.concurrency.max(1).min(n.max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::SeqCst);
                if idx >= n {
                    break;
                }
                let record = &manifest.records[idx];
                let verdict = match infer_video(client, record, mode, set, config) {
                    Ok(v) => v,
                    Err(e) => {
                        eprintln!("[warn] video {}: {e}", record.video_id);
                        failed_verdict(&record.video_id, &e.to_string(), config)
                    }
                };
                results.lock().expect("results lock")[idx] = Some(verdict);
            });
        }
    });

    results
        .into_inner()
        .expect("results lock")
        .into_iter()
        .map(|v| v.expect("every index filled"))
        .collect()
}

/// Serializes verdicts as JSON-lines, one object per video, in input order.
pub fn verdicts_to_jsonl(verdicts: &[Verdict]) -> String {
    let mut out = String::new();
    for v in verdicts {
        out.push_str(&serde_json::to_string(v).expect("verdict serializes"));
        out.push('\n');
    }
    out
}

/// Parses a verdicts JSONL file.
pub fn verdicts_from_jsonl(text: &str) -> Result<Vec<Verdict>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v: Verdict = serde_json::from_str(line).map_err(|e| Error::Manifest {
            line: idx + 1,
            msg: format!("bad verdict line: {e}"),
        })?;
        out.push(v);
    }
    Ok(out)
}

/// Convenience used by tests and the path that writes files.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| Error::io(format!("create {}", parent.display()), e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(format!("write {}", path.display()), e))
}
