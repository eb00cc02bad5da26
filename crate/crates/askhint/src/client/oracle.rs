//! Scripted oracle: answers from ground-truth labels with a configurable
//! flip probability, enabling analytic end-to-end checks (binary scores
//! against a flip-p oracle give AUC = 1 - p in expectation).

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::compression::EmbeddingVector;
use crate::inference::{render_answer_line, Decision};
use crate::manifest::{Label, Manifest};

use super::{ChatRequest, ChatResponse, ClientError, HashEmbedder, VlmClient};

/// Shape of the oracle's replies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnswerStyle {
    /// The canonical structured answer line.
    Fig5,
    /// Raw JSON with a `final_label` field (full-pool grammar).
    Json,
    /// The structured line buried in distractor prose, for parser-recovery
    /// exercises.
    Noisy,
}

impl std::str::FromStr for AnswerStyle {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<AnswerStyle, Self::Err> {
        match s.to_lowercase().as_str() {
            "fig5" | "structured" => Ok(AnswerStyle::Fig5),
            "json" => Ok(AnswerStyle::Json),
            "noisy" => Ok(AnswerStyle::Noisy),
            other => Err(crate::error::Error::Config(format!(
                "unknown oracle answer style {other:?}"
            ))),
        }
    }
}

struct VideoTruth {
    label: Label,
    class_name: String,
}

/// Test backend answering per ground truth, flipped independently per video
/// with probability `flip_p` by a seeded generator (stable across runs and
/// completion orders). Videos are recognized by their frame paths.
pub struct ScriptedOracle {
    frame_to_video: HashMap<String, String>,
    truth: HashMap<String, VideoTruth>,
    /// Maps a class to the group name used in abnormal answers; classes not
    /// present answer with their own name as the group.
    group_of_class: HashMap<String, String>,
    flip_p: f64,
    seed: u64,
    style: AnswerStyle,
    embedder: HashEmbedder,
}

impl ScriptedOracle {
    pub fn new(manifest: &Manifest, flip_p: f64, seed: u64, style: AnswerStyle) -> ScriptedOracle {
        assert!((0.0..=1.0).contains(&flip_p), "flip_p must be in [0, 1]");
        let mut frame_to_video = HashMap::new();
        let mut truth = HashMap::new();
        for record in &manifest.records {
            for frame in &record.frames {
                frame_to_video.insert(frame.clone(), record.video_id.clone());
            }
            truth.insert(
                record.video_id.clone(),
                VideoTruth {
                    label: record.label,
                    class_name: record.class_name.clone(),
                },
            );
        }
        ScriptedOracle {
            frame_to_video,
            truth,
            group_of_class: HashMap::new(),
            flip_p,
            seed,
            style,
            embedder: HashEmbedder::new(64, seed),
        }
    }

    /// Use a compact set's membership lists to answer with its group names.
    pub fn with_groups(mut self, set: &crate::compression::CompactPromptSet) -> ScriptedOracle {
        for group in &set.groups {
            for class in &group.member_classes {
                self.group_of_class
                    .insert(crate::pool::class_key(class), group.name.clone());
            }
        }
        self
    }

    pub fn with_embedder(mut self, embedder: HashEmbedder) -> ScriptedOracle {
        self.embedder = embedder;
        self
    }

    fn flip_for(&self, video_id: &str) -> bool {
        if self.flip_p <= 0.0 {
            return false;
        }
        if self.flip_p >= 1.0 {
            return true;
        }
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update(video_id.as_bytes());
        let digest: [u8; 32] = hasher.finalize().into();
        let mut rng = ChaCha20Rng::from_seed(digest);
        rng.random_range(0.0..1.0) < self.flip_p
    }

    fn answer_for(&self, video_id: &str) -> String {
        let truth = &self.truth[video_id];
        let mut abnormal = truth.label == Label::Abnormal;
        if self.flip_for(video_id) {
            abnormal = !abnormal;
        }
        let group = if abnormal {
            Some(
                self.group_of_class
                    .get(&crate::pool::class_key(&truth.class_name))
                    .cloned()
                    .unwrap_or_else(|| {
                        if truth.label == Label::Normal {
                            "Suspicious Activity".to_string()
                        } else {
                            truth.class_name.clone()
                        }
                    }),
            )
        } else {
            None
        };
        match self.style {
            AnswerStyle::Json => {
                if abnormal {
                    r#"{"final_label": "Yes"}"#.to_string()
                } else {
                    r#"{"final_label": "no"}"#.to_string()
                }
            }
            AnswerStyle::Fig5 => {
                if abnormal {
                    render_answer_line(
                        Decision::Abnormal,
                        group.as_deref(),
                        &format!("Scripted evidence consistent with {}.", truth.class_name),
                    )
                } else {
                    render_answer_line(Decision::Normal, None, "Routine activity, no incident.")
                }
            }
            AnswerStyle::Noisy => {
                let line = if abnormal {
                    render_answer_line(Decision::Abnormal, group.as_deref(), "Scripted evidence.")
                } else {
                    render_answer_line(Decision::Normal, None, "Scripted calm scene.")
                };
                format!(
                    "Let me walk through the frames first. The lighting and motion were considered carefully.\n{line}\nThat is my final call for video {video_id}."
                )
            }
        }
    }
}

impl VlmClient for ScriptedOracle {
    fn chat(&self, request: &ChatRequest) -> Result<ChatResponse, ClientError> {
        let first = request
            .frames
            .first()
            .ok_or_else(|| ClientError::Other("chat request has no frames".into()))?;
        let path = first.path.to_string_lossy().into_owned();
        let video_id = self
            .frame_to_video
            .get(&path)
            .ok_or(ClientError::UnknownVideo(path))?;
        Ok(ChatResponse {
            text: self.answer_for(video_id),
            abnormal_likelihood: None,
        })
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ClientError> {
        Ok(self.embedder.embed(texts))
    }
}
