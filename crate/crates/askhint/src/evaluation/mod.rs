//! Metrics and experiment harnesses.

pub mod auc;
mod harness;
mod tables;

pub use auc::{compute_auc, mann_whitney_u, UStatistic};
pub use harness::{
    allocate_budget, run_class_label_any_yes, run_cross_class, run_cross_dataset,
    run_granularity_study, run_question_count_ablation, AblationRow, AblationSelection,
    CrossClassReport, GranularityRow, Summarizer, TransferReport, TransferSpec,
};
pub use tables::{ablation_csv, cross_class_csv, granularity_csv, transfer_csv};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::client::VlmClient;
use crate::error::{Error, Result};
use crate::inference::{run_batch, InferConfig, ParseStatus, PromptMode, PromptSet, Verdict};
use crate::manifest::{Label, Manifest};

/// Per-label video counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub normal: usize,
    pub abnormal: usize,
}

/// One evaluation run: AUC, per-label accuracies, failure accounting, the
/// configuration fingerprint, and every per-video verdict.
///
/// `auc` is video-level (one score per video). `frame_auc` is the
/// frame-level view obtained by repeating each video's score across its
/// stored frames; with constant per-video scores the two differ only in
/// how videos are weighted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub auc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_auc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crime_acc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normal_acc: Option<f64>,
    pub n_videos: LabelCounts,
    pub failed_parses: usize,
    pub config_fingerprint: String,
    pub per_video: Vec<Verdict>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned plain-text summary table.
    pub fn to_text_table(&self) -> String {
        tables::report_text_table(self)
    }
}

/// Fingerprint of everything that conditions a run's numbers: the prompt
/// set text, mode, model id, frame budget, decoding, score rule, frame
/// resize limit, and seed. Two reports are comparable iff these match.
pub fn config_fingerprint(
    set: &PromptSet,
    mode: &PromptMode,
    config: &InferConfig,
    seed: u64,
) -> String {
    let mut hasher = Sha256::new();
    hasher.update(b"fingerprint\0");
    hasher.update(set.canonical_text().as_bytes());
    hasher.update(b"\0mode\0");
    hasher.update(mode.to_config_string().as_bytes());
    hasher.update(b"\0model\0");
    hasher.update(config.model_id.as_bytes());
    hasher.update(b"\0frames\0");
    hasher.update(config.max_frames.to_le_bytes());
    hasher.update(b"\0temp\0");
    hasher.update(config.decoding.temperature.to_bits().to_le_bytes());
    hasher.update(config.decoding.max_tokens.to_le_bytes());
    if let Some(s) = config.decoding.seed {
        hasher.update(s.to_le_bytes());
    }
    hasher.update(b"\0rule\0");
    hasher.update(format!("{:?}", config.score_rule).as_bytes());
    hasher.update(b"\0edge\0");
    hasher.update(config.frame_max_edge.unwrap_or(0).to_le_bytes());
    hasher.update(b"\0seed\0");
    hasher.update(seed.to_le_bytes());
    hex::encode(hasher.finalize())
}

/// Crime accuracy (abnormal videos declared abnormal) and normal accuracy,
/// each absent when its label has no videos. Every manifest video must have
/// a verdict.
pub fn compute_accuracies(
    verdicts: &[Verdict],
    manifest: &Manifest,
) -> Result<(Option<f64>, Option<f64>)> {
    let by_id: std::collections::HashMap<&str, &Verdict> =
        verdicts.iter().map(|v| (v.video_id.as_str(), v)).collect();
    let mut crime = (0usize, 0usize);
    let mut normal = (0usize, 0usize);
    for record in &manifest.records {
        let verdict = by_id
            .get(record.video_id.as_str())
            .ok_or_else(|| Error::MissingVerdict(record.video_id.clone()))?;
        let said_abnormal = verdict.decision == crate::inference::Decision::Abnormal;
        match record.label {
            Label::Abnormal => {
                crime.1 += 1;
                if said_abnormal {
                    crime.0 += 1;
                }
            }
            Label::Normal => {
                normal.1 += 1;
                if !said_abnormal {
                    normal.0 += 1;
                }
            }
        }
    }
    let ratio = |(hits, total): (usize, usize)| {
        (total > 0).then(|| hits as f64 / total as f64)
    };
    Ok((ratio(crime), ratio(normal)))
}

/// Infers every manifest video, then scores: AUC over (score, label) with
/// normal=0 / abnormal=1, the two accuracies, and failure counts. Results
/// are ordered by manifest position, so output is independent of worker
/// completion order; with a warm cache the whole report is reproducible.
pub fn run_benchmark(
    client: &dyn VlmClient,
    manifest: &Manifest,
    mode: &PromptMode,
    set: &PromptSet,
    config: &InferConfig,
    seed: u64,
) -> Result<EvalReport> {
    assert!(!manifest.is_empty(), "manifest must be non-empty");
    let verdicts = run_batch(client, manifest, mode, set, config);
    report_from_verdicts(verdicts, manifest, set, mode, config, seed)
}

/// Scores pre-computed verdicts against a manifest (the `evaluate` path).
pub fn report_from_verdicts(
    verdicts: Vec<Verdict>,
    manifest: &Manifest,
    set: &PromptSet,
    mode: &PromptMode,
    config: &InferConfig,
    seed: u64,
) -> Result<EvalReport> {
    let by_id: std::collections::HashMap<&str, &Verdict> =
        verdicts.iter().map(|v| (v.video_id.as_str(), v)).collect();
    let mut scores = Vec::with_capacity(manifest.len());
    let mut labels = Vec::with_capacity(manifest.len());
    for record in &manifest.records {
        let verdict = by_id
            .get(record.video_id.as_str())
            .ok_or_else(|| Error::MissingVerdict(record.video_id.clone()))?;
        scores.push(verdict.score);
        labels.push(match record.label {
            Label::Abnormal => 1u8,
            Label::Normal => 0u8,
        });
    }
    let auc = match compute_auc(&scores, &labels) {
        Ok(v) => Some(v),
        Err(Error::DegenerateLabels) => None,
        Err(e) => return Err(e),
    };
    let frame_auc = if auc.is_some() {
        let mut frame_scores = Vec::new();
        let mut frame_labels = Vec::new();
        for (record, (&score, &label)) in
            manifest.records.iter().zip(scores.iter().zip(&labels))
        {
            frame_scores.extend(std::iter::repeat_n(score, record.frames.len()));
            frame_labels.extend(std::iter::repeat_n(label, record.frames.len()));
        }
        Some(compute_auc(&frame_scores, &frame_labels)?)
    } else {
        None
    };
    let (crime_acc, normal_acc) = compute_accuracies(&verdicts, manifest)?;
    let n_abnormal = labels.iter().filter(|&&l| l == 1).count();
    // Order per-video output by manifest position.
    let ordered: Vec<Verdict> = manifest
        .records
        .iter()
        .map(|r| (*by_id[r.video_id.as_str()]).clone())
        .collect();
    let failed_parses = ordered
        .iter()
        .filter(|v| v.parse_status == ParseStatus::Failed)
        .count();
    Ok(EvalReport {
        auc,
        frame_auc,
        crime_acc,
        normal_acc,
        n_videos: LabelCounts {
            normal: manifest.len() - n_abnormal,
            abnormal: n_abnormal,
        },
        failed_parses,
        config_fingerprint: config_fingerprint(set, mode, config, seed),
        per_video: ordered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::client::{AnswerStyle, ScriptedOracle};
    use crate::inference::Decision;

    fn synthetic(dir: &std::path::Path, n_normal: usize, n_abnormal: usize) -> Manifest {
        crate::testutil::synthetic_manifest(dir, n_normal, n_abnormal)
    }

    fn default_setup() -> (PromptSet, InferConfig) {
        (
            PromptSet::Compact(crate::presets::ucf_crime_qstar()),
            InferConfig { concurrency: 4, ..InferConfig::default() },
        )
    }

    #[test]
    fn perfect_oracle_gives_perfect_report() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = synthetic(dir.path(), 10, 10);
        let oracle = ScriptedOracle::new(&manifest, 0.0, 1, AnswerStyle::Fig5);
        let (set, config) = default_setup();
        let report =
            run_benchmark(&oracle, &manifest, &PromptMode::AskHint, &set, &config, 0).unwrap();
        assert_eq!(report.auc, Some(1.0));
        assert_eq!(report.crime_acc, Some(1.0));
        assert_eq!(report.normal_acc, Some(1.0));
        assert_eq!(report.failed_parses, 0);
        assert_eq!(report.n_videos.normal, 10);
        assert_eq!(report.n_videos.abnormal, 10);
    }

    #[test]
    fn uninformative_oracle_sits_at_half() {
        // flip_p = 0.5 gives AUC 0.5 in expectation; with a fixed seed the
        // empirical value stays within 3 sigma of 0.5 for n = 200.
        let dir = tempfile::tempdir().unwrap();
        let manifest = synthetic(dir.path(), 100, 100);
        let oracle = ScriptedOracle::new(&manifest, 0.5, 7, AnswerStyle::Fig5);
        let (set, config) = default_setup();
        let report =
            run_benchmark(&oracle, &manifest, &PromptMode::AskHint, &set, &config, 0).unwrap();
        let se = 0.5 * (0.5f64 * 0.5 * (1.0 / 100.0 + 1.0 / 100.0)).sqrt();
        assert!((report.auc.unwrap() - 0.5).abs() <= 3.0 * se);
    }

    #[test]
    fn flip_probability_binomial_expectation() {
        // Analytic: crime_acc ~ Binomial(n, 1-p)/n; check within 3 sigma.
        let dir = tempfile::tempdir().unwrap();
        let manifest = synthetic(dir.path(), 200, 200);
        let p = 0.15f64;
        let oracle = ScriptedOracle::new(&manifest, p, 3, AnswerStyle::Fig5);
        let (set, config) = default_setup();
        let report =
            run_benchmark(&oracle, &manifest, &PromptMode::AskHint, &set, &config, 0).unwrap();
        let sigma = (p * (1.0 - p) / 200.0).sqrt();
        assert!(
            (report.crime_acc.unwrap() - (1.0 - p)).abs() <= 3.0 * sigma,
            "crime_acc {} vs expected {}",
            report.crime_acc.unwrap(),
            1.0 - p
        );
    }

    #[test]
    fn accuracies_all_correct_and_missing_verdict() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = synthetic(dir.path(), 2, 2);
        let oracle = ScriptedOracle::new(&manifest, 0.0, 1, AnswerStyle::Fig5);
        let (set, config) = default_setup();
        let verdicts =
            crate::inference::run_batch(&oracle, &manifest, &PromptMode::AskHint, &set, &config);
        let (crime, normal) = compute_accuracies(&verdicts, &manifest).unwrap();
        assert_eq!((crime, normal), (Some(1.0), Some(1.0)));

        let missing = &verdicts[1..];
        assert!(matches!(
            compute_accuracies(missing, &manifest),
            Err(Error::MissingVerdict(_))
        ));
    }

    #[test]
    fn crime_acc_absent_without_abnormal_videos() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = synthetic(dir.path(), 3, 0);
        let oracle = ScriptedOracle::new(&manifest, 0.0, 1, AnswerStyle::Fig5);
        let (set, config) = default_setup();
        let report =
            run_benchmark(&oracle, &manifest, &PromptMode::AskHint, &set, &config, 0).unwrap();
        assert_eq!(report.crime_acc, None, "undefined, not zero");
        assert_eq!(report.auc, None, "AUC needs both labels");
        assert_eq!(report.normal_acc, Some(1.0));
    }

    #[test]
    fn fingerprint_changes_with_each_input() {
        let (set, config) = default_setup();
        let base = config_fingerprint(&set, &PromptMode::AskHint, &config, 0);

        let other_set = PromptSet::Compact(crate::presets::xd_violence_qstar());
        assert_ne!(base, config_fingerprint(&other_set, &PromptMode::AskHint, &config, 0));
        assert_ne!(base, config_fingerprint(&set, &PromptMode::Abstract, &config, 0));
        let mut c = config.clone();
        c.model_id = "other".into();
        assert_ne!(base, config_fingerprint(&set, &PromptMode::AskHint, &c, 0));
        let mut c = config.clone();
        c.max_frames = 64;
        assert_ne!(base, config_fingerprint(&set, &PromptMode::AskHint, &c, 0));
        assert_ne!(base, config_fingerprint(&set, &PromptMode::AskHint, &config, 1));
        // Unchanged inputs reproduce the fingerprint.
        assert_eq!(base, config_fingerprint(&set, &PromptMode::AskHint, &config, 0));
    }

    #[test]
    fn noisy_answers_still_score() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = synthetic(dir.path(), 5, 5);
        let oracle = ScriptedOracle::new(&manifest, 0.0, 1, AnswerStyle::Noisy);
        let (set, config) = default_setup();
        let report =
            run_benchmark(&oracle, &manifest, &PromptMode::AskHint, &set, &config, 0).unwrap();
        assert_eq!(report.auc, Some(1.0));
        for v in &report.per_video {
            assert_ne!(v.parse_status, ParseStatus::Failed);
        }
    }

    #[test]
    fn frame_level_auc_weights_videos_by_frame_count() {
        // Equal frame counts: frame-level equals video-level exactly.
        let dir = tempfile::tempdir().unwrap();
        let manifest = synthetic(dir.path(), 5, 5);
        let oracle = ScriptedOracle::new(&manifest, 0.25, 2, AnswerStyle::Fig5);
        let (set, config) = default_setup();
        let report =
            run_benchmark(&oracle, &manifest, &PromptMode::AskHint, &set, &config, 0).unwrap();
        assert_eq!(report.frame_auc, report.auc);

        // Unequal frame counts: frame-level view matches brute-force
        // expansion of (score x frame count).
        let mut manifest = synthetic(dir.path().join("b").as_path(), 2, 2);
        let extra = manifest.records[0].frames[0].clone();
        manifest.records[0].frames.extend(vec![extra; 7]);
        let oracle = ScriptedOracle::new(&manifest, 0.5, 9, AnswerStyle::Fig5);
        let report =
            run_benchmark(&oracle, &manifest, &PromptMode::AskHint, &set, &config, 0).unwrap();
        let mut scores = Vec::new();
        let mut labels = Vec::new();
        for (record, verdict) in manifest.records.iter().zip(&report.per_video) {
            for _ in 0..record.frames.len() {
                scores.push(verdict.score);
                labels.push(u8::from(record.label == crate::manifest::Label::Abnormal));
            }
        }
        let expected = compute_auc(&scores, &labels).unwrap();
        assert_eq!(report.frame_auc, Some(expected));
    }

    #[test]
    fn report_orders_by_manifest_not_completion() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = synthetic(dir.path(), 4, 4);
        let oracle = ScriptedOracle::new(&manifest, 0.0, 1, AnswerStyle::Fig5);
        let (set, config) = default_setup();
        let report =
            run_benchmark(&oracle, &manifest, &PromptMode::AskHint, &set, &config, 0).unwrap();
        let ids: Vec<&str> = report.per_video.iter().map(|v| v.video_id.as_str()).collect();
        let expected: Vec<&str> = manifest.records.iter().map(|r| r.video_id.as_str()).collect();
        assert_eq!(ids, expected);
        // Abnormal half decided abnormal.
        assert!(report.per_video[4..].iter().all(|v| v.decision == Decision::Abnormal));
    }
}
