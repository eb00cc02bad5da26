//! Constrained answer grammar: parse model replies into verdicts.
//!
//! The grammar pass matches the structured two-task answer lines
//! (`Normal Event. ...` / `Abnormal Event → Group. ...`; the arrow may be
//! `→`, `->`, `-` or `:` and matching is case-insensitive). Full-pool runs
//! instead carry a raw-JSON `final_label` field. When the grammar fails, a
//! recovery pass scans for decision keywords or a leading Yes/No; total
//! failure is encoded in the verdict, never thrown.

use serde::{Deserialize, Serialize};

use super::AnswerFormat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Normal,
    Abnormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParseStatus {
    Clean,
    Recovered,
    Failed,
}

/// Parsed model output for one video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub video_id: String,
    pub decision: Decision,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub rationale: String,
    pub score: f64,
    pub parse_status: ParseStatus,
    pub raw_text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prompt_hash: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_id: Option<String>,
}

impl Verdict {
    fn new(video_id: &str, raw_text: &str, decision: Decision, status: ParseStatus) -> Verdict {
        Verdict {
            video_id: video_id.to_string(),
            decision,
            group: None,
            rationale: String::new(),
            score: binary_score(decision),
            parse_status: status,
            raw_text: raw_text.to_string(),
            prompt_hash: None,
            model_id: None,
        }
    }
}

fn binary_score(decision: Decision) -> f64 {
    match decision {
        Decision::Normal => 0.0,
        Decision::Abnormal => 1.0,
    }
}

/// How a verdict maps onto an anomaly score in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreRule {
    #[default]
    Binary,
    Confidence,
}

impl std::str::FromStr for ScoreRule {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<ScoreRule, Self::Err> {
        match s.to_lowercase().as_str() {
            "binary" => Ok(ScoreRule::Binary),
            "confidence" => Ok(ScoreRule::Confidence),
            other => Err(crate::error::Error::Config(format!("unknown score rule {other:?}"))),
        }
    }
}

/// Binary rule: abnormal=1, normal=0 (failed parses are normal/0). The
/// confidence rule uses the backend's abnormal-token likelihood when
/// available and silently falls back to binary otherwise.
pub fn verdict_to_score(
    verdict: &Verdict,
    rule: ScoreRule,
    abnormal_likelihood: Option<f64>,
) -> f64 {
    match (rule, abnormal_likelihood) {
        (ScoreRule::Confidence, Some(p)) if verdict.parse_status != ParseStatus::Failed => {
            p.clamp(0.0, 1.0)
        }
        _ => binary_score(verdict.decision),
    }
}

/// Canonical structured answer line for a (decision, group, rationale)
/// triple; the scripted oracle emits these and round-trip tests rely on
/// `parse_verdict` inverting this exactly.
pub fn render_answer_line(decision: Decision, group: Option<&str>, rationale: &str) -> String {
    match decision {
        Decision::Normal => format!("Normal Event. {rationale}"),
        Decision::Abnormal => match group {
            Some(g) => format!("Abnormal Event → {g}. {rationale}"),
            None => format!("Abnormal Event. {rationale}"),
        },
    }
}

/// Parses one model reply. Never fails: the worst case is a verdict with
/// `parse_status: failed`, decision normal, score 0.
pub fn parse_verdict(video_id: &str, model_text: &str, format: AnswerFormat) -> Verdict {
    if let AnswerFormat::JsonLabel = format {
        if let Some(verdict) = parse_json_label(video_id, model_text) {
            return verdict;
        }
    }
    if let Some(verdict) = parse_structured(video_id, model_text) {
        return verdict;
    }
    if let Some(verdict) = recover(video_id, model_text) {
        return verdict;
    }
    Verdict::new(video_id, model_text, Decision::Normal, ParseStatus::Failed)
}

/// Full-pool raw JSON: `{"final_label": "Yes"|"no"}`, tolerant of
/// surrounding prose and case.
fn parse_json_label(video_id: &str, text: &str) -> Option<Verdict> {
    let start = text.find('{')?;
    let end = text.rfind('}')?;
    if end <= start {
        return None;
    }
    let value: serde_json::Value = serde_json::from_str(&text[start..=end]).ok()?;
    let label = value.get("final_label")?.as_str()?;
    let decision = match label.trim().to_lowercase().as_str() {
        "yes" => Decision::Abnormal,
        "no" => Decision::Normal,
        _ => return None,
    };
    Some(Verdict::new(video_id, text, decision, ParseStatus::Clean))
}

/// Leading markup a model tends to wrap answers in.
fn strip_leading_markup(s: &str) -> &str {
    s.trim_start_matches(|c: char| {
        c.is_whitespace() || matches!(c, '*' | '#' | '>' | '-' | '"' | '\'' | '`' | '[' | '•')
    })
}

fn parse_structured(video_id: &str, text: &str) -> Option<Verdict> {
    let stripped = strip_leading_markup(text);
    let lower = stripped.to_lowercase();
    if lower.starts_with("normal event") {
        let rest = stripped["normal event".len()..]
            .trim_start_matches(['.', ':', ',', '!', '→', ' '])
            .trim_start_matches("->")
            .trim();
        let mut v = Verdict::new(video_id, text, Decision::Normal, ParseStatus::Clean);
        v.rationale = rest.trim_matches(['*', '"']).trim().to_string();
        return Some(v);
    }
    if lower.starts_with("abnormal event") {
        let rest = &stripped["abnormal event".len()..];
        let (group, rationale) = split_group_and_rationale(rest);
        let mut v = Verdict::new(video_id, text, Decision::Abnormal, ParseStatus::Clean);
        v.group = group;
        v.rationale = rationale;
        return Some(v);
    }
    None
}

/// After "Abnormal Event": an optional arrow and group up to the first
/// sentence break, then the rationale.
fn split_group_and_rationale(rest: &str) -> (Option<String>, String) {
    let mut s = rest.trim_start();
    let mut had_arrow = false;
    for arrow in ["→", "->", "–", "-", ":"] {
        if let Some(tail) = s.strip_prefix(arrow) {
            s = tail.trim_start();
            had_arrow = true;
            break;
        }
    }
    if !had_arrow {
        // "Abnormal Event. rationale" — no group given.
        let rationale = s
            .trim_start_matches(['.', ',', '!'])
            .trim()
            .trim_matches(['*', '"'])
            .trim()
            .to_string();
        return (None, rationale);
    }
    let (group_part, rationale) = match s.find(['.', '\n']) {
        Some(pos) => (&s[..pos], s[pos + 1..].trim()),
        None => (s, ""),
    };
    let group = group_part
        .trim()
        .trim_matches(['*', '[', ']', '"', '\''])
        .trim()
        .to_string();
    let group = (!group.is_empty()).then_some(group);
    (
        group,
        rationale.trim_matches(['*', '"']).trim().to_string(),
    )
}

/// Keyword scan: the first occurrence of "abnormal" or a standalone
/// "normal" decides; failing that, a leading Yes/No (the abstract and
/// class-label prompts ask for Yes-if-anomalous answers).
fn recover(video_id: &str, text: &str) -> Option<Verdict> {
    let lower = text.to_lowercase();
    let abnormal_pos = lower.find("abnormal");
    let normal_pos = find_standalone_normal(&lower);
    let decision = match (abnormal_pos, normal_pos) {
        (Some(a), Some(n)) => Some(if a <= n { Decision::Abnormal } else { Decision::Normal }),
        (Some(_), None) => Some(Decision::Abnormal),
        (None, Some(_)) => Some(Decision::Normal),
        (None, None) => leading_yes_no(&lower),
    }?;
    Some(Verdict::new(video_id, text, decision, ParseStatus::Recovered))
}

/// First "normal" not embedded in "abnormal".
fn find_standalone_normal(lower: &str) -> Option<usize> {
    let mut from = 0;
    while let Some(rel) = lower[from..].find("normal") {
        let pos = from + rel;
        let preceded_by_ab = pos >= 2 && &lower[pos - 2..pos] == "ab";
        if !preceded_by_ab {
            return Some(pos);
        }
        from = pos + "normal".len();
    }
    None
}

fn leading_yes_no(lower: &str) -> Option<Decision> {
    let s = strip_leading_markup(lower);
    let boundary_ok = |rest: &str| {
        rest.chars().next().is_none_or(|c| !c.is_alphanumeric())
    };
    if let Some(rest) = s.strip_prefix("yes") {
        if boundary_ok(rest) {
            return Some(Decision::Abnormal);
        }
    }
    if let Some(rest) = s.strip_prefix("no") {
        if boundary_ok(rest) {
            return Some(Decision::Normal);
        }
    }
    None
}
