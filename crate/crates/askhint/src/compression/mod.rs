//! Semantic compression of the class-wise pool into a compact grouped set.
//!
//! Two paths produce a [`CompactPromptSet`]: a model-guided one (render the
//! summarize-and-group meta-prompt, parse the reply) and a deterministic
//! embedding one (cosine similarity over average class embeddings,
//! agglomerative clustering, centroid-nearest question selection). A seeded
//! random-subset selector provides the ablation baseline.

mod cluster;
mod embed;
mod similarity;

pub use cluster::{
    agglomerative_cluster, cophenetic_matrix, Dendrogram, Linkage, MergeStep, StopRule,
};
pub use embed::{average_class_embedding, EmbeddingVector};
pub use similarity::{cosine_similarity_matrix, ClassSimilarityMatrix};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pool::{normalize_question_text, GuidingQuestion, PromptPool};

/// How a compact set came to be; summarized sets carry the 2-3 questions
/// per group contract, other origins permit any positive count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    VlmSummarized,
    RandomSubset,
    Preset,
    Manual,
}

impl Origin {
    fn as_str(&self) -> &'static str {
        match self {
            Origin::VlmSummarized => "vlm_summarized",
            Origin::RandomSubset => "random_subset",
            Origin::Preset => "preset",
            Origin::Manual => "manual",
        }
    }

    fn from_str(s: &str) -> Option<Origin> {
        match s.trim() {
            "vlm_summarized" => Some(Origin::VlmSummarized),
            "random_subset" => Some(Origin::RandomSubset),
            "preset" => Some(Origin::Preset),
            "manual" => Some(Origin::Manual),
            _ => None,
        }
    }
}

/// A named semantic group: the classes it covers and its guiding questions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptGroup {
    pub name: String,
    #[serde(default)]
    pub member_classes: Vec<String>,
    pub questions: Vec<GuidingQuestion>,
}

/// The compact grouped question set used at inference time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompactPromptSet {
    pub groups: Vec<PromptGroup>,
    pub origin: Origin,
}

impl CompactPromptSet {
    pub fn total_questions(&self) -> usize {
        self.groups.iter().map(|g| g.questions.len()).sum()
    }

    pub fn group_names(&self) -> impl Iterator<Item = &str> {
        self.groups.iter().map(|g| g.name.as_str())
    }

    /// Enforces the per-origin group-size contract.
    pub fn validate(&self) -> Result<()> {
        if self.groups.is_empty() {
            return Err(Error::NoGroupsFound);
        }
        for group in &self.groups {
            let count = group.questions.len();
            let ok = match self.origin {
                Origin::VlmSummarized => (2..=3).contains(&count),
                _ => count >= 1,
            };
            if !ok {
                return Err(Error::GroupSizeViolation {
                    group: group.name.clone(),
                    count,
                });
            }
        }
        Ok(())
    }
}

/// Renders the summarize-and-group meta-prompt over an existing pool: every
/// class block with its questions, the clustering/summarizing instructions,
/// and the grouped output skeleton.
pub fn render_compression_metaprompt(pool: &PromptPool) -> String {
    render_compression_metaprompt_with_budget(pool, None)
}

/// As [`render_compression_metaprompt`] but demanding an exact total
/// question count, used by the question-count ablation.
pub fn render_compression_metaprompt_with_budget(
    pool: &PromptPool,
    total_budget: Option<usize>,
) -> String {
    let mut out = String::new();
    out.push_str("You are an expert in video anomaly detection using Vision-Language Models.\n\n");
    out.push_str("Class-specific guiding questions:\n\n");
    for entry in &pool.entries {
        out.push_str(&format!("{}:\n", entry.class));
        for (qi, q) in entry.questions.iter().enumerate() {
            out.push_str(&format!("{}. {}\n", qi + 1, q.text));
        }
        out.push('\n');
    }
    out.push_str(&crate::pool::compression_instructions_with_budget(total_budget));
    out
}

/// Group-size handling for [`parse_compact_set`]: `Strict` rejects groups
/// outside 2-3 questions, `Lenient` keeps what it can (truncating oversized
/// groups to their first three questions).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    #[default]
    Strict,
    Lenient,
}

/// Parses a model's grouped-questions reply into a compact set.
///
/// Recognized group headers: `Group N: Name`, `## Name`, or a bold
/// `**Name**` line; collection stops at a `Summary:` line. Questions are
/// normalized exactly as pool questions are.
pub fn parse_compact_set(model_text: &str, mode: ParseMode) -> Result<CompactPromptSet> {
    assert!(!model_text.is_empty(), "model text must be non-empty");
    let mut groups: Vec<PromptGroup> = Vec::new();
    for line in model_text.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let plain = trimmed.trim_matches(['*', '#', ' ']).trim();
        if plain.to_lowercase().starts_with("summary:") {
            break;
        }
        if let Some(name) = group_header(trimmed) {
            groups.push(PromptGroup {
                name,
                member_classes: Vec::new(),
                questions: Vec::new(),
            });
            continue;
        }
        let Some(group) = groups.last_mut() else {
            continue; // preamble before the first group
        };
        if let Some(classes) = plain.strip_prefix("@classes:") {
            group.member_classes = classes
                .split(',')
                .map(|c| c.trim().to_string())
                .filter(|c| !c.is_empty())
                .collect();
            continue;
        }
        if let Some(q) = GuidingQuestion::normalized(trimmed, "") {
            group.questions.push(q);
        }
    }
    groups.retain(|g| !g.questions.is_empty());
    if groups.is_empty() {
        return Err(Error::NoGroupsFound);
    }
    if let ParseMode::Strict = mode {
        for group in &groups {
            let count = group.questions.len();
            if !(2..=3).contains(&count) {
                return Err(Error::GroupSizeViolation {
                    group: group.name.clone(),
                    count,
                });
            }
        }
    } else {
        for group in &mut groups {
            group.questions.truncate(3);
        }
    }
    Ok(CompactPromptSet {
        groups,
        origin: Origin::VlmSummarized,
    })
}

/// Returns the group name when `line` is a group header.
fn group_header(line: &str) -> Option<String> {
    let s = line.trim();
    if let Some(rest) = s.strip_prefix("## ") {
        let name = rest.trim().trim_end_matches(':').trim();
        return (!name.is_empty()).then(|| name.to_string());
    }
    let plain = s.trim_matches(['*', '#']).trim();
    let lower = plain.to_lowercase();
    if lower.starts_with("group ") {
        if let Some(colon) = plain.find(':') {
            let head = &plain[..colon];
            if head[5..].trim().chars().all(|c| c.is_ascii_digit()) {
                let name = plain[colon + 1..]
                    .trim()
                    .trim_matches(['*', '[', ']'])
                    .trim();
                if !name.is_empty() && name != "Group Name" {
                    return Some(name.to_string());
                }
            }
        }
    }
    // A fully bold line with no question mark reads as a header.
    if s.starts_with("**") && s.ends_with("**") && !plain.contains('?') && !plain.is_empty() {
        return Some(plain.trim_end_matches(':').trim().to_string());
    }
    None
}

/// Serializes a compact set in the canonical line format (`## Group` headers,
/// an optional `@classes:` membership line, one question per line).
pub fn save_compact_set(set: &CompactPromptSet) -> Result<String> {
    set.validate()?;
    let mut out = String::from("# compact guiding question set\n");
    out.push_str(&format!("# origin: {}\n", set.origin.as_str()));
    for group in &set.groups {
        out.push_str(&format!("\n## {}\n", group.name));
        if !group.member_classes.is_empty() {
            out.push_str(&format!("@classes: {}\n", group.member_classes.join(", ")));
        }
        for q in &group.questions {
            out.push_str(&q.text);
            out.push('\n');
        }
    }
    Ok(out)
}

/// Parses the canonical compact-set format produced by [`save_compact_set`].
pub fn load_compact_set(text: &str) -> Result<CompactPromptSet> {
    let mut origin = Origin::Manual;
    let mut groups: Vec<PromptGroup> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(name) = trimmed.strip_prefix("## ") {
            let name = name.trim();
            if name.is_empty() {
                return Err(Error::MalformedFile {
                    line: lineno,
                    msg: "empty group header".into(),
                });
            }
            groups.push(PromptGroup {
                name: name.to_string(),
                member_classes: Vec::new(),
                questions: Vec::new(),
            });
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("# origin:") {
            origin = Origin::from_str(rest).ok_or_else(|| Error::MalformedFile {
                line: lineno,
                msg: format!("unknown origin {:?}", rest.trim()),
            })?;
            continue;
        }
        if trimmed.starts_with('#') {
            continue;
        }
        let Some(group) = groups.last_mut() else {
            return Err(Error::MalformedFile {
                line: lineno,
                msg: "content before any group header".into(),
            });
        };
        if let Some(classes) = trimmed.strip_prefix("@classes:") {
            group.member_classes = classes
                .split(',')
                .map(|c| c.trim().to_string())
                .filter(|c| !c.is_empty())
                .collect();
            continue;
        }
        match GuidingQuestion::normalized(trimmed, "") {
            Some(q) => group.questions.push(q),
            None => {
                return Err(Error::MalformedFile {
                    line: lineno,
                    msg: "blank question line".into(),
                })
            }
        }
    }
    let set = CompactPromptSet { groups, origin };
    set.validate()?;
    Ok(set)
}

/// Uniform sample of `budget` questions without replacement from the
/// flattened pool, using a seeded ChaCha20 generator so equal
/// (pool, budget, seed) triples reproduce bit-identically everywhere.
/// Selected questions are returned in pool order under one `random` group.
pub fn select_random_subset(
    pool: &PromptPool,
    budget: usize,
    seed: u64,
) -> Result<CompactPromptSet> {
    let total = pool.total_questions();
    if budget < 1 || budget > total {
        return Err(Error::BudgetOutOfRange { budget, max: total });
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..total).collect();
    indices.shuffle(&mut rng);
    let mut chosen: Vec<usize> = indices.into_iter().take(budget).collect();
    chosen.sort_unstable();

    let flat: Vec<&GuidingQuestion> = pool.flat_questions().collect();
    let questions = chosen.into_iter().map(|i| flat[i].clone()).collect();
    Ok(CompactPromptSet {
        groups: vec![PromptGroup {
            name: "random".into(),
            member_classes: Vec::new(),
            questions,
        }],
        origin: Origin::RandomSubset,
    })
}

/// Deterministic embedding-path summarization: one group per cluster, named
/// by its member classes, holding the `quotas[cluster]` questions closest
/// (by cosine) to the cluster's mean class embedding. Ties break by pool
/// order; zero-quota clusters are dropped.
pub fn summarize_groups_by_centroid(
    pool: &PromptPool,
    class_embeddings: &[(String, EmbeddingVector)],
    question_embeddings: &std::collections::HashMap<String, EmbeddingVector>,
    assignment: &[usize],
    quotas: &[usize],
) -> Result<CompactPromptSet> {
    assert_eq!(class_embeddings.len(), assignment.len());
    let n_clusters = assignment.iter().copied().max().map_or(0, |m| m + 1);
    assert_eq!(quotas.len(), n_clusters, "one quota per cluster");
    let mut groups = Vec::with_capacity(n_clusters);
    for (cluster, &quota) in quotas.iter().enumerate() {
        if quota == 0 {
            continue;
        }
        let members: Vec<&str> = class_embeddings
            .iter()
            .zip(assignment)
            .filter(|(_, &a)| a == cluster)
            .map(|((name, _), _)| name.as_str())
            .collect();
        let centroid = EmbeddingVector::mean(
            class_embeddings
                .iter()
                .zip(assignment)
                .filter(|(_, &a)| a == cluster)
                .map(|((_, v), _)| v),
        )?;
        // Candidate questions: those of the member classes, in pool order.
        let mut scored: Vec<(f64, usize, &GuidingQuestion)> = Vec::new();
        for (pos, q) in pool.flat_questions().enumerate() {
            if !members
                .iter()
                .any(|m| crate::pool::class_key(m) == crate::pool::class_key(&q.source_class))
            {
                continue;
            }
            let emb = question_embeddings
                .get(&q.text)
                .ok_or_else(|| Error::MissingEmbedding(q.text.clone()))?;
            scored.push((centroid.cosine(emb), pos, q));
        }
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut chosen: Vec<(usize, GuidingQuestion)> = scored
            .into_iter()
            .take(quota)
            .map(|(_, pos, q)| (pos, q.clone()))
            .collect();
        chosen.sort_by_key(|(pos, _)| *pos);
        groups.push(PromptGroup {
            name: members.join(" / "),
            member_classes: members.iter().map(|m| m.to_string()).collect(),
            questions: chosen.into_iter().map(|(_, q)| q).collect(),
        });
    }
    let set = CompactPromptSet {
        groups,
        origin: Origin::Manual,
    };
    set.validate()?;
    Ok(set)
}

// Re-exported for the parser; pools and compact sets share normalization.
pub(crate) fn _normalize(raw: &str) -> Option<String> {
    normalize_question_text(raw)
}
