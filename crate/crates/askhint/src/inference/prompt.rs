//! Inference prompt rendering for the four prompting modes.

use crate::compression::CompactPromptSet;
use crate::error::{Error, Result};
use crate::pool::PromptPool;

use super::{PromptMode, PromptSet};

/// Structured two-task prompt over a compact grouped set: binary decision,
/// group classification if abnormal, and the fixed answer-format block the
/// parser understands.
pub fn render_askhint_prompt(set: &CompactPromptSet) -> String {
    let mut out = String::new();
    out.push_str("You are analyzing one surveillance or online video.\n\n");
    out.push_str("Task 1: Binary Decision.\n");
    out.push_str(
        "Using the guiding questions below, classify the video as Normal or Abnormal.\n\n",
    );
    out.push_str("Task 2: Group Classification (if Abnormal).\n");
    out.push_str(
        "Based on the questions, assign the video to one of the following groups of questions:\n\n",
    );
    for group in &set.groups {
        out.push_str(&format!("{}\n", group.name));
        for q in &group.questions {
            out.push_str(&format!("- {}\n", q.text));
        }
        out.push('\n');
    }
    out.push_str("Answer Format:\n");
    out.push_str("- Normal Event. [short reason]\n");
    out.push_str("- Abnormal Event → [Group]. [short reason]\n");
    out
}

/// Coarse prompt: no class knowledge at all.
pub fn render_abstract_prompt() -> String {
    "Please analyze the following video step-by-step and determine whether it contains abnormal behavior.\nAnswer Yes or No with a short description on the video.\n".to_string()
}

/// Class-label prompt for one target class, with group knowledge when a
/// compact set is available.
pub fn render_class_label_prompt(target: &str, groups: Option<&CompactPromptSet>) -> String {
    let mut out = String::new();
    if let Some(set) = groups {
        out.push_str("Considering the following group knowledge:\n");
        for group in &set.groups {
            out.push_str(&format!("- {}\n", group.name));
        }
        out.push('\n');
        out.push_str(&format!(
            "Based on the understanding, does this video depict a {target} event?\n"
        ));
    } else {
        out.push_str(&format!("Does this video depict a {target} event?\n"));
    }
    out.push_str("Answer Yes or No, and explain briefly.\n");
    out
}

/// Dispatch on mode; askhint needs a compact set, full_pool needs a pool.
pub fn render_inference_prompt(mode: &PromptMode, set: &PromptSet) -> Result<String> {
    match (mode, set) {
        (PromptMode::AskHint, PromptSet::Compact(compact)) => Ok(render_askhint_prompt(compact)),
        (PromptMode::AskHint, PromptSet::Pool(_)) => Err(mismatch("askhint", "pool")),
        (PromptMode::Abstract, _) => Ok(render_abstract_prompt()),
        (PromptMode::ClassLabel { target }, PromptSet::Compact(compact)) => {
            Ok(render_class_label_prompt(target, Some(compact)))
        }
        (PromptMode::ClassLabel { target }, PromptSet::Pool(_)) => {
            Ok(render_class_label_prompt(target, None))
        }
        (PromptMode::FullPool, PromptSet::Pool(pool)) => {
            Ok(crate::pool::render_full_pool_prompt(pool))
        }
        (PromptMode::FullPool, PromptSet::Compact(_)) => Err(mismatch("full_pool", "compact")),
    }
}

fn mismatch(mode: &str, given: &str) -> Error {
    Error::ModeSetMismatch {
        mode: mode.to_string(),
        given: given.to_string(),
    }
}

/// Per-class fine-grained set for the granularity study: one group named
/// after the class, holding that class's pool questions.
pub fn fine_grained_set_for_class(pool: &PromptPool, class: &str) -> Result<CompactPromptSet> {
    let questions = pool
        .class_questions(class)
        .ok_or_else(|| Error::MissingClass(class.to_string()))?;
    Ok(CompactPromptSet {
        groups: vec![crate::compression::PromptGroup {
            name: class.to_string(),
            member_classes: vec![class.to_string()],
            questions: questions.to_vec(),
        }],
        origin: crate::compression::Origin::Manual,
    })
}
