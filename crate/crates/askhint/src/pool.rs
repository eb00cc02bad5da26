//! Class-wise pool of fine-grained guiding questions.
//!
//! A pool maps each anomaly class to a short list of action-centric Yes/No
//! questions. This module renders the meta-prompt that asks a model to
//! generate such a pool, parses the model's free-text reply back into
//! structured form, persists pools in a diff-friendly line format (with a
//! JSON mirror for tooling), and renders the monolithic full-pool baseline
//! prompt with its strict JSON output schema.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One Yes/No guiding question, tagged with the class it was generated for
/// (empty for group-level summarized questions).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuidingQuestion {
    pub text: String,
    #[serde(default)]
    pub source_class: String,
}

impl GuidingQuestion {
    /// Normalizes raw text into a valid question: strips list markers and
    /// emphasis, trims, and appends a terminal `?` when missing. Returns
    /// `None` when nothing is left.
    pub fn normalized(raw: &str, source_class: &str) -> Option<GuidingQuestion> {
        let text = normalize_question_text(raw)?;
        Some(GuidingQuestion {
            text,
            source_class: source_class.to_string(),
        })
    }
}

/// Strips leading list markers (`1.`, `-`, `*`, `Q3:`), surrounding emphasis
/// and quotes, then guarantees a trailing question mark.
pub(crate) fn normalize_question_text(raw: &str) -> Option<String> {
    let mut s = raw.trim();
    // Leading enumeration: digits or a Q-prefix followed by . ) or :
    let bytes = s.as_bytes();
    let mut idx = 0;
    if idx < bytes.len() && (bytes[idx] == b'Q' || bytes[idx] == b'q') {
        let mut j = idx + 1;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if j > idx + 1 && j < bytes.len() && matches!(bytes[j], b'.' | b')' | b':') {
            idx = j + 1;
        }
    } else {
        let mut j = idx;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if j > idx && j < bytes.len() && matches!(bytes[j], b'.' | b')' | b':') {
            idx = j + 1;
        }
    }
    s = s[idx..].trim_start();
    s = s.trim_start_matches(['-', '*', '•']).trim_start();
    let s = s.trim_matches(['*', '"', '\'', '`']).trim();
    if s.is_empty() {
        return None;
    }
    let mut text = s.to_string();
    if !text.ends_with('?') {
        // Model output drops punctuation often enough that rejecting here
        // would throw away usable questions.
        while text.ends_with(['.', '!', ':', ';']) {
            text.pop();
        }
        if text.is_empty() {
            return None;
        }
        text.push('?');
    }
    Some(text)
}

/// Case-insensitive, whitespace-collapsed key used to match class names.
pub(crate) fn class_key(name: &str) -> String {
    name.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Questions for one anomaly class, in generation order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassQuestions {
    pub class: String,
    pub questions: Vec<GuidingQuestion>,
}

/// Ordered class-wise pool of guiding questions.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PromptPool {
    pub entries: Vec<ClassQuestions>,
}

impl PromptPool {
    pub fn new(entries: Vec<ClassQuestions>) -> Result<PromptPool> {
        let pool = PromptPool { entries };
        pool.validate()?;
        Ok(pool)
    }

    /// Checks uniqueness of class names and that every class has a question.
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for entry in &self.entries {
            if !seen.insert(class_key(&entry.class)) {
                return Err(Error::MalformedFile {
                    line: 0,
                    msg: format!("duplicate class {:?}", entry.class),
                });
            }
            if entry.questions.is_empty() {
                return Err(Error::NoQuestions(entry.class.clone()));
            }
            for q in &entry.questions {
                if q.text.trim().is_empty() || !q.text.ends_with('?') {
                    return Err(Error::MalformedFile {
                        line: 0,
                        msg: format!("invalid question {:?} in class {:?}", q.text, entry.class),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn classes(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.class.as_str())
    }

    pub fn class_questions(&self, class: &str) -> Option<&[GuidingQuestion]> {
        let key = class_key(class);
        self.entries
            .iter()
            .find(|e| class_key(&e.class) == key)
            .map(|e| e.questions.as_slice())
    }

    /// All questions in pool order.
    pub fn flat_questions(&self) -> impl Iterator<Item = &GuidingQuestion> {
        self.entries.iter().flat_map(|e| e.questions.iter())
    }

    pub fn total_questions(&self) -> usize {
        self.entries.iter().map(|e| e.questions.len()).sum()
    }

    /// Sub-pool restricted to `classes` (matched case-insensitively),
    /// preserving pool order. Errors on names absent from the pool.
    pub fn subset(&self, classes: &[String]) -> Result<PromptPool> {
        let keys: Vec<String> = classes.iter().map(|c| class_key(c)).collect();
        for (key, name) in keys.iter().zip(classes) {
            if !self.entries.iter().any(|e| &class_key(&e.class) == key) {
                return Err(Error::MissingClass(name.clone()));
            }
        }
        Ok(PromptPool {
            entries: self
                .entries
                .iter()
                .filter(|e| keys.contains(&class_key(&e.class)))
                .cloned()
                .collect(),
        })
    }
}

/// Renders the two-step generate-then-summarize meta-prompt that asks a
/// model to produce `min_q`-`max_q` action-centric Yes/No questions per
/// class and then compress them into grouped guiding questions.
pub fn render_generation_metaprompt(
    classes: &[String],
    min_q: usize,
    max_q: usize,
) -> Result<String> {
    if classes.is_empty() {
        return Err(Error::EmptyClassList);
    }
    assert!(
        (1..=max_q).contains(&min_q),
        "question count range must satisfy 1 <= min <= max"
    );
    let mut out = String::new();
    out.push_str("You are an expert in video anomaly detection using Vision-Language Models.\n");
    out.push_str("Your task has two steps:\n\n");
    out.push_str("Step 1: Generate class-specific guiding questions\n");
    out.push_str(&format!(
        "For each anomaly class in the list, generate {min_q}-{max_q} short, Yes/No guiding questions.\n"
    ));
    out.push_str(
        "- The questions must be action-centric and context-aware (e.g., \"Do you see people fighting?\").\n",
    );
    out.push_str(
        "- They should help a model distinguish the target anomaly class from others and from normal events.\n",
    );
    out.push_str("- Output each class with its list of questions.\n\n");
    out.push_str("Anomaly Classes:\n");
    for class in classes {
        out.push_str(&format!("- {class}\n"));
    }
    out.push('\n');
    out.push_str(&compression_instructions());
    Ok(out)
}

/// Step-2 instruction block shared by the generation and compression
/// meta-prompts. `total_budget` switches the per-group "2-3 questions"
/// contract for an exact total count across groups.
pub(crate) fn compression_instructions_with_budget(total_budget: Option<usize>) -> String {
    let mut out = String::new();
    out.push_str("Step 2: Summarize and Conclude\n");
    out.push_str("Your task is to summarize and group these guiding questions into a compact set.\n\n");
    out.push_str("Steps:\n");
    out.push_str("1. Read all the class-specific guiding questions.\n");
    out.push_str("2. Cluster them into major groups based on similar actions or themes.\n");
    match total_budget {
        None => out.push_str(
            "3. For each group, summarize the questions and generate 2-3 generalized guiding questions in Yes/No format, capturing the common patterns from the original class prompts.\n",
        ),
        Some(n) => out.push_str(&format!(
            "3. For each group, summarize the questions and generate generalized guiding questions in Yes/No format, capturing the common patterns from the original class prompts; the final set must contain exactly {n} questions in total across all groups.\n",
        )),
    }
    out.push_str(
        "4. Avoid vague words like \"abnormal\" - use action- or object-specific terms (e.g., \"fighting,\" \"stealing,\" \"breaking,\" \"explosion\").\n",
    );
    out.push_str("5. Provide a compact final set of grouped guiding questions.\n\n");
    out.push_str("Output Format:\n\n");
    out.push_str("Grouped Guiding Questions:\n\n");
    for g in 1..=3 {
        out.push_str(&format!("Group {g}: [Group Name]\n1. ...\n2. ...\n3. ...\n\n"));
    }
    out.push_str(
        "Summary: [One sentence explaining what these grouped guiding questions aim to achieve]\n",
    );
    out
}

fn compression_instructions() -> String {
    compression_instructions_with_budget(None)
}

/// Parses a model's free-text pool back into a [`PromptPool`].
///
/// A line is a class header when, stripped of markup, it matches one of
/// `expected_classes` (case-insensitive, whitespace-collapsed). Lines under
/// a header become questions after normalization. Every expected class must
/// appear with at least one question.
pub fn parse_generated_pool(model_text: &str, expected_classes: &[String]) -> Result<PromptPool> {
    assert!(!model_text.is_empty(), "model text must be non-empty");
    let mut by_key: std::collections::HashMap<String, Vec<GuidingQuestion>> =
        std::collections::HashMap::new();
    let mut current: Option<String> = None; // class key

    for line in model_text.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(name) = header_class(trimmed, expected_classes) {
            let key = class_key(&name);
            by_key.entry(key.clone()).or_default();
            current = Some(key);
            continue;
        }
        if let Some(key) = &current {
            let canonical = expected_classes
                .iter()
                .find(|c| &class_key(c) == key)
                .expect("current key comes from expected_classes");
            if let Some(q) = GuidingQuestion::normalized(trimmed, canonical) {
                by_key.get_mut(key).expect("entry created with header").push(q);
            }
        }
    }

    let mut entries = Vec::with_capacity(expected_classes.len());
    for class in expected_classes {
        let key = class_key(class);
        match by_key.get(&key) {
            None => return Err(Error::MissingClass(class.clone())),
            Some(qs) if qs.is_empty() => return Err(Error::NoQuestions(class.clone())),
            Some(qs) => entries.push(ClassQuestions {
                class: class.clone(),
                questions: qs.clone(),
            }),
        }
    }
    PromptPool::new(entries)
}

/// Returns the canonical class name when `line` is a header for one of
/// `expected`, else `None`. Tolerates `## `, `**`, enumeration prefixes and
/// a trailing colon.
fn header_class(line: &str, expected: &[String]) -> Option<String> {
    let mut s = line.trim();
    s = s.trim_start_matches('#').trim_start();
    s = s.trim_matches(['*', '_']).trim();
    // "3) Arson:" style enumeration
    let bytes = s.as_bytes();
    let mut j = 0;
    while j < bytes.len() && bytes[j].is_ascii_digit() {
        j += 1;
    }
    if j > 0 && j < bytes.len() && matches!(bytes[j], b'.' | b')') {
        s = s[j + 1..].trim_start();
    }
    let s = s.trim_matches(['*', '_']).trim().trim_end_matches(':').trim();
    let key = class_key(s);
    if key.is_empty() {
        return None;
    }
    expected.iter().find(|c| class_key(c) == key).cloned()
}

/// Serializes a pool in the canonical line format: `## Class` headers with
/// one question per line. `load_pool` of the output reproduces the pool.
pub fn save_pool(pool: &PromptPool) -> Result<String> {
    pool.validate()?;
    let mut out = String::from("# guiding question pool\n");
    for entry in &pool.entries {
        out.push_str(&format!("\n## {}\n", entry.class));
        for q in &entry.questions {
            out.push_str(&q.text);
            out.push('\n');
        }
    }
    Ok(out)
}

/// Parses the canonical pool format produced by [`save_pool`].
pub fn load_pool(text: &str) -> Result<PromptPool> {
    let mut entries: Vec<ClassQuestions> = Vec::new();
    let mut seen = std::collections::HashSet::new();
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
                    msg: "empty class header".into(),
                });
            }
            if !seen.insert(class_key(name)) {
                return Err(Error::MalformedFile {
                    line: lineno,
                    msg: format!("duplicate class header {name:?}"),
                });
            }
            entries.push(ClassQuestions {
                class: name.to_string(),
                questions: Vec::new(),
            });
            continue;
        }
        if trimmed.starts_with('#') {
            continue; // comment
        }
        match entries.last_mut() {
            None => {
                return Err(Error::MalformedFile {
                    line: lineno,
                    msg: "question before any class header".into(),
                })
            }
            Some(entry) => {
                let class = entry.class.clone();
                match GuidingQuestion::normalized(trimmed, &class) {
                    Some(q) => entry.questions.push(q),
                    None => {
                        return Err(Error::MalformedFile {
                            line: lineno,
                            msg: "blank question line".into(),
                        })
                    }
                }
            }
        }
    }
    if let Some(empty) = entries.iter().find(|e| e.questions.is_empty()) {
        return Err(Error::NoQuestions(empty.class.clone()));
    }
    PromptPool::new(entries)
}

/// Renders the full-pool baseline prompt: every class with its diagnostic
/// questions, a strict raw-JSON output schema with a single final Yes/No
/// anomaly field, and the rules block.
pub fn render_full_pool_prompt(pool: &PromptPool) -> String {
    let n = pool.entries.len();
    let mut out = String::new();
    out.push_str("You are analyzing ONE surveillance video.\n\n");
    out.push_str(&format!(
        "For EACH of the {n} classes below, answer its class-specific diagnostic questions with \"Yes\" or \"No\". Then give a short reason (<12 words) and a confidence score in [0,1] for that class's overall decision (\"answer\": Yes/No).\n"
    ));
    out.push_str(
        "Finally, output the final answer on whether there is an anomaly event. Answering \"yes\" or \"no\".\n\n",
    );
    out.push_str("CLASSES AND QUESTIONS\n\n");
    for (ci, entry) in pool.entries.iter().enumerate() {
        out.push_str(&format!("{}) {}\n", ci + 1, entry.class));
        for (qi, q) in entry.questions.iter().enumerate() {
            out.push_str(&format!("Q{}: {}\n", qi + 1, q.text));
        }
        out.push('\n');
    }
    out.push_str("OUTPUT FORMAT (STRICT):\n");
    out.push_str("Return ONLY raw JSON (no markdown, no extra text) with this schema:\n");
    out.push_str("{\n  \"final_label\": \"Yes\" or \"no\"\n}\n\n");
    out.push_str("RULES:\n");
    out.push_str(&format!("- Evaluate ALL {n} classes and ALL their questions.\n"));
    out.push_str(
        "- \"answer\" is your overall Yes/No for that class, consistent with its questions.\n",
    );
    out.push_str("- Confidence reflects visual evidence strength for that class.\n");
    out.push_str("- Keep reasons short (<12 words).\n");
    out.push_str("- Output valid JSON only.\n");
    out
}
