//! Guided-question prompting and evaluation harness for video anomaly
//! detection with frozen vision-language models.
//!
//! The pipeline has three stages:
//!
//! 1. **Pool construction** ([`pool`]): build a class-wise pool of short,
//!    action-centric Yes/No guiding questions, either via a model-facing
//!    meta-prompt or from a file.
//! 2. **Semantic compression** ([`compression`]): embed the questions,
//!    cluster anomaly classes by cosine similarity of their average
//!    embeddings, and condense the pool into a compact set of grouped
//!    guiding questions.
//! 3. **Inference and evaluation** ([`inference`], [`evaluation`]): sample
//!    frames, render the structured two-task prompt, parse the constrained
//!    answer grammar into verdicts, and score runs with ROC-AUC and
//!    per-label accuracies, plus ablation and transfer harnesses.
//!
//! Model access goes through the [`client`] abstraction: a live HTTP
//! chat-completions backend, a content-addressed response cache with replay,
//! and a scripted oracle for deterministic offline runs.

pub mod client;
pub mod commands;
pub mod compression;
pub mod config;
pub mod error;
pub mod evaluation;
pub mod inference;
pub mod manifest;
pub mod pool;
pub mod presets;
#[doc(hidden)]
pub mod testutil;

pub use error::Error;
