//! Embedding vectors and per-class averaging.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pool::PromptPool;

/// Fixed-length real vector produced by an embedding backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> EmbeddingVector {
        EmbeddingVector { values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &EmbeddingVector) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Cosine similarity with the zero-norm sentinel: 0 against any other
    /// vector, 1 against itself (component-wise equality).
    pub fn cosine(&self, other: &EmbeddingVector) -> f64 {
        let (na, nb) = (self.norm(), other.norm());
        if na == 0.0 || nb == 0.0 {
            return if self.values == other.values { 1.0 } else { 0.0 };
        }
        self.dot(other) / (na * nb)
    }

    /// Component-wise arithmetic mean. Errors on an empty iterator or mixed
    /// dimensions.
    pub fn mean<'a>(vectors: impl Iterator<Item = &'a EmbeddingVector>) -> Result<EmbeddingVector> {
        let mut acc: Option<Vec<f64>> = None;
        let mut count = 0usize;
        for v in vectors {
            match &mut acc {
                None => acc = Some(v.values.clone()),
                Some(sum) => {
                    if sum.len() != v.dim() {
                        return Err(Error::DimensionMismatch {
                            expected: sum.len(),
                            got: v.dim(),
                        });
                    }
                    for (s, x) in sum.iter_mut().zip(&v.values) {
                        *s += x;
                    }
                }
            }
            count += 1;
        }
        let mut sum = acc.ok_or_else(|| Error::MissingEmbedding("<empty mean>".into()))?;
        for s in &mut sum {
            *s /= count as f64;
        }
        Ok(EmbeddingVector::new(sum))
    }
}

/// Average embedding per class: the component-wise mean of the class's
/// question embeddings, keyed by question text. Output follows pool order.
pub fn average_class_embedding(
    pool: &PromptPool,
    per_question: &HashMap<String, EmbeddingVector>,
) -> Result<Vec<(String, EmbeddingVector)>> {
    let mut dim: Option<usize> = None;
    let mut out = Vec::with_capacity(pool.entries.len());
    for entry in &pool.entries {
        let mut vectors = Vec::with_capacity(entry.questions.len());
        for q in &entry.questions {
            let v = per_question
                .get(&q.text)
                .ok_or_else(|| Error::MissingEmbedding(q.text.clone()))?;
            match dim {
                None => dim = Some(v.dim()),
                Some(d) if d != v.dim() => {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: v.dim(),
                    })
                }
                _ => {}
            }
            vectors.push(v);
        }
        out.push((entry.class.clone(), EmbeddingVector::mean(vectors.into_iter())?));
    }
    Ok(out)
}
