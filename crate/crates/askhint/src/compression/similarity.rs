//! Class-level cosine-similarity matrix and its CSV export.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::EmbeddingVector;

/// Symmetric matrix of pairwise cosine similarities between average class
/// embeddings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSimilarityMatrix {
    pub class_names: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl ClassSimilarityMatrix {
    pub fn len(&self) -> usize {
        self.class_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class_names.is_empty()
    }

    /// Symmetry is exact by construction; diagonal 1; entries in [-1, 1]
    /// within 1e-9.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        for (i, row) in self.values.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Config(format!(
                    "similarity matrix row {i} has length {}, expected {n}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if self.values[j][i] != v {
                    return Err(Error::Config(format!(
                        "similarity matrix not symmetric at ({i},{j})"
                    )));
                }
                if !(-1.0 - 1e-9..=1.0 + 1e-9).contains(&v) {
                    return Err(Error::Config(format!(
                        "similarity {v} out of [-1,1] at ({i},{j})"
                    )));
                }
            }
            if (row[i] - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!("diagonal entry {i} is {}", row[i])));
            }
        }
        Ok(())
    }

    /// CSV with class names as the header row and the leading column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("class");
        for name in &self.class_names {
            out.push(',');
            out.push_str(&csv_field(name));
        }
        out.push('\n');
        for (i, name) in self.class_names.iter().enumerate() {
            out.push_str(&csv_field(name));
            for v in &self.values[i] {
                out.push(',');
                out.push_str(&format!("{v}"));
            }
            out.push('\n');
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Pairwise cosine similarities between the given class embeddings.
///
/// Zero-norm vectors get the sentinel similarity 0 to all others and 1 to
/// themselves; the diagonal is pinned to exactly 1 for non-zero vectors.
/// The upper triangle is computed once and mirrored, so symmetry is exact.
pub fn cosine_similarity_matrix(
    class_embeddings: &[(String, EmbeddingVector)],
) -> ClassSimilarityMatrix {
    assert!(
        class_embeddings.len() >= 2,
        "similarity needs at least two classes"
    );
    for (name, v) in class_embeddings {
        assert!(v.is_finite(), "non-finite embedding for class {name}");
    }
    let n = class_embeddings.len();
    let mut values = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        values[i][i] = 1.0;
        for j in (i + 1)..n {
            let s = class_embeddings[i].1.cosine(&class_embeddings[j].1);
            values[i][j] = s;
            values[j][i] = s;
        }
    }
    ClassSimilarityMatrix {
        class_names: class_embeddings.iter().map(|(n, _)| n.clone()).collect(),
        values,
    }
}
