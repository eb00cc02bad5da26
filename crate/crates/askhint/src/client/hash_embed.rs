//! Deterministic test embedder: hash the text onto the unit sphere.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::compression::EmbeddingVector;

/// Maps each text to a fixed unit vector derived from sha256(seed, text).
/// Equal texts always map to equal vectors; distinct texts land in near-
/// orthogonal directions for reasonable dimensions.
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    pub dim: usize,
    pub seed: u64,
}

impl HashEmbedder {
    pub fn new(dim: usize, seed: u64) -> HashEmbedder {
        assert!(dim >= 1);
        HashEmbedder { dim, seed }
    }

    pub fn embed_one(&self, text: &str) -> EmbeddingVector {
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update(text.as_bytes());
        let digest: [u8; 32] = hasher.finalize().into();
        let mut rng = ChaCha20Rng::from_seed(digest);
        // Box-Muller gaussians, then normalize onto the sphere.
        let mut values = Vec::with_capacity(self.dim);
        while values.len() < self.dim {
            let u1: f64 = rng.random_range(f64::EPSILON..1.0);
            let u2: f64 = rng.random_range(0.0..1.0);
            let r = (-2.0 * u1.ln()).sqrt();
            let theta = 2.0 * std::f64::consts::PI * u2;
            values.push(r * theta.cos());
            if values.len() < self.dim {
                values.push(r * theta.sin());
            }
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        EmbeddingVector::new(values.into_iter().map(|v| v / norm).collect())
    }

    pub fn embed(&self, texts: &[String]) -> Vec<EmbeddingVector> {
        texts.iter().map(|t| self.embed_one(t)).collect()
    }
}
