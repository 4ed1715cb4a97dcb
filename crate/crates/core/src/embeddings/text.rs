//! Deterministic caption embedder.
//!
//! Every phrase owns a fixed pseudo-random unit vector drawn from ChaCha20
//! seeded with `SHA-256(seed_le ‖ phrase)`. A caption embeds as the normalised
//! sum of its phrase vectors, so captions sharing phrases are close and
//! unrelated captions are near-orthogonal. Only integer ops, `+`, `*` and
//! `sqrt` touch the values, so results are bit-identical across platforms.

use std::collections::BTreeMap;

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use super::{l2_normalize, EmbeddingTable};
use crate::dataset::ActionCatalog;
use crate::error::{invalid, Error, Result};
use crate::preprocess::{WindowSample, IDLE_CAPTION};

pub const DEFAULT_TEXT_DIM: usize = 512;
pub const PHRASE_SEPARATOR: &str = ", ";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TextEmbedderConfig {
    pub dim: usize,
    pub seed: u64,
}

impl Default for TextEmbedderConfig {
    fn default() -> Self {
        Self {
            dim: DEFAULT_TEXT_DIM,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TextEmbedder {
    config: TextEmbedderConfig,
    vocabulary: BTreeMap<String, Vec<f64>>,
}

fn phrase_vector(seed: u64, phrase: &str, dim: usize) -> Vec<f64> {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(phrase.as_bytes());
    let mut rng = ChaCha20Rng::from_seed(hasher.finalize().into());
    loop {
        // uniform in [-1, 1): 53 random bits scaled exactly
        let v: Vec<f64> = (0..dim)
            .map(|_| (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 52) as f64) - 1.0)
            .collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

impl TextEmbedder {
    /// Vocabulary: every catalog phrase plus the idle caption.
    pub fn new(config: TextEmbedderConfig, catalog: &ActionCatalog) -> Result<Self> {
        if config.dim < 2 {
            return Err(invalid("text embedding dim must be >= 2"));
        }
        let vocabulary = catalog
            .phrases()
            .chain(std::iter::once(IDLE_CAPTION))
            .map(|p| (p.to_string(), phrase_vector(config.seed, p, config.dim)))
            .collect();
        Ok(Self { config, vocabulary })
    }

    pub fn config(&self) -> TextEmbedderConfig {
        self.config
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn embed(&self, caption: &str) -> Result<Vec<f32>> {
        let mut sum = vec![0.0f64; self.config.dim];
        for phrase in caption.split(PHRASE_SEPARATOR) {
            let v = self
                .vocabulary
                .get(phrase)
                .ok_or_else(|| Error::UnknownPhrase(phrase.to_string()))?;
            for (s, x) in sum.iter_mut().zip(v) {
                *s += x;
            }
        }
        Ok(l2_normalize(&sum).into_iter().map(|x| x as f32).collect())
    }

    /// One row per sample, in manifest order.
    pub fn embed_samples(&self, samples: &[WindowSample]) -> Result<EmbeddingTable> {
        let mut cache: BTreeMap<&str, Vec<f32>> = BTreeMap::new();
        let mut data = Vec::with_capacity(samples.len() * self.dim());
        for s in samples {
            if !cache.contains_key(s.caption.as_str()) {
                cache.insert(&s.caption, self.embed(&s.caption)?);
            }
            data.extend_from_slice(&cache[s.caption.as_str()]);
        }
        let ids = samples.iter().map(|s| s.sample_id.clone()).collect();
        EmbeddingTable::new(self.dim(), ids, data)
    }
}
