//! Embedding storage, normalisation, the caption embedder, and joining
//! embeddings with window manifests.

mod table;
mod text;

use std::collections::HashMap;

use num_traits::Float;

pub use table::{read_matrix, write_matrix, EmbeddingTable, RawMatrix, MAGIC, VERSION};
pub use text::{TextEmbedder, TextEmbedderConfig, DEFAULT_TEXT_DIM, PHRASE_SEPARATOR};

use crate::error::{Error, Result};
use crate::preprocess::WindowSample;

/// Norms at or below this are treated as zero.
pub const NORM_EPS: f64 = 1e-12;

pub fn dot<T: Float>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm<T: Float>(v: &[T]) -> T {
    dot(v, v).sqrt()
}

/// Scales `v` to unit L2 norm; a (near-)zero vector comes back as zeros.
pub fn l2_normalize<T: Float>(v: &[T]) -> Vec<T> {
    let n = norm(v);
    if n.to_f64().is_some_and(|n| n > NORM_EPS) {
        v.iter().map(|&x| x / n).collect()
    } else {
        vec![T::zero(); v.len()]
    }
}

/// Row-wise [`l2_normalize`].
pub fn normalize_table(table: &EmbeddingTable) -> EmbeddingTable {
    let data = table.rows().flat_map(l2_normalize).collect();
    EmbeddingTable::new(table.dim(), table.ids().to_vec(), data).expect("normalising keeps the table valid")
}

/// Video embeddings paired with their windows, in manifest order.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedDataset {
    pub video: EmbeddingTable,
    pub samples: Vec<WindowSample>,
}

impl PairedDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Subset by game id, keeping order.
    pub fn filter_games(&self, games: &[&str]) -> PairedDataset {
        let idx: Vec<usize> = (0..self.len())
            .filter(|&i| games.contains(&self.samples[i].game_id.as_str()))
            .collect();
        self.select(&idx)
    }

    pub fn select(&self, indices: &[usize]) -> PairedDataset {
        PairedDataset {
            video: self.video.select(indices),
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
        }
    }

    /// Distinct game ids in first-seen order.
    pub fn games(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for s in &self.samples {
            if !out.contains(&s.game_id) {
                out.push(s.game_id.clone());
            }
        }
        out
    }
}

/// Result of [`join`]: the pairs plus table rows no manifest entry asked for.
#[derive(Debug, Clone, PartialEq)]
pub struct Joined {
    pub pairs: PairedDataset,
    pub unmatched: Vec<String>,
}

/// Pairs every manifest window with its embedding row.
pub fn join(table: &EmbeddingTable, manifest: &[WindowSample]) -> Result<Joined> {
    let index: HashMap<&str, usize> = table
        .ids()
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let mut rows = Vec::with_capacity(manifest.len());
    let mut missing = Vec::new();
    for s in manifest {
        match index.get(s.sample_id.as_str()) {
            Some(&i) => rows.push(i),
            None => missing.push(s.sample_id.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingEmbedding(missing));
    }
    let wanted: std::collections::HashSet<&str> = manifest.iter().map(|s| s.sample_id.as_str()).collect();
    let unmatched = table
        .ids()
        .iter()
        .filter(|id| !wanted.contains(id.as_str()))
        .cloned()
        .collect();
    Ok(Joined {
        pairs: PairedDataset {
            video: table.select(&rows),
            samples: manifest.to_vec(),
        },
        unmatched,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::CategoryFlags;

    fn sample(id: &str) -> WindowSample {
        WindowSample {
            sample_id: id.to_string(),
            game_id: id.split('/').next().unwrap().to_string(),
            session_id: "s".into(),
            start_frame: 0,
            window_size: 16,
            actions: vec![false; 16],
            caption: "Idle".into(),
            categories: CategoryFlags::default(),
        }
    }

    fn table(ids: &[&str]) -> EmbeddingTable {
        EmbeddingTable::from_rows(
            2,
            ids.iter().enumerate().map(|(i, id)| (id.to_string(), vec![i as f32, 1.0])),
        )
        .unwrap()
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(l2_normalize(&[3.0f64, 4.0]), vec![0.6, 0.8]);
        assert_eq!(l2_normalize(&[0.0f32, 1.0, 0.0]), vec![0.0, 1.0, 0.0]);
        assert_eq!(l2_normalize(&[0.0f32, 0.0]), vec![0.0, 0.0]);
        assert_eq!(l2_normalize(&[1e-13f64, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn join_cases() {
        let manifest: Vec<_> = ["a/s/0", "a/s/8", "b/s/0"].iter().map(|i| sample(i)).collect();

        let disjoint = table(&["x/s/0", "y/s/0"]);
        match join(&disjoint, &manifest) {
            Err(Error::MissingEmbedding(ids)) => assert_eq!(ids, ["a/s/0", "a/s/8", "b/s/0"]),
            other => panic!("{other:?}"),
        }

        let reversed = table(&["b/s/0", "a/s/8", "a/s/0"]);
        let j = join(&reversed, &manifest).unwrap();
        assert_eq!(j.pairs.video.ids(), ["a/s/0", "a/s/8", "b/s/0"]);
        assert_eq!(j.pairs.video.row(0), &[2.0, 1.0]);
        assert!(j.unmatched.is_empty());

        let superset = table(&["a/s/0", "z/s/0", "a/s/8", "b/s/0"]);
        let j = join(&superset, &manifest[..2]).unwrap();
        assert_eq!(j.pairs.len(), 2);
        assert_eq!(j.pairs.video.ids(), ["a/s/0", "a/s/8"]);
        assert_eq!(j.unmatched, ["z/s/0", "b/s/0"]);
    }
}
