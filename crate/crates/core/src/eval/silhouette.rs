use rand::seq::index;
use rand_chacha::rand_core::SeedableRng;

use crate::align::Rng;
use crate::dataset::Category;
use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};

pub const DEFAULT_SUBSAMPLE_MAX: usize = 5000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelKind {
    /// Two clusters: windows where the category is present vs absent.
    Behaviour(Category),
    GameId,
    /// Labels supplied by the caller.
    Custom(String),
}

impl LabelKind {
    pub fn name(&self) -> String {
        match self {
            LabelKind::Behaviour(c) => c.name().to_string(),
            LabelKind::GameId => "game".to_string(),
            LabelKind::Custom(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SilhouetteReport {
    pub label_kind: LabelKind,
    pub score: f64,
    pub n_points: usize,
    /// Seed of the uniform subsample, when one was taken.
    pub subsample_seed: Option<u64>,
}

/// Mean silhouette over Euclidean distances.
///
/// When there are more than `subsample_max` points a seeded uniform subsample
/// of that size is scored instead.
pub fn silhouette(
    points: &EmbeddingTable,
    labels: &[usize],
    label_kind: LabelKind,
    subsample_max: usize,
    seed: u64,
) -> Result<SilhouetteReport> {
    let mut reports = silhouette_many(points, &[(label_kind, labels)], subsample_max, seed)?;
    Ok(reports.pop().unwrap())
}

/// Scores several labelings of the same points, sharing one pass over the
/// pairwise distances.
pub fn silhouette_many(
    points: &EmbeddingTable,
    labelings: &[(LabelKind, &[usize])],
    subsample_max: usize,
    seed: u64,
) -> Result<Vec<SilhouetteReport>> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    for (_, labels) in labelings {
        if labels.len() != points.len() {
            return Err(Error::DimMismatch {
                what: "labels vs points",
                expected: points.len(),
                found: labels.len(),
            });
        }
    }
    let n = points.len();
    let (chosen, subsample_seed) = if n > subsample_max.max(2) {
        let mut rng = Rng::seed_from_u64(seed);
        let mut idx = index::sample(&mut rng, n, subsample_max.max(2)).into_vec();
        idx.sort_unstable();
        (idx, Some(seed))
    } else {
        ((0..n).collect(), None)
    };
    let rows: Vec<&[f32]> = chosen.iter().map(|&i| points.row(i)).collect();
    let dense: Vec<Vec<usize>> = labelings
        .iter()
        .map(|(_, labels)| densify(&chosen.iter().map(|&i| labels[i]).collect::<Vec<_>>()))
        .collect();
    let scores = scores_from_rows(&rows, &dense)?;
    Ok(labelings
        .iter()
        .zip(scores)
        .map(|((kind, _), score)| SilhouetteReport {
            label_kind: kind.clone(),
            score,
            n_points: rows.len(),
            subsample_seed,
        })
        .collect())
}

/// Relabels to `0..k` in order of first appearance.
fn densify(labels: &[usize]) -> Vec<usize> {
    let mut seen: Vec<usize> = Vec::new();
    labels
        .iter()
        .map(|l| match seen.iter().position(|s| s == l) {
            Some(p) => p,
            None => {
                seen.push(*l);
                seen.len() - 1
            }
        })
        .collect()
}

fn scores_from_rows(rows: &[&[f32]], labelings: &[Vec<usize>]) -> Result<Vec<f64>> {
    let n = rows.len();
    let ks: Vec<usize> = labelings
        .iter()
        .map(|l| l.iter().max().map_or(0, |m| m + 1))
        .collect();
    if ks.iter().any(|&k| k < 2) {
        return Err(Error::SingleCluster);
    }
    // sums[l][i * k + c] = total distance from point i to cluster c under labeling l
    let mut sums: Vec<Vec<f64>> = ks.iter().map(|&k| vec![0.0; n * k]).collect();
    for i in 0..n {
        for j in i + 1..n {
            let d = rows[i]
                .iter()
                .zip(rows[j])
                .map(|(&a, &b)| {
                    let t = a as f64 - b as f64;
                    t * t
                })
                .sum::<f64>()
                .sqrt();
            for ((labels, s), &k) in labelings.iter().zip(sums.iter_mut()).zip(&ks) {
                s[i * k + labels[j]] += d;
                s[j * k + labels[i]] += d;
            }
        }
    }

    Ok(labelings
        .iter()
        .zip(&sums)
        .zip(&ks)
        .map(|((labels, s), &k)| {
            let mut sizes = vec![0usize; k];
            for &l in labels {
                sizes[l] += 1;
            }
            let total: f64 = (0..n)
                .map(|i| {
                    let own = labels[i];
                    if sizes[own] <= 1 {
                        return 0.0;
                    }
                    let a = s[i * k + own] / (sizes[own] - 1) as f64;
                    let b = (0..k)
                        .filter(|&c| c != own && sizes[c] > 0)
                        .map(|c| s[i * k + c] / sizes[c] as f64)
                        .fold(f64::INFINITY, f64::min);
                    let m = a.max(b);
                    if m > 0.0 {
                        (b - a) / m
                    } else {
                        0.0
                    }
                })
                .sum();
            total / n as f64
        })
        .collect())
}
