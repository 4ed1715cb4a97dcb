use rand::Rng;
use rand_distr::StandardNormal;

use super::{sub_rng, SynthConfig};
use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::preprocess::WindowSample;

fn gaussian(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    v
}

/// Columns of the behaviour matrix, one unit vector per action.
fn behaviour_columns(config: &SynthConfig, actions: usize) -> Vec<Vec<f64>> {
    let mut rng = sub_rng(config.embedding.behaviour_seed, "behaviour");
    (0..actions).map(|_| unit(gaussian(&mut rng, config.embedding.dim))).collect()
}

/// Orthonormal basis of the shared style subspace.
fn style_basis(config: &SynthConfig) -> Vec<Vec<f64>> {
    let e = &config.embedding;
    let mut rng = sub_rng(e.behaviour_seed, "style");
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(e.style_rank);
    while basis.len() < e.style_rank {
        let mut v = gaussian(&mut rng, e.dim);
        for b in &basis {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        if v.iter().map(|x| x * x).sum::<f64>() > 1e-12 {
            basis.push(unit(v));
        }
    }
    basis
}

fn game_offset(config: &SynthConfig, basis: &[Vec<f64>], game_id: &str) -> Vec<f64> {
    let e = &config.embedding;
    let mut rng = sub_rng(config.seed, &format!("style/{game_id}"));
    let direction = if basis.is_empty() {
        unit(gaussian(&mut rng, e.dim))
    } else {
        let c = unit(gaussian(&mut rng, basis.len()));
        let mut v = vec![0.0; e.dim];
        for (ci, b) in c.iter().zip(basis) {
            v.iter_mut().zip(b).for_each(|(x, y)| *x += ci * y);
        }
        v
    };
    direction.into_iter().map(|x| x * e.game_gap).collect()
}

/// Simulated frozen video encoder output for each window, in input order.
///
/// Noise is seeded per sample id, so a window's row does not depend on which
/// other windows are generated alongside it.
pub fn generate_foundation_embeddings(samples: &[WindowSample], config: &SynthConfig) -> Result<EmbeddingTable> {
    config.validate()?;
    let e = &config.embedding;
    let n_actions = samples.first().map_or(0, |s| s.actions.len());
    let columns = behaviour_columns(config, n_actions);
    let basis = style_basis(config);
    let mut offsets: Vec<(&str, Vec<f64>)> = Vec::new();
    let noise_sd = e.noise / (e.dim as f64).sqrt();

    let mut ids = Vec::with_capacity(samples.len());
    let mut data = Vec::with_capacity(samples.len() * e.dim);
    for s in samples {
        if config.game(&s.game_id).is_none() {
            return Err(Error::UnknownGame(s.game_id.clone()));
        }
        if s.actions.len() != n_actions {
            return Err(Error::DimMismatch {
                what: "window action count",
                expected: n_actions,
                found: s.actions.len(),
            });
        }
        let offset = match offsets.iter().find(|(g, _)| *g == s.game_id) {
            Some((_, o)) => o,
            None => {
                offsets.push((s.game_id.as_str(), game_offset(config, &basis, &s.game_id)));
                &offsets.last().unwrap().1
            }
        };
        let mut row = offset.clone();
        for (col, _) in columns.iter().zip(&s.actions).filter(|(_, on)| **on) {
            row.iter_mut().zip(col).for_each(|(x, c)| *x += c);
        }
        if noise_sd > 0.0 {
            let mut rng = sub_rng(config.seed, &format!("noise/{}", s.sample_id));
            row.iter_mut().for_each(|x| *x += noise_sd * rng.sample::<f64, _>(StandardNormal));
        }
        data.extend(unit(row).into_iter().map(|x| x as f32));
        ids.push(s.sample_id.clone());
    }
    EmbeddingTable::new(e.dim, ids, data)
}
