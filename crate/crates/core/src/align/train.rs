use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_chacha::rand_core::SeedableRng;

use super::adam::{Adam, AdamConfig};
use super::loss::{cosine_loss_grad, mse_loss_grad, preference_loss_grad, LossKind};
use super::mlp::{Mode, Rng};
use super::projector::{MlpProjector, ProjectorCache};
use crate::embeddings::EmbeddingTable;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub dropout_rate: f64,
    pub loss: LossKind,
    /// Margin of the preference loss; unused otherwise.
    pub margin: f64,
    pub seed: u64,
    /// Hidden layer widths. Output width follows the caption embedding.
    pub hidden: Vec<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            batch_size: 128,
            adam: AdamConfig::default(),
            dropout_rate: 0.5,
            loss: LossKind::Cosine,
            margin: 0.2,
            seed: 0,
            hidden: vec![512, 512, 512],
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(invalid("epochs must be >= 1"));
        }
        if self.batch_size < 1 {
            return Err(invalid("batch size must be >= 1"));
        }
        if !(self.adam.learning_rate >= 0.0 && self.adam.learning_rate.is_finite()) {
            return Err(invalid("learning rate must be finite and non-negative"));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(invalid("dropout rate must lie in [0, 1)"));
        }
        if !(self.margin >= 0.0) {
            return Err(invalid("margin must be >= 0"));
        }
        if self.hidden.contains(&0) {
            return Err(invalid("hidden widths must be positive"));
        }
        Ok(())
    }

    pub fn dims(&self, input_dim: usize, output_dim: usize) -> Vec<usize> {
        std::iter::once(input_dim)
            .chain(self.hidden.iter().copied())
            .chain(std::iter::once(output_dim))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    /// Mean training-mode loss over each epoch.
    pub epoch_losses: Vec<f64>,
    pub projector: MlpProjector,
    pub seed: u64,
    pub wall_time: Duration,
}

/// Initialises a projector from `config` and trains it.
pub fn train_alignment(video: &EmbeddingTable, captions: &EmbeddingTable, config: &TrainConfig) -> Result<TrainReport> {
    config.validate()?;
    let projector = MlpProjector::new(
        &config.dims(video.dim(), captions.dim()),
        config.dropout_rate,
        config.seed,
    )?;
    train_projector(projector, video, captions, config)
}

/// Trains an existing projector on row-aligned (video, caption) pairs.
///
/// Each epoch shuffles the pairs, then takes one Adam step per batch on the
/// batch-mean loss. The last partial batch is kept.
pub fn train_projector(
    mut projector: MlpProjector,
    video: &EmbeddingTable,
    captions: &EmbeddingTable,
    config: &TrainConfig,
) -> Result<TrainReport> {
    config.validate()?;
    let started = Instant::now();
    if video.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if video.len() != captions.len() {
        return Err(Error::DimMismatch {
            what: "caption rows vs video rows",
            expected: video.len(),
            found: captions.len(),
        });
    }
    if video.dim() != projector.input_dim() {
        return Err(Error::DimMismatch {
            what: "video dim vs projector input",
            expected: projector.input_dim(),
            found: video.dim(),
        });
    }
    if captions.dim() != projector.output_dim() {
        return Err(Error::DimMismatch {
            what: "caption dim vs projector output",
            expected: projector.output_dim(),
            found: captions.dim(),
        });
    }

    let mut rng = Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let mut adam = Adam::new(projector.net().layers(), config.adam);
    let mut order: Vec<usize> = (0..video.len()).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let margin = config.margin as f32;

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_sum = 0.0f64;
        for batch in order.chunks(config.batch_size) {
            let mut outputs: Vec<(Vec<f32>, ProjectorCache<f32>)> = Vec::with_capacity(batch.len());
            for &i in batch {
                outputs.push(projector.forward(video.row(i), Mode::Train(&mut rng))?);
            }
            let dim = projector.output_dim();
            let mut grad_z = vec![vec![0.0f32; dim]; batch.len()];
            let scale = 1.0 / batch.len() as f32;
            for (k, &i) in batch.iter().enumerate() {
                let target = captions.row(i);
                let z = &outputs[k].0;
                let loss = match config.loss {
                    LossKind::Cosine => match cosine_loss_grad(z, target) {
                        Ok((l, g)) => {
                            accumulate(&mut grad_z[k], &g, scale);
                            l
                        }
                        // a dead projector output has no direction to follow
                        Err(Error::ZeroVector) => 1.0,
                        Err(e) => return Err(e),
                    },
                    LossKind::Mse => {
                        let (l, g) = mse_loss_grad(z, target)?;
                        accumulate(&mut grad_z[k], &g, scale);
                        l
                    }
                    LossKind::Preference => {
                        if batch.len() < 2 {
                            0.0
                        } else {
                            let mut j = rng.random_range(0..batch.len() - 1);
                            if j >= k {
                                j += 1;
                            }
                            match preference_loss_grad(z, &outputs[j].0, target, margin) {
                                Ok((l, gi, gj)) => {
                                    accumulate(&mut grad_z[k], &gi, scale);
                                    accumulate(&mut grad_z[j], &gj, scale);
                                    l
                                }
                                Err(Error::ZeroVector) => 0.0,
                                Err(e) => return Err(e),
                            }
                        }
                    }
                };
                epoch_sum += loss as f64;
            }
            let mut grads = projector.zero_grads();
            for ((_, cache), g) in outputs.iter().zip(&grad_z) {
                projector.backward(cache, g, &mut grads);
            }
            adam.step(projector.layers_mut(), &grads);
        }
        let mean = epoch_sum / video.len() as f64;
        if !mean.is_finite() {
            return Err(invalid("training loss diverged"));
        }
        epoch_losses.push(mean);
    }

    Ok(TrainReport {
        epoch_losses,
        projector,
        seed: config.seed,
        wall_time: started.elapsed(),
    })
}

fn accumulate(into: &mut [f32], g: &[f32], scale: f32) {
    for (a, &b) in into.iter_mut().zip(g) {
        *a += b * scale;
    }
}

/// Eval-mode projection of a whole table.
pub fn project(projector: &MlpProjector, table: &EmbeddingTable) -> Result<EmbeddingTable> {
    projector.project(table)
}
