//! Binary MLP classifiers over embeddings.

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;

use crate::align::{Adam, AdamConfig, Mlp, Mode, Rng};
use crate::embeddings::EmbeddingTable;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierConfig {
    pub hidden: (usize, usize),
    pub dropout_rate: f64,
    pub adam: AdamConfig,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Undersample the majority class to the minority count before training.
    pub balanced: bool,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            hidden: (256, 64),
            dropout_rate: 0.4,
            adam: AdamConfig::default(),
            epochs: 10,
            batch_size: 128,
            seed: 0,
            balanced: false,
        }
    }
}

/// Two ReLU hidden layers and a logistic output.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel {
    net: Mlp<f32>,
}

fn sigmoid(x: f64) -> f64 {
    let p = if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    };
    p.clamp(1e-15, 1.0 - 1e-15)
}

impl ClassifierModel {
    pub fn net(&self) -> &Mlp<f32> {
        &self.net
    }

    pub fn input_dim(&self) -> usize {
        self.net.input_dim()
    }

    /// Probability of the positive class, strictly inside (0, 1).
    pub fn predict(&self, x: &[f32]) -> Result<f64> {
        let (out, _) = self.net.forward(x, Mode::Eval)?;
        Ok(sigmoid(out[0] as f64))
    }
}

pub fn train_classifier(x: &EmbeddingTable, y: &[bool], config: &ClassifierConfig) -> Result<ClassifierModel> {
    if x.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if x.len() != y.len() {
        return Err(Error::DimMismatch {
            what: "labels vs rows",
            expected: x.len(),
            found: y.len(),
        });
    }
    let positives = y.iter().filter(|b| **b).count();
    if positives == 0 || positives == y.len() {
        return Err(Error::SingleClass);
    }
    if config.epochs < 1 || config.batch_size < 1 {
        return Err(invalid("classifier epochs and batch size must be >= 1"));
    }

    let dims = [x.dim(), config.hidden.0, config.hidden.1, 1];
    let mut net = Mlp::<f32>::init(&dims, config.dropout_rate, config.seed)?;
    let mut rng = Rng::seed_from_u64(config.seed);
    rng.set_stream(2);

    let mut rows: Vec<usize> = (0..x.len()).collect();
    if config.balanced {
        let (mut pos, mut neg): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| y[i]);
        let keep = pos.len().min(neg.len());
        pos.shuffle(&mut rng);
        neg.shuffle(&mut rng);
        pos.truncate(keep);
        neg.truncate(keep);
        rows = pos.into_iter().chain(neg).collect();
        rows.sort_unstable();
    }

    let mut adam = Adam::new(net.layers(), config.adam);
    for _ in 0..config.epochs {
        rows.shuffle(&mut rng);
        for batch in rows.chunks(config.batch_size) {
            let mut grads = net.zero_grads();
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let (out, cache) = net.forward(x.row(i), Mode::Train(&mut rng))?;
                let p = sigmoid(out[0] as f64);
                let target = if y[i] { 1.0 } else { 0.0 };
                // d(BCE)/d(logit)
                let g = ((p - target) * scale) as f32;
                net.backward(&cache, &[g], &mut grads);
            }
            adam.step(net.layers_mut(), &grads);
        }
    }
    Ok(ClassifierModel { net })
}

/// Fraction of rows where `(p >= threshold) == y`.
pub fn accuracy(model: &ClassifierModel, x: &EmbeddingTable, y: &[bool], threshold: f64) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if x.len() != y.len() {
        return Err(Error::DimMismatch {
            what: "labels vs rows",
            expected: x.len(),
            found: y.len(),
        });
    }
    let mut correct = 0usize;
    for (row, &label) in x.rows().zip(y) {
        if (model.predict(row)? >= threshold) == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / x.len() as f64)
}
