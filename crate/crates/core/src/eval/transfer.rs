//! Cross-game transfer of behaviour classifiers.

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;

use super::classifier::{accuracy, train_classifier, ClassifierConfig};
use crate::align::{MlpProjector, Rng};
use crate::dataset::{ActionCatalog, Category};
use crate::embeddings::{EmbeddingTable, PairedDataset};
use crate::error::{invalid, Error, Result};

/// Percent difference of aligned over unaligned accuracy.
pub fn transferability(acc_aligned: f64, acc_unaligned: f64) -> Result<f64> {
    if acc_unaligned == 0.0 {
        return Err(Error::DivisionByZero("unaligned accuracy"));
    }
    if acc_aligned == acc_unaligned {
        return Ok(0.0);
    }
    Ok(100.0 * (acc_aligned - acc_unaligned) / acc_unaligned)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferConfig {
    pub runs: usize,
    /// Run `r` uses `seed + r` for its split and classifiers.
    pub seed: u64,
    /// Share of the source held out to measure source accuracy.
    pub test_fraction: f64,
    pub threshold: f64,
    pub classifier: ClassifierConfig,
}

impl Default for TransferConfig {
    fn default() -> Self {
        Self {
            runs: 5,
            seed: 0,
            test_fraction: 0.2,
            threshold: 0.5,
            classifier: ClassifierConfig::default(),
        }
    }
}

impl TransferConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs < 1 {
            return Err(invalid("runs must be >= 1"));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(invalid("test fraction must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    pub source_unaligned: f64,
    pub source_aligned: f64,
    pub target_unaligned: f64,
    pub target_aligned: f64,
    pub transferability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferCell {
    pub runs: Vec<RunResult>,
}

impl TransferCell {
    fn mean(&self, f: impl Fn(&RunResult) -> f64) -> f64 {
        self.runs.iter().map(f).sum::<f64>() / self.runs.len() as f64
    }

    pub fn source_unaligned(&self) -> f64 {
        self.mean(|r| r.source_unaligned)
    }

    pub fn source_aligned(&self) -> f64 {
        self.mean(|r| r.source_aligned)
    }

    pub fn target_unaligned(&self) -> f64 {
        self.mean(|r| r.target_unaligned)
    }

    pub fn target_aligned(&self) -> f64 {
        self.mean(|r| r.target_aligned)
    }

    /// Mean of the per-run percent differences.
    pub fn transferability(&self) -> f64 {
        self.mean(|r| r.transferability)
    }

    /// Percent difference of the run-averaged accuracies.
    pub fn aggregate_transferability(&self) -> Result<f64> {
        transferability(self.target_aligned(), self.target_unaligned())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferReport {
    pub cells: Vec<(Category, TransferCell)>,
    pub runs: usize,
}

impl TransferReport {
    pub fn cell(&self, category: Category) -> Option<&TransferCell> {
        self.cells.iter().find(|(c, _)| *c == category).map(|(_, cell)| cell)
    }
}

/// Unaligned and aligned views of the same rows.
pub(crate) struct Views {
    pub unaligned: EmbeddingTable,
    pub aligned: EmbeddingTable,
}

impl Views {
    pub fn new(video: &EmbeddingTable, projector: Option<&MlpProjector>) -> Result<Self> {
        let aligned = match projector {
            Some(p) => p.project(video)?,
            None => video.clone(),
        };
        Ok(Self {
            unaligned: video.clone(),
            aligned,
        })
    }
}

pub(crate) fn concat_targets(targets: &[PairedDataset]) -> Result<PairedDataset> {
    let first = targets.first().ok_or(Error::EmptyDataset)?;
    let dim = first.video.dim();
    let mut ids = Vec::new();
    let mut data = Vec::new();
    let mut samples = Vec::new();
    for t in targets {
        if t.video.dim() != dim {
            return Err(Error::DimMismatch {
                what: "target embedding dim",
                expected: dim,
                found: t.video.dim(),
            });
        }
        ids.extend_from_slice(t.video.ids());
        data.extend_from_slice(t.video.data());
        samples.extend_from_slice(&t.samples);
    }
    Ok(PairedDataset {
        video: EmbeddingTable::new(dim, ids, data)?,
        samples,
    })
}

/// Seeded (train, test) index split, both sorted. Each side keeps at least one row when `n >= 2`.
pub(crate) fn split(n: usize, test_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut Rng::seed_from_u64(seed));
    let n_test = ((n as f64 * test_fraction).round() as usize).clamp(1, n.saturating_sub(2).max(1));
    let (test, train) = order.split_at(n_test.min(n));
    let mut train = train.to_vec();
    let mut test = test.to_vec();
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// Accuracy of one classifier on a seeded train/test split of a single dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoldoutResult {
    pub train_rows: usize,
    pub test_rows: usize,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    /// Share of the test rows in the majority class.
    pub majority_rate: f64,
}

pub fn holdout_accuracy(x: &EmbeddingTable, y: &[bool], config: &TransferConfig) -> Result<HoldoutResult> {
    config.validate()?;
    if x.len() != y.len() {
        return Err(Error::DimMismatch {
            what: "labels vs rows",
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::EmptyDataset);
    }
    let (train, test) = split(x.len(), config.test_fraction, config.seed);
    let pick = |idx: &[usize]| idx.iter().map(|&i| y[i]).collect::<Vec<bool>>();
    let (train_y, test_y) = (pick(&train), pick(&test));
    let cfg = ClassifierConfig {
        seed: config.seed,
        ..config.classifier.clone()
    };
    let model = train_classifier(&x.select(&train), &train_y, &cfg)?;
    let positives = test_y.iter().filter(|b| **b).count() as f64 / test_y.len() as f64;
    Ok(HoldoutResult {
        train_rows: train.len(),
        test_rows: test.len(),
        train_accuracy: accuracy(&model, &x.select(&train), &train_y, config.threshold)?,
        test_accuracy: accuracy(&model, &x.select(&test), &test_y, config.threshold)?,
        majority_rate: positives.max(1.0 - positives),
    })
}

/// Trains unaligned and aligned classifiers per run and scores them on the
/// held-out source split and on the targets.
pub(crate) fn transfer_cell(
    source: &Views,
    source_y: &[bool],
    target: &Views,
    target_y: &[bool],
    config: &TransferConfig,
) -> Result<TransferCell> {
    config.validate()?;
    let n = source_y.len();
    let mut runs = Vec::with_capacity(config.runs);
    for r in 0..config.runs {
        let seed = config.seed.wrapping_add(r as u64);
        let (train, test) = split(n, config.test_fraction, seed);
        let pick = |idx: &[usize]| idx.iter().map(|&i| source_y[i]).collect::<Vec<bool>>();
        let (train_y, test_y) = (pick(&train), pick(&test));
        let cfg = ClassifierConfig {
            seed,
            ..config.classifier.clone()
        };

        let mut acc = [[0.0f64; 2]; 2];
        for (k, (src, tgt)) in [
            (&source.unaligned, &target.unaligned),
            (&source.aligned, &target.aligned),
        ]
        .into_iter()
        .enumerate()
        {
            let model = train_classifier(&src.select(&train), &train_y, &cfg)?;
            acc[k][0] = accuracy(&model, &src.select(&test), &test_y, config.threshold)?;
            acc[k][1] = accuracy(&model, tgt, target_y, config.threshold)?;
        }
        runs.push(RunResult {
            seed,
            source_unaligned: acc[0][0],
            source_aligned: acc[1][0],
            target_unaligned: acc[0][1],
            target_aligned: acc[1][1],
            transferability: transferability(acc[1][1], acc[0][1])?,
        });
    }
    Ok(TransferCell { runs })
}

/// Behaviour-category classifiers trained on `source`, scored on all `targets`.
///
/// Without a projector the aligned view equals the unaligned one.
pub fn run_transfer_experiment(
    source: &PairedDataset,
    targets: &[PairedDataset],
    projector: Option<&MlpProjector>,
    categories: &[Category],
    config: &TransferConfig,
) -> Result<TransferReport> {
    config.validate()?;
    if source.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let target = concat_targets(targets)?;
    let src_views = Views::new(&source.video, projector)?;
    let tgt_views = Views::new(&target.video, projector)?;
    let mut cells = Vec::new();
    for &category in categories {
        let sy: Vec<bool> = source.samples.iter().map(|s| s.categories.get(category)).collect();
        let ty: Vec<bool> = target.samples.iter().map(|s| s.categories.get(category)).collect();
        cells.push((category, transfer_cell(&src_views, &sy, &tgt_views, &ty, config)?));
    }
    Ok(TransferReport {
        cells,
        runs: config.runs,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum IdmOutcome {
    Trained(TransferCell),
    /// Positive rate below the threshold, or only one class present.
    Skipped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdmRow {
    pub action_id: String,
    pub phrase: String,
    /// Positive rate in the source.
    pub frequency: f64,
    pub outcome: IdmOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdmReport {
    pub rows: Vec<IdmRow>,
    pub min_freq: f64,
    pub runs: usize,
}

impl IdmReport {
    pub fn trained(&self) -> impl Iterator<Item = &IdmRow> {
        self.rows.iter().filter(|r| matches!(r.outcome, IdmOutcome::Trained(_)))
    }
}

pub const DEFAULT_MIN_FREQ: f64 = 0.30;

/// One marginal classifier per action frequent enough in the source.
pub fn idm_marginal(
    source: &PairedDataset,
    targets: &[PairedDataset],
    projector: Option<&MlpProjector>,
    catalog: &ActionCatalog,
    min_freq: f64,
    config: &TransferConfig,
) -> Result<IdmReport> {
    config.validate()?;
    if source.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let target = concat_targets(targets)?;
    let src_views = Views::new(&source.video, projector)?;
    let tgt_views = Views::new(&target.video, projector)?;
    let mut rows = Vec::with_capacity(catalog.len());
    for (pos, entry) in catalog.entries().iter().enumerate() {
        let sy: Vec<bool> = source.samples.iter().map(|s| s.actions[pos]).collect();
        let positives = sy.iter().filter(|b| **b).count();
        let frequency = positives as f64 / sy.len() as f64;
        let outcome = if positives == 0 || positives == sy.len() || frequency < min_freq {
            IdmOutcome::Skipped
        } else {
            let ty: Vec<bool> = target.samples.iter().map(|s| s.actions[pos]).collect();
            IdmOutcome::Trained(transfer_cell(&src_views, &sy, &tgt_views, &ty, config)?)
        };
        rows.push(IdmRow {
            action_id: entry.action_id.clone(),
            phrase: entry.phrase.clone(),
            frequency,
            outcome,
        });
    }
    Ok(IdmReport {
        rows,
        min_freq,
        runs: config.runs,
    })
}
