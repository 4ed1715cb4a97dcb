//! Silhouette scores, behaviour classifiers and cross-game transfer.

mod classifier;
mod pca;
mod report;
mod silhouette;
mod transfer;

pub use classifier::{accuracy, train_classifier, ClassifierConfig, ClassifierModel};
pub use pca::pca_2d;
pub use report::{idm_records, silhouette_records, transfer_records, Record};
pub use silhouette::{silhouette, silhouette_many, LabelKind, SilhouetteReport, DEFAULT_SUBSAMPLE_MAX};
pub use transfer::{
    holdout_accuracy, idm_marginal, run_transfer_experiment, transferability, HoldoutResult, IdmOutcome, IdmReport, IdmRow, RunResult, TransferCell,
    TransferConfig, TransferReport, DEFAULT_MIN_FREQ,
};

use crate::dataset::Category;
use crate::embeddings::PairedDataset;
use crate::error::Result;

/// Behaviour-category (present/absent) and game-label silhouettes of a dataset.
pub fn dataset_silhouettes(data: &PairedDataset, subsample_max: usize, seed: u64) -> Result<Vec<SilhouetteReport>> {
    let games = data.games();
    let game_labels: Vec<usize> = data
        .samples
        .iter()
        .map(|s| games.iter().position(|g| *g == s.game_id).unwrap())
        .collect();
    let behaviour: Vec<(Category, Vec<usize>)> = Category::BEHAVIOURS
        .iter()
        .map(|&c| (c, data.samples.iter().map(|s| s.categories.get(c) as usize).collect()))
        .collect();
    let mut labelings: Vec<(LabelKind, &[usize])> = behaviour
        .iter()
        .map(|(c, l)| (LabelKind::Behaviour(*c), l.as_slice()))
        .collect();
    labelings.push((LabelKind::GameId, &game_labels));
    silhouette_many(&data.video, &labelings, subsample_max, seed)
}
