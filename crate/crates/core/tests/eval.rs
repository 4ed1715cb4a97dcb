mod support;

use behave_core::dataset::{default_catalog, Category};
use behave_core::embeddings::{EmbeddingTable, PairedDataset};
use behave_core::eval::{
    accuracy, idm_marginal, run_transfer_experiment, silhouette, train_classifier, ClassifierConfig, IdmOutcome,
    LabelKind, TransferConfig,
};
use behave_core::preprocess::{run_pipeline, PipelineConfig};
use behave_core::synth::{generate_foundation_embeddings, generate_logs, SynthConfig};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn table(points: &[Vec<f64>]) -> EmbeddingTable {
    let dim = points[0].len();
    EmbeddingTable::from_rows(
        dim,
        points
            .iter()
            .enumerate()
            .map(|(i, p)| (format!("p/s/{i}"), p.iter().map(|&x| x as f32).collect())),
    )
    .unwrap()
}

#[test]
fn silhouette_agrees_with_brute_force_and_is_invariant() {
    support::silhouette_invariance(50, 42, |points, labels| {
        silhouette(&table(points), labels, LabelKind::Custom("test".into()), 10_000, 0).unwrap().score
    })
    .unwrap();
}

fn synth_data(n_games: usize, frames: usize) -> (SynthConfig, Vec<PairedDataset>) {
    let mut config = SynthConfig::new(n_games, 0);
    config.frames_per_game = frames;
    config.session_frames = frames;
    let catalog = default_catalog();
    let data = generate_logs(&config)
        .unwrap()
        .iter()
        .map(|g| {
            let samples = run_pipeline(&g.records, &g.profile, &catalog, &PipelineConfig::default()).unwrap();
            let video = generate_foundation_embeddings(&samples, &config).unwrap();
            PairedDataset { video, samples }
        })
        .collect();
    (config, data)
}

fn quick(runs: usize) -> TransferConfig {
    TransferConfig {
        runs,
        classifier: ClassifierConfig {
            epochs: 3,
            hidden: (32, 16),
            ..ClassifierConfig::default()
        },
        ..TransferConfig::default()
    }
}

#[test]
fn accuracy_ignores_row_order() {
    let (_, data) = synth_data(2, 1048);
    let d = &data[0];
    let y: Vec<bool> = d.samples.iter().map(|s| s.categories.weapon).collect();
    let model = train_classifier(&d.video, &y, &quick(1).classifier).unwrap();
    let base = accuracy(&model, &d.video, &y, 0.5).unwrap();
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(1));
    let py: Vec<bool> = order.iter().map(|&i| y[i]).collect();
    assert_eq!(accuracy(&model, &d.video.select(&order), &py, 0.5).unwrap(), base);
}

#[test]
fn five_runs_give_five_results() {
    let (_, data) = synth_data(3, 1048);
    let report = run_transfer_experiment(&data[0], &data[1..], None, &Category::BEHAVIOURS, &quick(5)).unwrap();
    assert_eq!(report.cells.len(), 3);
    for (_, cell) in &report.cells {
        assert_eq!(cell.runs.len(), 5);
        let seeds: Vec<u64> = cell.runs.iter().map(|r| r.seed).collect();
        assert_eq!(seeds, [0, 1, 2, 3, 4]);
        // no projector: both views coincide
        assert!(cell.runs.iter().all(|r| r.transferability == 0.0));
    }
}

#[test]
fn idm_with_no_threshold_trains_every_present_action() {
    let (_, data) = synth_data(2, 1048);
    let catalog = default_catalog();
    let report = idm_marginal(&data[0], &data[1..], None, &catalog, 0.0, &quick(1)).unwrap();
    for (pos, row) in report.rows.iter().enumerate() {
        let positives = data[0].samples.iter().filter(|s| s.actions[pos]).count();
        let usable = positives > 0 && positives < data[0].len();
        assert_eq!(matches!(row.outcome, IdmOutcome::Trained(_)), usable, "{}", row.action_id);
    }
    let strict = idm_marginal(&data[0], &data[1..], None, &catalog, 0.30, &quick(1)).unwrap();
    for row in &strict.rows {
        if row.frequency < 0.30 {
            assert_eq!(row.outcome, IdmOutcome::Skipped, "{}", row.action_id);
        }
    }
    assert!(strict.trained().count() < report.trained().count());
}
