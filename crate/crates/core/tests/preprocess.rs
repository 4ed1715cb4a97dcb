mod support;

use behave_core::dataset::{default_catalog, Category};
use behave_core::preprocess::{frame_labels, run_pipeline, PipelineConfig};

#[test]
fn reload_press_labels_the_following_sixteen_frames() {
    let (records, profile) = support::fixture_48();
    let catalog = default_catalog();
    let reload = catalog.position("reload").unwrap();
    let labels = frame_labels(&records, &profile, &catalog);
    let on: Vec<usize> = (0..48).filter(|&f| labels[f].labels[reload]).collect();
    assert_eq!(on, (13..=28).collect::<Vec<_>>());
    for pos in 0..catalog.len() {
        let mine: Vec<bool> = labels.iter().map(|l| l.labels[pos]).collect();
        assert_eq!(mine, support::reference_labels(&records, &profile, &catalog, pos), "{}", catalog.entry(pos).action_id);
    }
}

#[test]
fn pipeline_matches_the_slow_reference() {
    let (records, profile) = support::fixture_48();
    let catalog = default_catalog();
    let got = run_pipeline(&records, &profile, &catalog, &PipelineConfig::default()).unwrap();
    let want = support::reference_windows(&records, &profile);
    assert_eq!(got.len(), 5);
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(&want) {
        assert_eq!(g.start_frame as usize, w.start);
        assert_eq!(g.actions, w.actions, "window {}", w.start);
        assert_eq!(g.caption, w.caption);
        let cats = [Category::Panning, Category::Navigation, Category::Weapon].map(|c| g.categories.get(c));
        assert_eq!(cats, w.categories);
    }
    assert_eq!(got[0].caption, "Move Forward, Interact");
    assert_eq!(got[2].caption, "Pan Right, Reload Gun");
    assert_eq!(got[0].sample_id, "fixture/s0/0");
}

#[test]
fn a_timestamp_gap_splits_the_fixture() {
    let (mut records, profile) = support::fixture_48();
    for r in records.iter_mut().skip(20) {
        r.timestamp_ms += 10_000;
    }
    let got = run_pipeline(&records, &profile, &default_catalog(), &PipelineConfig::default()).unwrap();
    // 20 frames give one window, 28 give two
    let starts: Vec<u64> = got.iter().map(|w| w.start_frame).collect();
    assert_eq!(starts, [0, 20, 28]);
}
