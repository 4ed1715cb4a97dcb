use behave_core::dataset::{default_catalog, parse_log, write_log, Category};
use behave_core::embeddings::PairedDataset;
use behave_core::eval::{dataset_silhouettes, LabelKind};
use behave_core::preprocess::{run_pipeline, PipelineConfig, WindowSample};
use behave_core::synth::{csgo_like_style, generate_foundation_embeddings, generate_logs, SynthConfig};

fn windows(config: &SynthConfig) -> Vec<WindowSample> {
    let catalog = default_catalog();
    generate_logs(config)
        .unwrap()
        .iter()
        .flat_map(|g| run_pipeline(&g.records, &g.profile, &catalog, &PipelineConfig::default()).unwrap())
        .collect()
}

fn rate(samples: &[WindowSample], category: Category) -> f64 {
    samples.iter().filter(|s| s.categories.get(category)).count() as f64 / samples.len() as f64
}

#[test]
fn navigation_frequency_tracks_the_target() {
    let mut config = SynthConfig::new(2, 11);
    config.games[0].frequencies.navigation = 0.85;
    config.frames_per_game = 16 * 1048;
    let samples = windows(&config);
    let first: Vec<_> = samples.iter().filter(|s| s.game_id == config.games[0].game_id).cloned().collect();
    assert!(first.len() >= 2000);
    let f = rate(&first, Category::Navigation);
    assert!((0.80..=0.90).contains(&f), "navigation rate {f}");
}

#[test]
fn every_preset_lands_near_its_profile() {
    let config = SynthConfig::new(6, 3);
    let samples = windows(&config);
    for g in &config.games {
        let mine: Vec<_> = samples.iter().filter(|s| s.game_id == g.game_id).cloned().collect();
        assert!(mine.len() >= 500, "{}: {} windows", g.game_id, mine.len());
        for c in Category::BEHAVIOURS {
            let f = rate(&mine, c);
            assert!((f - g.frequencies.get(c)).abs() < 0.08, "{} {}: {f}", g.game_id, c.name());
        }
    }
}

#[test]
fn logs_are_deterministic_and_survive_the_csv_round_trip() {
    let config = SynthConfig::new(2, 9);
    let a = generate_logs(&config).unwrap();
    assert_eq!(a, generate_logs(&config).unwrap());
    assert_eq!(a.len(), 2);
    assert_ne!(a[0].profile.game_id, a[1].profile.game_id);
    let catalog = default_catalog();
    for g in &a {
        let mut buf = Vec::new();
        write_log(&mut buf, &g.records, &catalog).unwrap();
        assert_eq!(parse_log(&buf[..], &catalog).unwrap(), g.records);
    }
    let mut other = config.clone();
    other.seed = 10;
    assert_ne!(generate_logs(&other).unwrap(), a);
}

#[test]
fn equal_actions_embed_identically_without_gap_or_noise() {
    let mut config = SynthConfig::new(2, 1);
    config.embedding.game_gap = 0.0;
    config.embedding.noise = 0.0;
    let samples = windows(&config);
    let table = generate_foundation_embeddings(&samples, &config).unwrap();
    let a = samples.iter().position(|s| s.game_id == config.games[0].game_id).unwrap();
    let b = samples
        .iter()
        .position(|s| s.game_id == config.games[1].game_id && s.actions == samples[a].actions)
        .expect("some window repeats the action set");
    assert_eq!(table.row(a), table.row(b));
    assert_eq!(table, generate_foundation_embeddings(&samples, &config).unwrap());
}

#[test]
fn unknown_game_is_rejected() {
    let config = SynthConfig::new(2, 1);
    let mut samples = windows(&config);
    samples.truncate(3);
    samples[2].game_id = "elsewhere".into();
    assert!(matches!(
        generate_foundation_embeddings(&samples, &config),
        Err(behave_core::Error::UnknownGame(_))
    ));
}

fn silhouettes(config: &SynthConfig) -> (Vec<f64>, f64) {
    let samples = windows(config);
    let video = generate_foundation_embeddings(&samples, config).unwrap();
    let data = PairedDataset { video, samples };
    let reports = dataset_silhouettes(&data, 5000, 0).unwrap();
    let game = reports.iter().find(|r| r.label_kind == LabelKind::GameId).unwrap().score;
    let behaviour = reports
        .iter()
        .filter(|r| r.label_kind != LabelKind::GameId)
        .map(|r| r.score)
        .collect();
    (behaviour, game)
}

#[test]
fn large_style_gap_clusters_by_game() {
    let (behaviour, game) = silhouettes(&SynthConfig::new(2, 4));
    assert!(game > 0.2, "game {game}");
    assert!(behaviour.iter().all(|&b| b < 0.1), "{behaviour:?}");
}

#[test]
fn without_style_gap_behaviour_dominates() {
    let mut config = SynthConfig::new(2, 4);
    config.embedding.game_gap = 0.0;
    let (behaviour, game) = silhouettes(&config);
    assert!(behaviour.iter().all(|&b| b > game), "{behaviour:?} vs {game}");
}

#[test]
fn game_silhouette_grows_with_the_gap() {
    let mut last = f64::NEG_INFINITY;
    for gap in [0.0, 1.0, 3.0] {
        let mut config = SynthConfig::new(2, 4);
        config.embedding.game_gap = gap;
        let (_, game) = silhouettes(&config);
        assert!(game > last, "gap {gap}: {game} after {last}");
        last = game;
    }
}

#[test]
fn csgo_like_profile_has_six_frequent_actions() {
    let mut config = SynthConfig::new(2, 2);
    config.games[0] = csgo_like_style();
    config.frames_per_game = 8 * 1048;
    let samples: Vec<_> = windows(&config).into_iter().filter(|s| s.game_id == "csgo").collect();
    let catalog = default_catalog();
    let freq: Vec<(String, f64)> = catalog
        .entries()
        .iter()
        .enumerate()
        .map(|(p, e)| {
            let n = samples.iter().filter(|s| s.actions[p]).count();
            (e.action_id.clone(), n as f64 / samples.len() as f64)
        })
        .collect();
    let frequent: Vec<&str> = freq.iter().filter(|(_, f)| *f >= 0.30).map(|(a, _)| a.as_str()).collect();
    assert_eq!(
        frequent,
        ["pan_left", "pan_right", "fire", "forward", "strafe_left", "strafe_right"],
        "{freq:?}"
    );
    for absent in ["aim", "sprint", "interact"] {
        assert_eq!(freq.iter().find(|(a, _)| a == absent).unwrap().1, 0.0);
    }
    // every frequent action clears the threshold with room to spare
    assert!(freq.iter().all(|(_, f)| *f == 0.0 || (*f - 0.30).abs() > 0.03), "{freq:?}");
}
