use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use behave_core::dataset::{default_catalog, write_log, GameProfile, MouseMode, ProfileSet, TimestepRecord};
use behave_core::embeddings::EmbeddingTable;
use behave_core::preprocess::{write_manifest, CategoryFlags, WindowSample};
use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn behave(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_behave"))
        .current_dir(dir)
        .env_remove("BEHAVE_SEED")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = behave(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fails(dir: &Path, args: &[&str]) -> String {
    let out = behave(dir, args);
    assert!(!out.status.success(), "{args:?} should fail");
    String::from_utf8(out.stderr).unwrap()
}

fn hash(path: impl AsRef<Path>) -> String {
    let bytes = fs::read(path).unwrap();
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn value(report: &str, category: &str, metric: &str) -> f64 {
    report
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split('\t').collect::<Vec<_>>())
        .find(|f| f[1] == category && f[2] == "-" && f[3] == metric)
        .unwrap_or_else(|| panic!("no {category}/{metric} in\n{report}"))[4]
        .parse()
        .unwrap()
}

/// Small synthetic dataset plus text embeddings and a trained checkpoint.
fn workspace() -> TempDir {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--out-dir", "s", "--games", "3", "--frames-per-game", "1048", "--seed", "2"]);
    ok(d, &["embed-text", "--manifest", "s/manifest.tsv", "--dim", "32", "--out", "text.bhve"]);
    ok(
        d,
        &[
            "train", "--manifest", "s/manifest.tsv", "--video-table", "s/video.bhve", "--text-table", "text.bhve",
            "--epochs", "2", "--hidden", "32", "--out-checkpoint", "p.bhvp",
        ],
    );
    dir
}

fn record(game: &str, session: &str, frame: u64, ts: u64) -> TimestepRecord {
    TimestepRecord {
        game_id: game.into(),
        session_id: session.into(),
        frame_index: frame,
        timestamp_ms: ts,
        mouse_x: 500,
        mouse_y: 400,
        keys: vec![frame % 3 == 0; default_catalog().input_count()],
    }
}

/// One game with a 100-frame and a 37-frame session.
fn write_fixture_logs(dir: &Path) {
    let mut records: Vec<TimestepRecord> = (0..100).map(|f| record("alpha", "a", f, f * 62)).collect();
    records.extend((0..37).map(|f| record("alpha", "b", f, f * 62)));
    let mut buf = Vec::new();
    write_log(&mut buf, &records, &default_catalog()).unwrap();
    fs::create_dir_all(dir.join("logs")).unwrap();
    fs::write(dir.join("logs/alpha.csv"), buf).unwrap();
    let profiles = ProfileSet {
        games: vec![GameProfile::new("alpha", MouseMode::FreeForm, 20)],
    };
    fs::write(dir.join("profiles.toml"), profiles.to_toml()).unwrap();
}

#[test]
fn preprocess_window_counts_follow_the_formula() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    write_fixture_logs(d);
    let report = ok(d, &["preprocess", "--logs", "logs", "--profiles", "profiles.toml", "--out-manifest", "m.tsv"]);
    // floor((L - 16) / 8) + 1 per session
    let expected = (100 - 16) / 8 + 1 + (37 - 16) / 8 + 1;
    assert_eq!(value(&report, "all", "windows"), expected as f64);
    assert_eq!(fs::read_to_string(d.join("m.tsv")).unwrap().lines().count(), expected + 1);

    let report = ok(
        d,
        &["preprocess", "--logs", "logs", "--profiles", "profiles.toml", "--out-manifest", "m16.tsv", "--stride", "16"],
    );
    let n = value(&report, "all", "windows");
    assert_eq!(n, ((100 - 16) / 16 + 1 + (37 - 16) / 16 + 1) as f64);
    assert!((n - expected as f64 / 2.0).abs() <= 1.0);
    for metric in ["panning_pct", "navigation_pct", "weapon_pct"] {
        value(&report, "alpha", metric);
    }
}

#[test]
fn preprocess_names_a_game_without_profile() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    write_fixture_logs(d);
    fs::write(d.join("profiles.toml"), "").unwrap();
    let err = fails(d, &["preprocess", "--logs", "logs", "--profiles", "profiles.toml", "--out-manifest", "m.tsv"]);
    assert!(err.starts_with("error: MissingProfile:"), "{err}");
    assert!(err.contains("alpha"), "{err}");
    assert!(!d.join("m.tsv").exists());
}

#[test]
fn silhouette_of_the_four_point_fixture() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let samples: Vec<WindowSample> = [("a", 0), ("a", 8), ("b", 0), ("b", 8)]
        .iter()
        .map(|&(g, f)| WindowSample {
            sample_id: WindowSample::sample_id_for(g, "s", f),
            game_id: g.into(),
            session_id: "s".into(),
            start_frame: f,
            window_size: 16,
            actions: vec![false; 16],
            caption: "Idle".into(),
            categories: CategoryFlags::default(),
        })
        .collect();
    let mut buf = Vec::new();
    write_manifest(&mut buf, &samples).unwrap();
    fs::write(d.join("m.tsv"), buf).unwrap();
    let ids = samples.iter().map(|s| s.sample_id.clone()).collect();
    let table = EmbeddingTable::new(2, ids, vec![0.0, 0.0, 0.0, 1.0, 10.0, 0.0, 10.0, 1.0]).unwrap();
    let mut buf = Vec::new();
    table.write(&mut buf).unwrap();
    fs::write(d.join("t.bhve"), buf).unwrap();

    let report = ok(d, &["silhouette", "--manifest", "m.tsv", "--table", "t.bhve", "--labels", "game"]);
    assert!(report.contains("silhouette\tgame\t-\tsilhouette\t0.9002"), "{report}");
    assert!((value(&report, "game", "silhouette") - 0.9002).abs() < 1e-4);

    // every other label is single-class here
    let report = ok(d, &["silhouette", "--manifest", "m.tsv", "--table", "t.bhve"]);
    assert_eq!(value(&report, "weapon", "skipped"), 1.0);
    let err = fails(d, &["silhouette", "--manifest", "m.tsv", "--table", "t.bhve", "--labels", "weapon"]);
    assert!(err.starts_with("error: SingleCluster:"), "{err}");
}

#[test]
fn embed_text_is_reproducible_and_handles_an_empty_manifest() {
    let dir = workspace();
    let d = dir.path();
    ok(d, &["embed-text", "--manifest", "s/manifest.tsv", "--dim", "32", "--out", "again.bhve"]);
    assert_eq!(hash(d.join("text.bhve")), hash(d.join("again.bhve")));
    ok(d, &["embed-text", "--manifest", "s/manifest.tsv", "--dim", "32", "--seed", "1", "--out", "other.bhve"]);
    assert_ne!(hash(d.join("text.bhve")), hash(d.join("other.bhve")));

    let header = fs::read_to_string(d.join("s/manifest.tsv")).unwrap().lines().next().unwrap().to_string();
    fs::write(d.join("empty.tsv"), header + "\n").unwrap();
    ok(d, &["embed-text", "--manifest", "empty.tsv", "--dim", "32", "--out", "empty.bhve"]);
    let bytes = fs::read(d.join("empty.bhve")).unwrap();
    assert_eq!(bytes.len(), 16);
    assert_eq!(&bytes[..4], b"BHVE");
}

#[test]
fn train_is_reproducible_and_zero_rate_keeps_the_initialisation() {
    let dir = workspace();
    let d = dir.path();
    let train = |out: &str, extra: &[&str]| {
        let mut args = vec![
            "train", "--manifest", "s/manifest.tsv", "--video-table", "s/video.bhve", "--text-table", "text.bhve",
            "--hidden", "32", "--out-checkpoint", out,
        ];
        args.extend_from_slice(extra);
        ok(d, &args)
    };
    let first = train("a.bhvp", &["--epochs", "2"]);
    let second = train("b.bhvp", &["--epochs", "2"]);
    assert_eq!(hash(d.join("a.bhvp")), hash(d.join("b.bhvp")));
    assert_eq!(first.replace("a.bhvp", "X"), second.replace("b.bhvp", "X"));
    train("c.bhvp", &["--epochs", "2", "--seed", "3"]);
    assert_ne!(hash(d.join("a.bhvp")), hash(d.join("c.bhvp")));

    train("z1.bhvp", &["--epochs", "1", "--lr", "0"]);
    train("z3.bhvp", &["--epochs", "3", "--lr", "0"]);
    assert_eq!(hash(d.join("z1.bhvp")), hash(d.join("z3.bhvp")));

    train("log.bhvp", &["--epochs", "2", "--loss-log", "loss.tsv"]);
    let log = fs::read_to_string(d.join("loss.tsv")).unwrap();
    assert_eq!(log.lines().count(), 3);
    assert!(first.contains("train\tcosine\t1\tloss\t"));
}

#[test]
fn config_file_flags_and_seed_environment() {
    let dir = workspace();
    let d = dir.path();
    fs::write(
        d.join("run.toml"),
        "seed = 11\n\n[train]\nepochs = 1\nhidden = [8]\nmanifest = \"s/manifest.tsv\"\nvideo-table = \"s/video.bhve\"\ntext-table = \"text.bhve\"\nout-checkpoint = \"cfg.bhvp\"\n",
    )
    .unwrap();
    let report = ok(d, &["--config", "run.toml", "train"]);
    assert!(report.contains("# epochs = 1\n"), "{report}");
    assert!(report.contains("# seed = 11\n"), "{report}");
    let report = ok(d, &["train", "--config", "run.toml", "--epochs", "2", "--seed", "4"]);
    assert!(report.contains("# epochs = 2\n") && report.contains("# seed = 4\n"), "{report}");

    let out = Command::new(env!("CARGO_BIN_EXE_behave"))
        .current_dir(d)
        .env("BEHAVE_SEED", "9")
        .args(["--config", "run.toml", "train"])
        .output()
        .unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().contains("# seed = 9\n"));

    fs::write(d.join("bad.toml"), "[train]\nepoch = 3\n").unwrap();
    let err = fails(d, &["--config", "bad.toml", "train"]);
    assert!(err.starts_with("error: InvalidConfig:"), "{err}");
}

#[test]
fn every_subcommand_is_byte_reproducible() {
    let dir = workspace();
    let d = dir.path();
    let runs: Vec<(Vec<&str>, Option<&str>)> = vec![
        (vec!["synth", "--out-dir", "s2", "--games", "2", "--frames-per-game", "1048", "--seed", "2"], Some("s2/video.bhve")),
        (vec!["preprocess", "--logs", "s/logs", "--profiles", "s/profiles.toml", "--out-manifest", "OUT"], None),
        (vec!["embed-text", "--manifest", "s/manifest.tsv", "--dim", "16", "--out", "OUT"], None),
        (
            vec![
                "train", "--manifest", "s/manifest.tsv", "--video-table", "s/video.bhve", "--text-table", "text.bhve",
                "--epochs", "1", "--hidden", "16", "--dropout", "0.3", "--out-checkpoint", "OUT",
            ],
            None,
        ),
        (vec!["project", "--manifest", "s/manifest.tsv", "--video-table", "s/video.bhve", "--checkpoint", "p.bhvp", "--out", "OUT"], None),
        (vec!["silhouette", "--manifest", "s/manifest.tsv", "--table", "s/video.bhve", "--subsample-max", "100", "--seed", "3"], None),
        (vec!["classify", "--manifest", "s/manifest.tsv", "--table", "s/video.bhve", "--target", "fire", "--epochs", "2"], None),
        (
            vec![
                "transfer", "--manifest", "s/manifest.tsv", "--table", "s/video.bhve", "--checkpoint", "p.bhvp", "--source",
                "pubg", "--targets", "payday3,insurgency", "--runs", "2", "--epochs", "2",
            ],
            None,
        ),
        (
            vec![
                "idm", "--manifest", "s/manifest.tsv", "--table", "s/video.bhve", "--source", "pubg", "--targets", "payday3",
                "--runs", "1", "--epochs", "1",
            ],
            None,
        ),
        (vec!["export-2d", "--manifest", "s/manifest.tsv", "--table", "s/video.bhve", "--out", "OUT"], None),
    ];
    for (args, extra) in runs {
        let mut outputs = Vec::new();
        for round in 0..2 {
            let name = format!("out{round}");
            let a: Vec<&str> = args.iter().map(|x| if *x == "OUT" { name.as_str() } else { x }).collect();
            let stdout = ok(d, &a).replace(&name, "OUT");
            let file = if a.contains(&name.as_str()) { Some(hash(d.join(&name))) } else { None };
            let extra = extra.map(|p| hash(d.join(p)));
            outputs.push((stdout, file, extra));
        }
        assert_eq!(outputs[0], outputs[1], "{}", args[0]);
    }
    let leftovers: Vec<PathBuf> = fs::read_dir(d)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.to_string_lossy().ends_with(".tmp"))
        .collect();
    assert!(leftovers.is_empty(), "{leftovers:?}");
}

#[test]
fn reports_echo_the_seed() {
    let dir = workspace();
    let d = dir.path();
    let report = ok(
        d,
        &["transfer", "--manifest", "s/manifest.tsv", "--table", "s/video.bhve", "--source", "pubg", "--targets", "payday3", "--runs", "1", "--epochs", "1", "--seed", "5"],
    );
    assert!(report.starts_with("# behave transfer\n"));
    assert!(report.contains("# seed = 5\n"));
    // no projector: aligned and unaligned coincide
    for c in ["panning", "navigation", "weapon"] {
        assert_eq!(value(&report, c, "transferability"), 0.0);
    }
}

#[test]
fn export_2d_writes_one_row_per_sample() {
    let dir = workspace();
    let d = dir.path();
    ok(d, &["export-2d", "--manifest", "s/manifest.tsv", "--table", "s/video.bhve", "--checkpoint", "p.bhvp", "--label", "weapon", "--out", "xy.tsv"]);
    let manifest_rows = fs::read_to_string(d.join("s/manifest.tsv")).unwrap().lines().count() - 1;
    let text = fs::read_to_string(d.join("xy.tsv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x\ty\tlabel"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), manifest_rows);
    assert!(rows.iter().all(|r| {
        let f: Vec<&str> = r.split('\t').collect();
        f.len() == 3 && f[0].parse::<f64>().is_ok() && f[1].parse::<f64>().is_ok() && (f[2] == "0" || f[2] == "1")
    }));
}

#[test]
fn errors_name_the_failure_and_exit_nonzero() {
    let dir = workspace();
    let d = dir.path();
    let err = fails(d, &["project", "--manifest", "s/manifest.tsv", "--video-table", "text.bhve", "--checkpoint", "p.bhvp", "--out", "x.bhve"]);
    assert!(err.starts_with("error: DimMismatch:"), "{err}");
    let err = fails(d, &["silhouette", "--manifest", "missing.tsv", "--table", "s/video.bhve"]);
    assert!(err.starts_with("error: Io:"), "{err}");
    let err = fails(d, &["transfer", "--manifest", "s/manifest.tsv", "--table", "s/video.bhve", "--source", "nowhere", "--targets", "pubg"]);
    assert!(err.starts_with("error: UnknownGame:"), "{err}");
    fs::write(d.join("junk.bhve"), b"NOPE\x01\0\0\0").unwrap();
    let err = fails(d, &["silhouette", "--manifest", "s/manifest.tsv", "--table", "junk.bhve"]);
    assert!(err.starts_with("error: BadMagic:"), "{err}");
    let err = fails(d, &["embed-text", "--manifest", "s/manifest.tsv"]);
    assert!(err.starts_with("error: InvalidConfig:") && err.contains("--out"), "{err}");
}
