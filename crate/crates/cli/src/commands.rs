use std::fs;
use std::io::Write;

use anyhow::{Context, Result};
use behave_core::align::{save_checkpoint, train_alignment, AdamConfig, LossKind, TrainConfig};
use behave_core::dataset::{default_catalog, write_log, Category, ProfileSet};
use behave_core::embeddings::{PairedDataset, TextEmbedder, TextEmbedderConfig, DEFAULT_TEXT_DIM};
use behave_core::eval::{
    holdout_accuracy, idm_marginal, idm_records, pca_2d, run_transfer_experiment, silhouette_many, silhouette_records,
    transfer_records, ClassifierConfig, LabelKind, Record, TransferConfig, DEFAULT_MIN_FREQ, DEFAULT_SUBSAMPLE_MAX,
};
use behave_core::preprocess::{run_pipeline, write_manifest, PipelineConfig, WindowSample};
use behave_core::synth::{generate_foundation_embeddings, generate_logs, SynthConfig};
use behave_core::Error;

use crate::args::*;
use crate::io::{load_dataset, need, read_checkpoint, read_logs, read_samples, read_table, write_atomic, Report};

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Error::InvalidConfig(msg.into()).into()
}

fn parse_category(name: &str) -> Result<Category> {
    Category::BEHAVIOURS
        .into_iter()
        .find(|c| c.name() == name)
        .ok_or_else(|| invalid(format!("unknown behaviour category `{name}`")))
}

fn category_rates(samples: &[WindowSample]) -> [f64; 3] {
    Category::BEHAVIOURS.map(|c| {
        let n = samples.iter().filter(|s| s.categories.get(c)).count();
        if samples.is_empty() {
            0.0
        } else {
            100.0 * n as f64 / samples.len() as f64
        }
    })
}

/// Window count and per-category frequency (%) rows, per game and overall.
fn frequency_table(report: &mut Report, experiment: &str, samples: &[WindowSample]) {
    let mut games: Vec<&str> = Vec::new();
    for s in samples {
        if !games.contains(&s.game_id.as_str()) {
            games.push(&s.game_id);
        }
    }
    let mut row = |name: &str, rows: &[WindowSample]| {
        report.push(Record::new(experiment, name, None, "windows", rows.len() as f64));
        for (c, rate) in Category::BEHAVIOURS.iter().zip(category_rates(rows)) {
            report.push(Record::new(experiment, name, None, &format!("{}_pct", c.name()), rate));
        }
    };
    for g in &games {
        let mine: Vec<WindowSample> = samples.iter().filter(|s| s.game_id == *g).cloned().collect();
        row(g, &mine);
    }
    row("all", samples);
}

pub fn preprocess(args: PreprocessArgs) -> Result<()> {
    let defaults = PipelineConfig::default();
    let args = PreprocessArgs {
        window: Some(args.window.unwrap_or(defaults.window_size)),
        stride: Some(args.stride.unwrap_or(defaults.stride)),
        max_gap_ms: Some(args.max_gap_ms.unwrap_or(defaults.max_gap_ms)),
        ..args
    };
    let mut report = Report::new("preprocess", &args)?;
    let config = PipelineConfig {
        window_size: args.window.unwrap(),
        stride: args.stride.unwrap(),
        max_gap_ms: args.max_gap_ms.unwrap(),
    };
    let logs = need(args.logs, "logs")?;
    let profiles_path = need(args.profiles, "profiles")?;
    let out = need(args.out_manifest, "out-manifest")?;

    let text = fs::read_to_string(&profiles_path).with_context(|| format!("cannot read {}", profiles_path.display()))?;
    let profiles = ProfileSet::from_toml(&text).with_context(|| format!("in {}", profiles_path.display()))?;
    let catalog = default_catalog();
    let mut samples = Vec::new();
    for (game, records) in read_logs(&logs)? {
        let profile = profiles.get(&game)?;
        samples.extend(run_pipeline(&records, profile, &catalog, &config)?);
    }
    write_atomic(&out, |w| Ok(write_manifest(w, &samples)?))?;
    frequency_table(&mut report, "preprocess", &samples);
    report.print();
    Ok(())
}

pub fn embed_text(args: EmbedTextArgs) -> Result<()> {
    let args = EmbedTextArgs {
        dim: Some(args.dim.unwrap_or(DEFAULT_TEXT_DIM)),
        seed: Some(args.seed.unwrap_or(0)),
        ..args
    };
    let mut report = Report::new("embed-text", &args)?;
    let samples = read_samples(&need(args.manifest, "manifest")?)?;
    let out = need(args.out, "out")?;
    let embedder = TextEmbedder::new(
        TextEmbedderConfig {
            dim: args.dim.unwrap(),
            seed: args.seed.unwrap(),
        },
        &default_catalog(),
    )?;
    let table = embedder.embed_samples(&samples)?;
    write_atomic(&out, |w| Ok(table.write(w)?))?;
    let mut captions: Vec<&str> = samples.iter().map(|s| s.caption.as_str()).collect();
    captions.sort_unstable();
    captions.dedup();
    report.push(Record::new("embed-text", "all", None, "rows", table.len() as f64));
    report.push(Record::new("embed-text", "all", None, "dim", table.dim() as f64));
    report.push(Record::new("embed-text", "all", None, "distinct_captions", captions.len() as f64));
    report.print();
    Ok(())
}

pub fn train(args: TrainArgs) -> Result<()> {
    let d = TrainConfig::default();
    let args = TrainArgs {
        loss: Some(args.loss.unwrap_or_else(|| "cosine".into())),
        epochs: Some(args.epochs.unwrap_or(d.epochs)),
        lr: Some(args.lr.unwrap_or(d.adam.learning_rate)),
        batch: Some(args.batch.unwrap_or(d.batch_size)),
        dropout: Some(args.dropout.unwrap_or(d.dropout_rate)),
        margin: Some(args.margin.unwrap_or(d.margin)),
        hidden: Some(args.hidden.unwrap_or(d.hidden.clone())),
        seed: Some(args.seed.unwrap_or(d.seed)),
        ..args
    };
    let mut report = Report::new("train", &args)?;
    let loss: LossKind = args.loss.as_deref().unwrap().parse()?;
    let config = TrainConfig {
        epochs: args.epochs.unwrap(),
        batch_size: args.batch.unwrap(),
        adam: AdamConfig {
            learning_rate: args.lr.unwrap(),
            ..AdamConfig::default()
        },
        dropout_rate: args.dropout.unwrap(),
        loss,
        margin: args.margin.unwrap(),
        seed: args.seed.unwrap(),
        hidden: args.hidden.clone().unwrap(),
    };
    config.validate()?;
    let samples = read_samples(&need(args.manifest, "manifest")?)?;
    let video = read_table(&need(args.video_table, "video-table")?, &samples)?;
    let text = read_table(&need(args.text_table, "text-table")?, &samples)?;
    let out = need(args.out_checkpoint, "out-checkpoint")?;

    let trained = train_alignment(&video, &text, &config)?;
    write_atomic(&out, |w| Ok(save_checkpoint(w, &trained.projector)?))?;
    if let Some(log) = &args.loss_log {
        write_atomic(log, |w| {
            writeln!(w, "epoch\tloss")?;
            for (e, l) in trained.epoch_losses.iter().enumerate() {
                writeln!(w, "{}\t{l:.9}", e + 1)?;
            }
            Ok(())
        })?;
    }
    let name = args.loss.as_deref().unwrap();
    for (e, l) in trained.epoch_losses.iter().enumerate() {
        report.push(Record::new("train", name, Some(e + 1), "loss", *l));
    }
    report.push(Record::new("train", name, None, "pairs", video.len() as f64));
    report.print();
    eprintln!("trained in {:.2?}", trained.wall_time);
    Ok(())
}

pub fn project(args: ProjectArgs) -> Result<()> {
    let mut report = Report::new("project", &args)?;
    let samples = read_samples(&need(args.manifest, "manifest")?)?;
    let video = read_table(&need(args.video_table, "video-table")?, &samples)?;
    let projector = read_checkpoint(&need(args.checkpoint, "checkpoint")?)?;
    let out = need(args.out, "out")?;
    let projected = projector.project(&video)?;
    write_atomic(&out, |w| Ok(projected.write(w)?))?;
    report.push(Record::new("project", "all", None, "rows", projected.len() as f64));
    report.push(Record::new("project", "all", None, "dim", projected.dim() as f64));
    report.print();
    Ok(())
}

fn select_games(data: PairedDataset, games: &Option<Vec<String>>) -> Result<PairedDataset> {
    match games {
        None => Ok(data),
        Some(games) => {
            let names: Vec<&str> = games.iter().map(String::as_str).collect();
            let picked = data.filter_games(&names);
            if picked.is_empty() {
                return Err(Error::EmptyDataset.into());
            }
            Ok(picked)
        }
    }
}

fn dense(labels: impl Iterator<Item = String>) -> Vec<usize> {
    let mut seen: Vec<String> = Vec::new();
    labels
        .map(|l| match seen.iter().position(|s| *s == l) {
            Some(i) => i,
            None => {
                seen.push(l);
                seen.len() - 1
            }
        })
        .collect()
}

pub fn silhouette(args: SilhouetteArgs) -> Result<()> {
    let args = SilhouetteArgs {
        labels: Some(args.labels.unwrap_or_else(|| "all".into())),
        subsample_max: Some(args.subsample_max.unwrap_or(DEFAULT_SUBSAMPLE_MAX)),
        seed: Some(args.seed.unwrap_or(0)),
        ..args
    };
    let mut report = Report::new("silhouette", &args)?;
    let data = load_dataset(
        &need(args.manifest.clone(), "manifest")?,
        &need(args.table.clone(), "table")?,
        args.checkpoint.as_deref(),
    )?;
    let data = select_games(data, &args.games)?;
    let which = args.labels.as_deref().unwrap();
    let mut kinds = Vec::new();
    if which == "all" || which == "game" {
        kinds.push(LabelKind::GameId);
    }
    for c in Category::BEHAVIOURS {
        if which == "all" || which == c.name() {
            kinds.push(LabelKind::Behaviour(c));
        }
    }
    if kinds.is_empty() {
        return Err(invalid(format!("unknown label kind `{which}`")));
    }
    let labelings: Vec<(LabelKind, Vec<usize>)> = kinds
        .into_iter()
        .map(|k| {
            let labels = match &k {
                LabelKind::Behaviour(c) => data.samples.iter().map(|s| s.categories.get(*c) as usize).collect(),
                _ => dense(data.samples.iter().map(|s| s.game_id.clone())),
            };
            (k, labels)
        })
        .collect();
    // with every label requested, degenerate labelings are reported rather than fatal
    let (usable, degenerate): (Vec<_>, Vec<_>) = labelings
        .iter()
        .partition(|(_, l)| which != "all" || l.iter().any(|&x| x != l[0]));
    let refs: Vec<(LabelKind, &[usize])> = usable.iter().map(|(k, l)| (k.clone(), l.as_slice())).collect();
    let reports = if refs.is_empty() {
        Vec::new()
    } else {
        silhouette_many(&data.video, &refs, args.subsample_max.unwrap(), args.seed.unwrap())?
    };
    for r in silhouette_records("silhouette", &reports) {
        report.push(r);
    }
    for (k, _) in degenerate {
        report.push(Record::new("silhouette", &k.name(), None, "skipped", 1.0));
    }
    if let Some(seed) = reports.iter().find_map(|r| r.subsample_seed) {
        report.push(Record::new("silhouette", "all", None, "subsample_seed", seed as f64));
    }
    report.print();
    Ok(())
}

fn transfer_config(c: &ClassifierArgs, runs: usize, seed: u64) -> Result<TransferConfig> {
    let d = ClassifierConfig::default();
    let t = TransferConfig::default();
    let hidden = match c.hidden.as_deref() {
        None => d.hidden,
        Some([a, b]) => (*a, *b),
        Some(_) => return Err(invalid("--hidden takes exactly two widths")),
    };
    Ok(TransferConfig {
        runs,
        seed,
        test_fraction: c.test_fraction.unwrap_or(t.test_fraction),
        threshold: c.threshold.unwrap_or(t.threshold),
        classifier: ClassifierConfig {
            hidden,
            dropout_rate: c.dropout.unwrap_or(d.dropout_rate),
            adam: AdamConfig {
                learning_rate: c.lr.unwrap_or(d.adam.learning_rate),
                ..AdamConfig::default()
            },
            epochs: c.epochs.unwrap_or(d.epochs),
            batch_size: c.batch.unwrap_or(d.batch_size),
            seed,
            balanced: c.balanced.unwrap_or(d.balanced),
        },
    })
}

/// Fills every unset classifier setting with its default so the echo is complete.
fn complete(c: ClassifierArgs) -> ClassifierArgs {
    let d = ClassifierConfig::default();
    let t = TransferConfig::default();
    ClassifierArgs {
        epochs: Some(c.epochs.unwrap_or(d.epochs)),
        batch: Some(c.batch.unwrap_or(d.batch_size)),
        lr: Some(c.lr.unwrap_or(d.adam.learning_rate)),
        dropout: Some(c.dropout.unwrap_or(d.dropout_rate)),
        hidden: Some(c.hidden.unwrap_or(vec![d.hidden.0, d.hidden.1])),
        balanced: Some(c.balanced.unwrap_or(d.balanced)),
        test_fraction: Some(c.test_fraction.unwrap_or(t.test_fraction)),
        threshold: Some(c.threshold.unwrap_or(t.threshold)),
    }
}

pub fn classify(args: ClassifyArgs) -> Result<()> {
    let args = ClassifyArgs {
        seed: Some(args.seed.unwrap_or(0)),
        classifier: complete(args.classifier),
        ..args
    };
    let mut report = Report::new("classify", &args)?;
    let target = need(args.target.clone(), "target")?;
    let data = load_dataset(
        &need(args.manifest.clone(), "manifest")?,
        &need(args.table.clone(), "table")?,
        args.checkpoint.as_deref(),
    )?;
    let data = select_games(data, &args.games)?;
    let y: Vec<bool> = match parse_category(&target) {
        Ok(c) => data.samples.iter().map(|s| s.categories.get(c)).collect(),
        Err(_) => {
            let pos = default_catalog()
                .position(&target)
                .ok_or_else(|| Error::UnknownAction(target.clone()))?;
            data.samples.iter().map(|s| s.actions[pos]).collect()
        }
    };
    let config = transfer_config(&args.classifier, 1, args.seed.unwrap())?;
    let r = holdout_accuracy(&data.video, &y, &config)?;
    for (metric, value) in [
        ("train_rows", r.train_rows as f64),
        ("test_rows", r.test_rows as f64),
        ("train_accuracy", r.train_accuracy),
        ("test_accuracy", r.test_accuracy),
        ("majority_rate", r.majority_rate),
    ] {
        report.push(Record::new("classify", &target, None, metric, value));
    }
    report.print();
    Ok(())
}

struct TransferInputs {
    source: PairedDataset,
    targets: Vec<PairedDataset>,
    projector: Option<behave_core::align::MlpProjector>,
    config: TransferConfig,
}

fn transfer_inputs(args: &TransferArgs) -> Result<TransferInputs> {
    let samples = read_samples(&need(args.manifest.clone(), "manifest")?)?;
    let video = read_table(&need(args.table.clone(), "table")?, &samples)?;
    let projector = args.checkpoint.as_deref().map(read_checkpoint).transpose()?;
    let data = PairedDataset { video, samples };
    let pick = |game: &str| {
        let d = data.filter_games(&[game]);
        if d.is_empty() {
            Err(anyhow::Error::from(Error::UnknownGame(game.to_string())))
        } else {
            Ok(d)
        }
    };
    let source = pick(&need(args.source.clone(), "source")?)?;
    let targets = need(args.targets.clone(), "targets")?
        .iter()
        .map(|g| pick(g))
        .collect::<Result<Vec<_>>>()?;
    let config = transfer_config(&args.classifier, args.runs.unwrap(), args.seed.unwrap())?;
    Ok(TransferInputs {
        source,
        targets,
        projector,
        config,
    })
}

fn complete_transfer(args: TransferArgs) -> TransferArgs {
    TransferArgs {
        runs: Some(args.runs.unwrap_or(TransferConfig::default().runs)),
        seed: Some(args.seed.unwrap_or(0)),
        categories: Some(
            args.categories
                .unwrap_or_else(|| Category::BEHAVIOURS.iter().map(|c| c.name().to_string()).collect()),
        ),
        classifier: complete(args.classifier),
        ..args
    }
}

pub fn transfer(args: TransferArgs) -> Result<()> {
    let args = complete_transfer(args);
    let mut report = Report::new("transfer", &args)?;
    let categories = args
        .categories
        .iter()
        .flatten()
        .map(|c| parse_category(c))
        .collect::<Result<Vec<_>>>()?;
    let inputs = transfer_inputs(&args)?;
    let result = run_transfer_experiment(
        &inputs.source,
        &inputs.targets,
        inputs.projector.as_ref(),
        &categories,
        &inputs.config,
    )?;
    for r in transfer_records("transfer", &result) {
        report.push(r);
    }
    report.print();
    Ok(())
}

pub fn idm(args: IdmArgs) -> Result<()> {
    let args = IdmArgs {
        transfer: TransferArgs {
            categories: None,
            ..complete_transfer(args.transfer)
        },
        min_freq: Some(args.min_freq.unwrap_or(DEFAULT_MIN_FREQ)),
    };
    let mut report = Report::new("idm", &args)?;
    let inputs = transfer_inputs(&args.transfer)?;
    let result = idm_marginal(
        &inputs.source,
        &inputs.targets,
        inputs.projector.as_ref(),
        &default_catalog(),
        args.min_freq.unwrap(),
        &inputs.config,
    )?;
    for r in idm_records("idm", &result) {
        report.push(r);
    }
    report.print();
    Ok(())
}

pub fn synth(args: SynthArgs) -> Result<()> {
    let mut config = match &args.spec {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            toml::from_str::<SynthConfig>(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?
        }
        None => SynthConfig::new(args.games.unwrap_or(6), args.seed.unwrap_or(0)),
    };
    if args.spec.is_some() {
        if let Some(n) = args.games {
            if n != config.games.len() {
                return Err(invalid("--games conflicts with the game list in --spec"));
            }
        }
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(f) = args.frames_per_game {
        config.frames_per_game = f;
    }
    if let Some(d) = args.dim {
        config.embedding.dim = d;
    }
    if let Some(g) = args.game_gap {
        config.embedding.game_gap = g;
    }
    if let Some(n) = args.noise {
        config.embedding.noise = n;
    }
    config.validate()?;
    let out_dir = need(args.out_dir.clone(), "out-dir")?;
    let args = SynthArgs {
        games: Some(config.games.len()),
        seed: Some(config.seed),
        frames_per_game: Some(config.frames_per_game),
        dim: Some(config.embedding.dim),
        game_gap: Some(config.embedding.game_gap),
        noise: Some(config.embedding.noise),
        ..args
    };
    let mut report = Report::new("synth", &args)?;

    let logs_dir = out_dir.join("logs");
    fs::create_dir_all(&logs_dir).with_context(|| format!("cannot create {}", logs_dir.display()))?;
    let catalog = default_catalog();
    let logs = generate_logs(&config)?;
    let mut samples = Vec::new();
    for (i, g) in logs.iter().enumerate() {
        // the index prefix keeps directory order equal to manifest order
        write_atomic(&logs_dir.join(format!("{i:02}_{}.csv", g.profile.game_id)), |w| {
            Ok(write_log(w, &g.records, &catalog)?)
        })?;
        samples.extend(run_pipeline(&g.records, &g.profile, &catalog, &PipelineConfig::default())?);
    }
    let profiles = ProfileSet {
        games: logs.iter().map(|g| g.profile.clone()).collect(),
    };
    write_atomic(&out_dir.join("profiles.toml"), |w| Ok(w.write_all(profiles.to_toml().as_bytes())?))?;
    write_atomic(&out_dir.join("manifest.tsv"), |w| Ok(write_manifest(w, &samples)?))?;
    let video = generate_foundation_embeddings(&samples, &config)?;
    write_atomic(&out_dir.join("video.bhve"), |w| Ok(video.write(w)?))?;
    let spec = toml::to_string(&config).context("cannot serialise the synth config")?;
    write_atomic(&out_dir.join("synth.toml"), |w| Ok(w.write_all(spec.as_bytes())?))?;

    frequency_table(&mut report, "synth", &samples);
    report.print();
    Ok(())
}

pub fn export_2d(args: Export2dArgs) -> Result<()> {
    let args = Export2dArgs {
        label: Some(args.label.unwrap_or_else(|| "game".into())),
        ..args
    };
    let mut report = Report::new("export-2d", &args)?;
    let data = load_dataset(
        &need(args.manifest.clone(), "manifest")?,
        &need(args.table.clone(), "table")?,
        args.checkpoint.as_deref(),
    )?;
    let out = need(args.out.clone(), "out")?;
    let which = args.label.as_deref().unwrap();
    let labels: Vec<String> = match which {
        "game" => data.samples.iter().map(|s| s.game_id.clone()).collect(),
        "caption" => data.samples.iter().map(|s| s.caption.clone()).collect(),
        other => {
            let c = parse_category(other)?;
            data.samples.iter().map(|s| (s.categories.get(c) as u8).to_string()).collect()
        }
    };
    let points = pca_2d(&data.video)?;
    write_atomic(&out, |w| {
        writeln!(w, "x\ty\tlabel")?;
        for (p, l) in points.iter().zip(&labels) {
            writeln!(w, "{:.6}\t{:.6}\t{l}", p[0], p[1])?;
        }
        Ok(())
    })?;
    report.push(Record::new("export-2d", which, None, "rows", points.len() as f64));
    report.print();
    Ok(())
}
