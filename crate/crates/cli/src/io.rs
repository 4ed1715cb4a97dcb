use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use behave_core::align::{load_checkpoint, MlpProjector};
use behave_core::dataset::{default_catalog, parse_log, TimestepRecord};
use behave_core::embeddings::{EmbeddingTable, PairedDataset};
use behave_core::preprocess::{read_manifest, WindowSample};
use serde::Serialize;

pub fn need<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| behave_core::Error::InvalidConfig(format!("--{flag} is required")).into())
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(f))
}

/// Writes through a temporary file in the same directory, then renames it
/// over `path`.
pub fn write_atomic(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .with_context(|| format!("{} is not a file path", path.display()))?
        .to_string_lossy();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut w = BufWriter::new(File::create(&tmp).with_context(|| format!("cannot create {}", tmp.display()))?);
        body(&mut w)?;
        w.flush()?;
        w.get_ref().sync_all()?;
        Ok(())
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(e);
    }
    fs::rename(&tmp, path).with_context(|| format!("cannot move {} into place", path.display()))
}

pub fn read_samples(path: &Path) -> Result<Vec<WindowSample>> {
    read_manifest(open(path)?, &default_catalog()).with_context(|| format!("in {}", path.display()))
}

/// A BHVE table whose rows are named by the manifest.
pub fn read_table(path: &Path, samples: &[WindowSample]) -> Result<EmbeddingTable> {
    let ids = samples.iter().map(|s| s.sample_id.clone()).collect();
    EmbeddingTable::read(open(path)?, ids).with_context(|| format!("in {}", path.display()))
}

pub fn read_checkpoint(path: &Path) -> Result<MlpProjector> {
    load_checkpoint(open(path)?).with_context(|| format!("in {}", path.display()))
}

pub fn load_dataset(manifest: &Path, table: &Path, checkpoint: Option<&Path>) -> Result<PairedDataset> {
    let samples = read_samples(manifest)?;
    let mut video = read_table(table, &samples)?;
    if let Some(c) = checkpoint {
        video = read_checkpoint(c)?.project(&video)?;
    }
    Ok(PairedDataset { video, samples })
}

/// Every `*.csv` under the given paths; directories are listed in name order.
pub fn log_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("cannot list {}", p.display()))?
                .map(|e| e.map(|e| e.path()))
                .collect::<std::io::Result<_>>()?;
            found.retain(|f| f.extension().is_some_and(|e| e == "csv"));
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

/// Records grouped by game, in order of first appearance.
pub fn read_logs(paths: &[PathBuf]) -> Result<Vec<(String, Vec<TimestepRecord>)>> {
    let catalog = default_catalog();
    let mut games: Vec<(String, Vec<TimestepRecord>)> = Vec::new();
    for file in log_files(paths)? {
        let records = parse_log(open(&file)?, &catalog).with_context(|| format!("in {}", file.display()))?;
        for r in records {
            match games.iter_mut().find(|(g, _)| *g == r.game_id) {
                Some((_, rs)) => rs.push(r),
                None => games.push((r.game_id.clone(), vec![r])),
            }
        }
    }
    Ok(games)
}

/// Line-oriented report: a `#` header echoing the command and its effective
/// settings, then one line per result.
pub struct Report {
    lines: Vec<String>,
}

impl Report {
    pub fn new(command: &str, settings: &impl Serialize) -> Result<Self> {
        let mut lines = vec![format!("# behave {command}")];
        let echo = toml::to_string(settings).context("cannot echo settings")?;
        lines.extend(echo.lines().filter(|l| !l.is_empty()).map(|l| format!("# {l}")));
        Ok(Self { lines })
    }

    pub fn push(&mut self, line: impl ToString) {
        self.lines.push(line.to_string());
    }

    pub fn print(&self) {
        let stdout = std::io::stdout();
        let mut out = stdout.lock();
        for l in &self.lines {
            let _ = writeln!(out, "{l}");
        }
    }
}
