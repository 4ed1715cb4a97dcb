//! Subcommand arguments. Every field is optional so the same structs can be
//! read from the `--config` file and merged under the command-line flags.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "behave", version, about = "Behaviour-aligned gameplay embeddings")]
pub struct Cli {
    /// TOML file with one table per subcommand; flags win over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Turn raw logs into a window manifest.
    Preprocess(PreprocessArgs),
    /// Embed every manifest caption.
    EmbedText(EmbedTextArgs),
    /// Train the alignment projector.
    Train(TrainArgs),
    /// Map a video table through a checkpoint.
    Project(ProjectArgs),
    /// Silhouette scores by game and behaviour labels.
    Silhouette(SilhouetteArgs),
    /// Held-out accuracy of one behaviour classifier.
    Classify(ClassifyArgs),
    /// Cross-game transfer of behaviour classifiers.
    Transfer(TransferArgs),
    /// Per-action classifiers for actions frequent in the source game.
    Idm(IdmArgs),
    /// Write a synthetic multi-game dataset.
    Synth(SynthArgs),
    /// Two-dimensional PCA coordinates with one label per sample.
    #[command(name = "export-2d")]
    Export2d(Export2dArgs),
}

/// `field: self.field.or(other.field)` for every listed field.
macro_rules! merge {
    ($ty:ident { $($field:ident),* $(,)? }) => {
        impl $ty {
            pub fn merge(self, other: Self) -> Self {
                Self { $($field: self.$field.or(other.$field)),* }
            }
        }
    };
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct PreprocessArgs {
    /// Log files or directories of `*.csv` logs.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub logs: Option<Vec<PathBuf>>,
    #[arg(long)]
    pub profiles: Option<PathBuf>,
    #[arg(long)]
    pub out_manifest: Option<PathBuf>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long)]
    pub max_gap_ms: Option<u64>,
}
merge!(PreprocessArgs { logs, profiles, out_manifest, window, stride, max_gap_ms });

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct EmbedTextArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, env = "BEHAVE_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
merge!(EmbedTextArgs { manifest, dim, seed, out });

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct TrainArgs {
    /// Manifest the two tables are row-aligned with.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub video_table: Option<PathBuf>,
    #[arg(long)]
    pub text_table: Option<PathBuf>,
    /// cosine, mse or preference.
    #[arg(long)]
    pub loss: Option<String>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub dropout: Option<f64>,
    #[arg(long)]
    pub margin: Option<f64>,
    /// Hidden widths, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    #[arg(long, env = "BEHAVE_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_checkpoint: Option<PathBuf>,
    /// Per-epoch losses as `epoch<TAB>loss`.
    #[arg(long)]
    pub loss_log: Option<PathBuf>,
}
merge!(TrainArgs {
    manifest, video_table, text_table, loss, epochs, lr, batch, dropout, margin, hidden, seed, out_checkpoint, loss_log
});

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ProjectArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub video_table: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
merge!(ProjectArgs { manifest, video_table, checkpoint, out });

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SilhouetteArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Project the table through this checkpoint first.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// all, game, panning, navigation or weapon.
    #[arg(long)]
    pub labels: Option<String>,
    /// Only rows of these games.
    #[arg(long, value_delimiter = ',')]
    pub games: Option<Vec<String>>,
    #[arg(long)]
    pub subsample_max: Option<usize>,
    #[arg(long, env = "BEHAVE_SEED")]
    pub seed: Option<u64>,
}
merge!(SilhouetteArgs { manifest, table, checkpoint, labels, games, subsample_max, seed });

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ClassifierArgs {
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub dropout: Option<f64>,
    /// The two hidden widths, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    /// Undersample the majority class.
    #[arg(long)]
    pub balanced: Option<bool>,
    #[arg(long)]
    pub test_fraction: Option<f64>,
    #[arg(long)]
    pub threshold: Option<f64>,
}
merge!(ClassifierArgs { epochs, batch, lr, dropout, hidden, balanced, test_fraction, threshold });

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ClassifyArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// panning, navigation, weapon or an action id.
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub games: Option<Vec<String>>,
    #[arg(long, env = "BEHAVE_SEED")]
    pub seed: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub classifier: ClassifierArgs,
}

impl ClassifyArgs {
    pub fn merge(self, other: Self) -> Self {
        Self {
            manifest: self.manifest.or(other.manifest),
            table: self.table.or(other.table),
            checkpoint: self.checkpoint.or(other.checkpoint),
            target: self.target.or(other.target),
            games: self.games.or(other.games),
            seed: self.seed.or(other.seed),
            classifier: self.classifier.merge(other.classifier),
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct TransferArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Unaligned (foundation) embeddings.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Projector for the aligned view; without it both views coincide.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub source: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub targets: Option<Vec<String>>,
    /// Behaviour categories, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub categories: Option<Vec<String>>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long, env = "BEHAVE_SEED")]
    pub seed: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub classifier: ClassifierArgs,
}

impl TransferArgs {
    pub fn merge(self, other: Self) -> Self {
        Self {
            manifest: self.manifest.or(other.manifest),
            table: self.table.or(other.table),
            checkpoint: self.checkpoint.or(other.checkpoint),
            source: self.source.or(other.source),
            targets: self.targets.or(other.targets),
            categories: self.categories.or(other.categories),
            runs: self.runs.or(other.runs),
            seed: self.seed.or(other.seed),
            classifier: self.classifier.merge(other.classifier),
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct IdmArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub transfer: TransferArgs,
    /// Minimum positive rate in the source for an action to get a classifier.
    #[arg(long)]
    pub min_freq: Option<f64>,
}

impl IdmArgs {
    pub fn merge(self, other: Self) -> Self {
        Self {
            transfer: self.transfer.merge(other.transfer),
            min_freq: self.min_freq.or(other.min_freq),
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SynthArgs {
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Full generator settings as TOML; the flags below override it.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub games: Option<usize>,
    #[arg(long)]
    pub frames_per_game: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub game_gap: Option<f64>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long, env = "BEHAVE_SEED")]
    pub seed: Option<u64>,
}
merge!(SynthArgs { out_dir, spec, games, frames_per_game, dim, game_gap, noise, seed });

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Export2dArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// game, panning, navigation, weapon or caption.
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
merge!(Export2dArgs { manifest, table, checkpoint, label, out });

/// Contents of a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfig {
    /// Used by any subcommand whose own table sets no seed.
    pub seed: Option<u64>,
    #[serde(default)]
    pub preprocess: PreprocessArgs,
    #[serde(default)]
    pub embed_text: EmbedTextArgs,
    #[serde(default)]
    pub train: TrainArgs,
    #[serde(default)]
    pub project: ProjectArgs,
    #[serde(default)]
    pub silhouette: SilhouetteArgs,
    #[serde(default)]
    pub classify: ClassifyArgs,
    #[serde(default)]
    pub transfer: TransferArgs,
    #[serde(default)]
    pub idm: IdmArgs,
    #[serde(default)]
    pub synth: SynthArgs,
    #[serde(default)]
    pub export_2d: Export2dArgs,
}
