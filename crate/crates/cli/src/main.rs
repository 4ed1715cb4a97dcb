mod args;
mod commands;
mod io;

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use args::{Cli, Command, RunConfig};

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let Some(path) = &cli.config else {
        return Ok(RunConfig::default());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    toml::from_str(&text).map_err(|e| behave_core::Error::InvalidConfig(format!("{}: {e}", path.display())).into())
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli)?;
    let seed = cfg.seed;
    match cli.command {
        Command::Preprocess(a) => commands::preprocess(a.merge(cfg.preprocess)),
        Command::EmbedText(a) => {
            let mut a = a.merge(cfg.embed_text);
            a.seed = a.seed.or(seed);
            commands::embed_text(a)
        }
        Command::Train(a) => {
            let mut a = a.merge(cfg.train);
            a.seed = a.seed.or(seed);
            commands::train(a)
        }
        Command::Project(a) => commands::project(a.merge(cfg.project)),
        Command::Silhouette(a) => {
            let mut a = a.merge(cfg.silhouette);
            a.seed = a.seed.or(seed);
            commands::silhouette(a)
        }
        Command::Classify(a) => {
            let mut a = a.merge(cfg.classify);
            a.seed = a.seed.or(seed);
            commands::classify(a)
        }
        Command::Transfer(a) => {
            let mut a = a.merge(cfg.transfer);
            a.seed = a.seed.or(seed);
            commands::transfer(a)
        }
        Command::Idm(a) => {
            let mut a = a.merge(cfg.idm);
            a.transfer.seed = a.transfer.seed.or(seed);
            commands::idm(a)
        }
        Command::Synth(a) => {
            let mut a = a.merge(cfg.synth);
            a.seed = a.seed.or(seed);
            commands::synth(a)
        }
        Command::Export2d(a) => commands::export_2d(a.merge(cfg.export_2d)),
    }
}

/// Variant name of the first library error in the chain.
fn error_name(err: &anyhow::Error) -> &'static str {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<behave_core::Error>() {
            return e.name();
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return "Io";
        }
    }
    "InvalidConfig"
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {e:#}", error_name(&e));
            ExitCode::FAILURE
        }
    }
}
