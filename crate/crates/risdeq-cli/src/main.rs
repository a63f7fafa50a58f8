//! Command-line entry point.

use anyhow::Result;
use clap::{Parser, Subcommand};
use risdeq_cli::{apply_overrides, figure_preset, run_config, ExperimentConfig, OUT_DIR_ENV};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "risdeq", version, about = "Distributed-RIS MISO downlink experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        /// Config file.
        config: PathBuf,
        /// Output directory.
        #[arg(long, env = OUT_DIR_ENV, default_value = ".")]
        out: PathBuf,
    },
    /// Run a built-in figure preset (fig2 … fig7).
    Preset {
        /// Preset name.
        name: String,
        /// Output directory.
        #[arg(long, env = OUT_DIR_ENV, default_value = ".")]
        out: PathBuf,
        /// Master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Monte-Carlo trials per sampled curve.
        #[arg(long)]
        trials: Option<usize>,
        /// Write zeros in the wall_ms column (byte-reproducible output).
        #[arg(long)]
        no_timing: bool,
        /// Print the preset as TOML instead of running it.
        #[arg(long)]
        print: bool,
    },
    /// Check a config without running it.
    Validate {
        /// Config file.
        config: PathBuf,
    },
}

/// Error classes reported on failure.
fn kind(e: &anyhow::Error) -> &'static str {
    if e.chain().any(|c| c.downcast_ref::<std::io::Error>().is_some()) {
        "io"
    } else if e.chain().any(|c| c.downcast_ref::<risdeq::RisError>().is_some()) {
        "compute"
    } else {
        "config"
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let (path, rows) = run_config(&cfg, &out)?;
            println!("wrote {} rows to {}", rows.len(), path.display());
        }
        Command::Preset { name, out, seed, trials, no_timing, print } => {
            let mut cfg = figure_preset(&name)?;
            apply_overrides(&mut cfg, seed, trials);
            if no_timing {
                cfg.timing = false;
            }
            cfg.validate()?;
            if print {
                print!("{}", cfg.to_toml()?);
            } else {
                let (path, rows) = run_config(&cfg, &out)?;
                println!("wrote {} rows to {}", rows.len(), path.display());
            }
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            println!("ok: {} ({} methods, {} sweep points)", cfg.name, cfg.methods.len(), cfg.sweep.values.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = format!("{e:#}").replace('"', "'").replace('\n', " ");
            eprintln!("error: kind={} message=\"{message}\"", kind(&e));
            ExitCode::from(if kind(&e) == "config" { 2 } else { 1 })
        }
    }
}
