//! Experiment runner for the `risdeq` library: TOML experiment configs,
//! parameter sweeps, figure presets and CSV output.
//!
//! The `risdeq` binary wraps [`run_config`] behind three subcommands:
//! `run <config>`, `preset <name>` and `validate <config>`.

pub mod config;
pub mod output;
pub mod presets;
pub mod runner;

pub use config::ExperimentConfig;
pub use output::{emit_csv, parse_rows, read_csv, ResultRow};
pub use presets::figure_preset;
pub use runner::{run_experiment, RunOutput};

use anyhow::Result;
use std::path::{Path, PathBuf};

/// Environment variable overriding the output directory.
pub const OUT_DIR_ENV: &str = "RISDEQ_OUT_DIR";

/// Output CSV path of `cfg` under `out_dir`: the config's `output` entry
/// (relative entries resolve against `out_dir`) or `<name>.csv`.
pub fn output_path(cfg: &ExperimentConfig, out_dir: &Path) -> PathBuf {
    match &cfg.output {
        Some(p) if Path::new(p).is_absolute() => PathBuf::from(p),
        Some(p) => out_dir.join(p),
        None => out_dir.join(format!("{}.csv", cfg.name)),
    }
}

/// Runs `cfg` and writes its CSV (plus PGA traces when enabled) under
/// `out_dir`. Returns the CSV path and the rows.
pub fn run_config(cfg: &ExperimentConfig, out_dir: &Path) -> Result<(PathBuf, Vec<ResultRow>)> {
    let out = run_experiment(cfg)?;
    let path = output_path(cfg, out_dir);
    emit_csv(&out.rows, &path)?;
    if cfg.pga_trace {
        let dir = out_dir.join(format!("{}_pga", cfg.name));
        for (stem, trace) in &out.traces {
            output::emit_trace(trace, &dir.join(format!("{stem}.csv")))?;
        }
    }
    Ok((path, out.rows))
}

/// Applies command-line overrides: a new master seed and/or a Monte-Carlo
/// trial count (per-method counts of sampled methods are replaced too;
/// instantaneous-CSI block counts are kept).
pub fn apply_overrides(cfg: &mut ExperimentConfig, seed: Option<u64>, trials: Option<usize>) {
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(t) = trials {
        cfg.trials = t;
        for m in &mut cfg.methods {
            if m.evaluation == "monte_carlo" {
                m.trials = None;
                m.selection_trials = m.selection_trials.map(|s| s.min(t));
            }
        }
    }
}
