//! Command-line front end: resolved experiment configs, the four
//! subcommands, and output routing.

pub mod commands;
pub mod config;
pub mod error;

use std::path::{Path, PathBuf};

pub use commands::{cmd_exponent, cmd_simulate, cmd_spectrum, cmd_sweep, SimulateOutput};
pub use config::{Cli, Command, ExperimentConfig, Mode};
pub use error::{CliError, Result};

/// Text produced by a run: the primary artifact and, for `simulate`, the JSON summary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outputs {
    pub primary: String,
    pub summary: Option<String>,
}

fn dispatch(cfg: &ExperimentConfig) -> Result<Outputs> {
    if cfg.runtime.dry_run {
        return Ok(Outputs {
            primary: commands::resolved_config(cfg)?,
            summary: None,
        });
    }
    let primary = match cfg.mode {
        Mode::Exponent => cmd_exponent(cfg)?,
        Mode::Sweep => cmd_sweep(cfg)?,
        Mode::Spectrum => cmd_spectrum(cfg)?,
        Mode::Simulate => {
            let out = cmd_simulate(cfg)?;
            return Ok(Outputs {
                primary: out.csv,
                summary: Some(out.fit_json),
            });
        }
    };
    Ok(Outputs { primary, summary: None })
}

/// Runs a resolved config, inside a dedicated pool when a thread count is set.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outputs> {
    match cfg.runtime.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map_err(|e| CliError::Validation(format!("threads: {e}")))?
            .install(|| dispatch(cfg)),
        None => dispatch(cfg),
    }
}

fn summary_path(cfg: &ExperimentConfig) -> Option<PathBuf> {
    cfg.runtime
        .summary
        .clone()
        .or_else(|| cfg.runtime.out.as_ref().map(|p| p.with_extension("fit.json")))
}

/// Writes outputs to their files, or the primary artifact to standard output.
pub fn emit(cfg: &ExperimentConfig, outputs: &Outputs) -> Result<()> {
    match &cfg.runtime.out {
        Some(path) => write_file(path, &outputs.primary)?,
        None => print!("{}", outputs.primary),
    }
    if let Some(summary) = &outputs.summary {
        match summary_path(cfg) {
            Some(path) => write_file(&path, summary)?,
            None => eprintln!("summary not written: pass --summary or --out"),
        }
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

/// Parses a command into a config, runs it and routes the output.
pub fn run(cli: &Cli) -> Result<()> {
    let cfg = ExperimentConfig::from_command(&cli.command)?;
    let outputs = execute(&cfg)?;
    emit(&cfg, &outputs)
}
