//! Command-line arguments and the resolved experiment configuration.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use dht_spectrum_core::codec_sim::{DEFAULT_CODEBOOK_CAP, DEFAULT_SLACK};
use dht_spectrum_core::info_spectrum::DEFAULT_EPSILON;
use dht_spectrum_core::model_file::{LoadedModel, ModelSpec};

use crate::error::{invalid, CliError, Result};

pub const THREADS_ENV: &str = "DHT_SPECTRUM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "dht-spectrum", version, about = "Type-II error exponents for distributed hypothesis testing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Achievable exponent at one rate
    Exponent(CommonArgs),
    /// Monte Carlo run of the quantize-and-bin codec
    Simulate(CommonArgs),
    /// Exponent curve over a rate or kappa grid
    Sweep(SweepArgs),
    /// Quantile estimates of the information spectra
    Spectrum(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Model JSON file, or an inline JSON object
    #[arg(long)]
    pub model: String,
    /// Binning rate in nats/symbol
    #[arg(long)]
    pub rate: Option<f64>,
    /// Gaussian test-channel noise variance (overrides the model file)
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Blocklengths, comma separated
    #[arg(long = "n", value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Quantile level for spectral estimates
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Acceptance threshold S in nats/symbol, or `auto` for the divergence term
    #[arg(long, default_value = "auto")]
    pub threshold: String,
    /// Slack shared by the encoder window, debinning test and acceptance region
    #[arg(long, default_value_t = DEFAULT_SLACK)]
    pub slack: f64,
    /// Maximum codebook size
    #[arg(long, default_value_t = DEFAULT_CODEBOOK_CAP)]
    pub cap: usize,
    /// Draw a fresh codebook for every trial
    #[arg(long)]
    pub per_trial_codebook: bool,
    /// Primary output file (standard output when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON summary file for `simulate`
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
    /// Print the resolved configuration and stop
    #[arg(long)]
    pub dry_run: bool,
    /// Report rates in bits (inputs stay in nats)
    #[arg(long)]
    pub bits: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value_t = Axis::Rate)]
    pub axis: Axis,
    /// `start:stop:step` (inclusive) or a comma separated list
    #[arg(long)]
    pub grid: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Rate,
    Kappa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exponent,
    Simulate,
    Sweep,
    Spectrum,
}

/// Settings that affect where output goes or how fast it is produced, but
/// never its content. Excluded from the config hash.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Runtime {
    pub model_source: String,
    pub out: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub threads: Option<usize>,
    pub dry_run: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub model: ModelSpec,
    pub rate: Option<f64>,
    pub kappa: Option<f64>,
    pub n_list: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub epsilon: f64,
    /// `None` means `auto`
    pub threshold: Option<f64>,
    pub slack: f64,
    pub cap: usize,
    pub per_trial_codebook: bool,
    pub axis: Option<Axis>,
    pub grid: Option<Vec<f64>>,
    pub bits: bool,
    #[serde(skip)]
    pub runtime: Runtime,
}

fn default_n_list(mode: Mode, model: &ModelSpec) -> Vec<usize> {
    match (mode, model) {
        (Mode::Simulate, _) => vec![16, 32, 64],
        (_, ModelSpec::Gaussian(_)) => vec![64, 128, 256, 512],
        _ => vec![256, 1024],
    }
}

fn default_trials(mode: Mode) -> usize {
    match mode {
        Mode::Simulate => 10_000,
        _ => 1000,
    }
}

pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Validation(format!("grid: cannot parse `{s}`")))
    };
    let parts: Vec<&str> = text.split(':').collect();
    let grid = match parts.as_slice() {
        [start, stop, step] => {
            let (a, b, h) = (num(start)?, num(stop)?, num(step)?);
            if !(h > 0.0 && a.is_finite() && b.is_finite() && b >= a) {
                return invalid(format!("grid: `{text}` needs start <= stop and a positive step"));
            }
            let count = ((b - a) / h + 1e-9).floor() as usize + 1;
            // rounding keeps 0.05 + 1 * 0.01 printing as 0.06
            (0..count).map(|i| ((a + i as f64 * h) * 1e12).round() / 1e12).collect()
        }
        [list] => list.split(',').map(num).collect::<Result<Vec<f64>>>()?,
        _ => return invalid(format!("grid: `{text}` is neither start:stop:step nor a list")),
    };
    if grid.is_empty() || grid.iter().any(|v| !v.is_finite()) {
        return invalid("grid: values must be finite");
    }
    Ok(grid)
}

fn load_spec(model: &str) -> Result<ModelSpec> {
    if model.trim_start().starts_with('{') {
        return Ok(ModelSpec::from_json(model)?);
    }
    let text = std::fs::read_to_string(model)
        .map_err(|e| CliError::Validation(format!("model: cannot read `{model}`: {e}")))?;
    Ok(ModelSpec::from_json(&text)?)
}

impl ExperimentConfig {
    pub fn from_command(cmd: &Command) -> Result<Self> {
        let (mode, args, sweep) = match cmd {
            Command::Exponent(a) => (Mode::Exponent, a, None),
            Command::Simulate(a) => (Mode::Simulate, a, None),
            Command::Spectrum(a) => (Mode::Spectrum, a, None),
            Command::Sweep(s) => (Mode::Sweep, &s.common, Some((s.axis, parse_grid(&s.grid)?))),
        };
        let model = load_spec(&args.model)?;
        let threshold = match args.threshold.trim() {
            "auto" => None,
            s => Some(
                s.parse::<f64>()
                    .map_err(|_| CliError::Validation(format!("threshold: `{s}` is not a number or `auto`")))?,
            ),
        };
        let cfg = ExperimentConfig {
            mode,
            n_list: args.n.clone().unwrap_or_else(|| default_n_list(mode, &model)),
            model,
            rate: args.rate,
            kappa: args.kappa,
            trials: args.trials.unwrap_or_else(|| default_trials(mode)),
            seed: args.seed,
            epsilon: args.epsilon,
            threshold,
            slack: args.slack,
            cap: args.cap,
            per_trial_codebook: args.per_trial_codebook,
            axis: sweep.as_ref().map(|s| s.0),
            grid: sweep.map(|s| s.1),
            bits: args.bits,
            runtime: Runtime {
                model_source: args.model.clone(),
                out: args.out.clone(),
                summary: args.summary.clone(),
                threads: args.threads,
                dry_run: args.dry_run,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything that can be checked without running a calculation.
    pub fn validate(&self) -> Result<()> {
        let loaded = self.model.build()?;
        let gaussian = matches!(loaded, LoadedModel::Gaussian { .. });
        if self.n_list.is_empty() || self.n_list[0] == 0 || self.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("n: blocklengths must be positive and strictly increasing");
        }
        if self.trials == 0 {
            return invalid("trials: must be positive");
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return invalid("epsilon: must lie in (0, 0.5)");
        }
        if !(self.slack > 0.0 && self.slack.is_finite()) {
            return invalid("slack: must be positive");
        }
        if let Some(r) = self.rate {
            if !(r.is_finite() && r >= 0.0) {
                return invalid("rate: must be finite and >= 0");
            }
        }
        if let Some(k) = self.kappa {
            if !(k > 0.0 && k.is_finite()) {
                return invalid("kappa: must be positive");
            }
        }
        if let Some(s) = self.threshold {
            if s.is_nan() {
                return invalid("threshold: must not be NaN");
            }
        }
        let needs_rate = match self.mode {
            Mode::Exponent | Mode::Simulate => true,
            Mode::Sweep => self.axis == Some(Axis::Kappa),
            Mode::Spectrum => false,
        };
        if needs_rate && self.rate.is_none() {
            return invalid("rate: required for this command");
        }
        if gaussian {
            match self.mode {
                Mode::Simulate | Mode::Spectrum => {
                    return invalid("model: Gaussian models support only `exponent` and `sweep`")
                }
                _ => {}
            }
            if self.axis != Some(Axis::Kappa) && self.gaussian_kappa().is_none() {
                return invalid("kappa: required for Gaussian models (flag or model file)");
            }
        } else if self.axis == Some(Axis::Kappa) {
            return invalid("axis: kappa sweeps need a Gaussian model");
        }
        if self.axis == Some(Axis::Kappa) && self.grid.iter().flatten().any(|&k| !(k > 0.0)) {
            return invalid("grid: kappa values must be positive");
        }
        Ok(())
    }

    pub fn gaussian_kappa(&self) -> Option<f64> {
        match &self.model {
            ModelSpec::Gaussian(g) => self.kappa.or(g.kappa),
            _ => None,
        }
    }

    /// Compact JSON of the hashed part of the configuration.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}
