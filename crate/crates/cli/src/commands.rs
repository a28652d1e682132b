//! The four subcommands. Each returns its output as text; nothing here
//! touches the filesystem or standard output.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use dht_spectrum_core::codec_sim::{CodecParams, Slack};
use dht_spectrum_core::exponent_calc::{
    estimated_spectral_inputs, gaussian_exponent, iid_exponent, iid_measures, optimize_kappa, stationary_ergodic_exponent,
    sweep_kappa, sweep_rate, theorem1_bound, write_sweep_csv, ExponentReport, GaussianExponent, SpectralInputs, SweepRow,
};
use dht_spectrum_core::info_spectrum::{estimate_both, DensityEvaluator, DensityKind, SpectralEstimate};
use dht_spectrum_core::model_file::LoadedModel;
use dht_spectrum_core::montecarlo::{fit_exponent, run_experiment, write_results_csv, RunOptions};
use dht_spectrum_core::source_models::{DiscreteJointSource, GaussianJointSource, Memory, TestChannel};
use dht_spectrum_core::Error as CoreError;

use crate::config::{Axis, ExperimentConfig};
use crate::error::{invalid, Result};

pub const TOOL: &str = "dht-spectrum";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Keys holding a rate in nats/symbol; rescaled by `--bits`.
const RATE_KEYS: [&str; 19] = [
    "r",
    "binning_term",
    "decision_term",
    "penalty",
    "theta",
    "theta_clamped",
    "i_sup_xu",
    "i_inf_xu",
    "i_inf_uy",
    "d_inf",
    "entropy_diff",
    "divergence_rate",
    "r_star",
    "switch_at",
    "exponent",
    "bound",
    "slope_estimate",
    "theoretical_theta",
    "extrapolated",
];

fn to_bits(v: &mut Value) {
    let scale = std::f64::consts::LN_2;
    match v {
        Value::Object(map) => {
            for (k, child) in map.iter_mut() {
                if RATE_KEYS.contains(&k.as_str()) {
                    if let Some(x) = child.as_f64() {
                        *child = json!(x / scale);
                        continue;
                    }
                }
                to_bits(child);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(to_bits),
        _ => {}
    }
}

/// `# tool version config_sha256=...` followed by `# config=...`.
pub fn csv_preamble(cfg: &ExperimentConfig) -> String {
    format!(
        "# {TOOL} {VERSION} config_sha256={}\n# config={}\n",
        cfg.hash(),
        cfg.canonical_json()
    )
}

fn envelope(cfg: &ExperimentConfig, mut body: Value) -> Result<String> {
    if cfg.bits {
        to_bits(&mut body);
    }
    let mut doc = json!({
        "tool": TOOL,
        "version": VERSION,
        "config_sha256": cfg.hash(),
        "config": serde_json::to_value(cfg)?,
        "units": if cfg.bits { "bits" } else { "nats" },
    });
    if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
        d.extend(b);
    }
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

/// Resolved config only, for `--dry-run`.
pub fn resolved_config(cfg: &ExperimentConfig) -> Result<String> {
    envelope(cfg, json!({ "dry_run": true }))
}

fn rate(cfg: &ExperimentConfig) -> Result<f64> {
    match cfg.rate {
        Some(r) => Ok(r),
        None => invalid("rate: required for this command"),
    }
}

fn model(cfg: &ExperimentConfig) -> Result<LoadedModel> {
    Ok(cfg.model.build()?)
}

fn discrete(cfg: &ExperimentConfig) -> Result<(DiscreteJointSource, TestChannel)> {
    match model(cfg)? {
        LoadedModel::Discrete { model, channel } => Ok((model, channel)),
        LoadedModel::Gaussian { .. } => invalid("model: this command needs a discrete model"),
    }
}

fn gaussian(cfg: &ExperimentConfig) -> Result<GaussianJointSource> {
    match model(cfg)? {
        LoadedModel::Gaussian { source, .. } => Ok(source),
        LoadedModel::Discrete { .. } => invalid("model: this command needs a Gaussian model"),
    }
}

/// Spectral inputs of a discrete model, with a method tag and diagnostics.
struct Inputs {
    si: SpectralInputs,
    method: &'static str,
    diagnostics: Value,
}

#[derive(Serialize)]
struct DensityEstimates {
    density: DensityKind,
    liminf: SpectralEstimate,
    limsup: SpectralEstimate,
}

fn spectra(cfg: &ExperimentConfig, m: &DiscreteJointSource, ch: &TestChannel) -> Result<Vec<DensityEstimates>> {
    let ev = DensityEvaluator::new(m, ch)?;
    [DensityKind::XuInfo, DensityKind::UyInfo, DensityKind::UyDivergence]
        .into_iter()
        .enumerate()
        .map(|(i, kind)| {
            let (liminf, limsup, _) = estimate_both(&ev, kind, &cfg.n_list, cfg.trials, cfg.epsilon, cfg.seed + i as u64)?;
            Ok(DensityEstimates {
                density: kind,
                liminf,
                limsup,
            })
        })
        .collect()
}

fn discrete_inputs(cfg: &ExperimentConfig, m: &DiscreteJointSource, ch: &TestChannel) -> Result<Inputs> {
    match m.memory() {
        Memory::Iid => {
            let measures = iid_measures(m, ch)?;
            Ok(Inputs {
                si: SpectralInputs::exact(&measures),
                method: "iid_enumeration",
                diagnostics: serde_json::to_value(measures)?,
            })
        }
        Memory::Markov { .. } => {
            let est = spectra(cfg, m, ch)?;
            let mean = |i: usize| est[i].liminf.per_n.last().map(|p| p.mean).unwrap_or(f64::NAN);
            let entropy_diff = mean(0) - mean(1);
            let div = mean(2);
            if !(entropy_diff.is_finite() && div.is_finite()) {
                return Err(CoreError::InvalidParameter("density means are not finite".into()).into());
            }
            let converged = est.iter().all(|e| e.liminf.converged && e.limsup.converged);
            Ok(Inputs {
                si: SpectralInputs::stationary(entropy_diff, div, converged),
                method: "stationary_ergodic",
                diagnostics: json!({
                    "entropy_diff": entropy_diff,
                    "divergence_rate": div,
                    "estimates": serde_json::to_value(&est)?,
                }),
            })
        }
        Memory::Mixture { .. } => {
            let (si, est) = estimated_spectral_inputs(m, ch, &cfg.n_list, cfg.trials, cfg.epsilon, cfg.seed)?;
            Ok(Inputs {
                si,
                method: "spectral_estimate",
                diagnostics: serde_json::to_value(est)?,
            })
        }
    }
}

fn gaussian_inputs(g: &GaussianExponent) -> Result<Inputs> {
    let (e, d) = (g.entropy_trace.last(), g.divergence_trace.last());
    Ok(Inputs {
        si: SpectralInputs::stationary(e, d, g.converged),
        method: "gaussian_toeplitz",
        diagnostics: json!({
            "kappa": g.kappa,
            "entropy_trace": serde_json::to_value(&g.entropy_trace)?,
            "divergence_trace": serde_json::to_value(&g.divergence_trace)?,
            "warnings": g.warnings,
        }),
    })
}

fn model_inputs(cfg: &ExperimentConfig) -> Result<Inputs> {
    match model(cfg)? {
        LoadedModel::Discrete { model, channel } => discrete_inputs(cfg, &model, &channel),
        LoadedModel::Gaussian { source, .. } => match cfg.gaussian_kappa() {
            Some(k) => gaussian_inputs(&gaussian_exponent(&source, k, 0.0, &cfg.n_list)?),
            None => invalid("kappa: required for Gaussian models"),
        },
    }
}

/// JSON report of the achievable exponent at `--rate`.
pub fn cmd_exponent(cfg: &ExperimentConfig) -> Result<String> {
    let r = rate(cfg)?;
    let (inputs, report) = match model(cfg)? {
        LoadedModel::Gaussian { source, .. } => {
            let Some(k) = cfg.gaussian_kappa() else {
                return invalid("kappa: required for Gaussian models");
            };
            let g = gaussian_exponent(&source, k, r, &cfg.n_list)?;
            (gaussian_inputs(&g)?, g.report)
        }
        LoadedModel::Discrete { model, channel } => {
            let inputs = discrete_inputs(cfg, &model, &channel)?;
            let report = match model.memory() {
                Memory::Iid => iid_exponent(&model, &channel, r)?,
                Memory::Markov { .. } => stationary_ergodic_exponent(inputs.si.i_sup_xu, inputs.si.d_inf, r),
                Memory::Mixture { .. } => theorem1_bound(&inputs.si, r),
            };
            (inputs, report)
        }
    };
    envelope(
        cfg,
        json!({
            "method": inputs.method,
            "inputs": serde_json::to_value(&inputs.si)?,
            "crossover_rate": inputs.si.crossover_rate(),
            "report": serde_json::to_value(&report)?,
            "diagnostics_nats": inputs.diagnostics,
        }),
    )
}

pub struct SimulateOutput {
    pub csv: String,
    pub fit_json: String,
}

pub fn codec_params(cfg: &ExperimentConfig, si: &SpectralInputs, r: f64) -> CodecParams {
    let mut p = CodecParams::from_inputs(si, r);
    p.slack = Slack::uniform(cfg.slack);
    if let Some(s) = cfg.threshold {
        p.s_threshold = s;
    }
    p
}

/// Runs the codec at every blocklength. Progress goes to standard error.
pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<SimulateOutput> {
    let r = rate(cfg)?;
    let (m, ch) = discrete(cfg)?;
    let inputs = discrete_inputs(cfg, &m, &ch)?;
    let params = codec_params(cfg, &inputs.si, r);
    let bound: ExponentReport = theorem1_bound(&inputs.si, r);
    let opts = RunOptions {
        threads: None,
        per_trial_codebook: cfg.per_trial_codebook,
        cap: cfg.cap,
    };
    let mut results = Vec::with_capacity(cfg.n_list.len());
    for &n in &cfg.n_list {
        let res = run_experiment(&m, &ch, &params, n, cfg.trials, cfg.seed, &opts)?;
        eprintln!(
            "n={n}: alpha_hat={:.4} beta_hat={:.4} m1={}",
            res.alpha_hat,
            res.beta_hat,
            res.m1.map_or("per-trial".to_string(), |v| v.to_string())
        );
        results.push(res);
    }
    let mut csv = csv_preamble(cfg).into_bytes();
    write_results_csv(&results, &mut csv)?;
    let fit = match fit_exponent(&results, Some(bound.theta_clamped)) {
        Ok(f) => json!({ "fit": serde_json::to_value(f)? }),
        Err(e) => json!({ "fit": null, "fit_error": e.to_string() }),
    };
    let mut body = json!({
        "method": inputs.method,
        "params": serde_json::to_value(params)?,
        "bound": serde_json::to_value(&bound)?,
        "results": serde_json::to_value(&results)?,
    });
    if let (Value::Object(b), Value::Object(f)) = (&mut body, fit) {
        b.extend(f);
    }
    Ok(SimulateOutput {
        csv: String::from_utf8(csv).expect("csv output is utf-8"),
        fit_json: envelope(cfg, body)?,
    })
}

fn scale_rows(rows: &mut [SweepRow]) {
    let s = std::f64::consts::LN_2;
    for row in rows {
        row.r /= s;
        row.binning /= s;
        row.decision /= s;
        row.penalty /= s;
        row.theta /= s;
    }
}

fn fmt_opt(v: Option<f64>, bits: bool) -> String {
    v.map(|x| if bits { x / std::f64::consts::LN_2 } else { x })
        .map(|x| x.to_string())
        .unwrap_or_else(|| "none".into())
}

/// CSV curve with one row per grid point. A grid with no feasible point
/// yields an empty curve and an annotation instead of an error.
pub fn cmd_sweep(cfg: &ExperimentConfig) -> Result<String> {
    let grid = match &cfg.grid {
        Some(g) => g.clone(),
        None => return invalid("grid: required for sweep"),
    };
    let mut out = csv_preamble(cfg);
    let mut rows: Vec<SweepRow> = match cfg.axis.unwrap_or(Axis::Rate) {
        Axis::Rate => {
            let inputs = model_inputs(cfg)?;
            let sweep = sweep_rate(&inputs.si, &grid)?;
            let kappa = cfg.gaussian_kappa();
            writeln!(out, "# method={}", inputs.method).unwrap();
            writeln!(out, "# r_star={}", fmt_opt(Some(sweep.r_star), cfg.bits)).unwrap();
            writeln!(out, "# switch_at={}", fmt_opt(sweep.switch_at, cfg.bits)).unwrap();
            sweep.reports.iter().map(|rep| SweepRow::new(kappa, rep)).collect()
        }
        Axis::Kappa => {
            let src = gaussian(cfg)?;
            let r = rate(cfg)?;
            let n = *cfg.n_list.last().expect("validated non-empty");
            writeln!(out, "# method=gaussian_toeplitz n={n}").unwrap();
            match optimize_kappa(&src, r, &grid, n) {
                Ok((k, rep)) => writeln!(out, "# best_kappa={k} theta={}", fmt_opt(Some(rep.theta), cfg.bits)).unwrap(),
                Err(CoreError::AllInfeasible) => {}
                Err(e) => return Err(e.into()),
            }
            sweep_kappa(&src, r, &grid, n)?
                .iter()
                .map(|(k, rep)| SweepRow::new(Some(*k), rep))
                .collect()
        }
    };
    if !rows.iter().any(|r| r.feasible) {
        writeln!(out, "# all_infeasible: no grid point has a positive binning term").unwrap();
        rows.clear();
    }
    if cfg.bits {
        writeln!(out, "# units=bits").unwrap();
        scale_rows(&mut rows);
    }
    let mut buf = out.into_bytes();
    write_sweep_csv(&rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// JSON quantile estimates of the three densities over `--n`.
pub fn cmd_spectrum(cfg: &ExperimentConfig) -> Result<String> {
    let (m, ch) = discrete(cfg)?;
    let est = spectra(cfg, &m, &ch)?;
    envelope(cfg, json!({ "spectra": serde_json::to_value(est)? }))
}
