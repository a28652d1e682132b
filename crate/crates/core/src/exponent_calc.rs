//! The achievable Type-II exponent and its specializations.
//!
//! ```text
//! binning  = r - (I_sup(X;U) - I_inf(U;Y))
//! decision = D_inf(P_UY || P̄_UY) + (I_inf(X;U) - I_sup(X;U))
//! theta    = min(binning, decision)
//! ```

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian_tools::{
    divergence_term_at, entropy_term_at, limit_sequence, LimitTrace, DEFAULT_LIMIT_TOLERANCE,
};
use crate::info_spectrum::{estimate_both, DensityEvaluator, DensityKind, SpectralEstimate};
use crate::source_models::{DiscreteJointSource, GaussianJointSource, Hypothesis, TestChannel};

/// Largest `|X|·|U|·|Y|` enumerated exactly.
pub const MAX_ENUMERATION: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Provenance {
    /// Per-symbol enumeration of an i.i.d. model.
    Exact,
    /// Limits of a stationary ergodic model, evaluated at finite `n`.
    StationaryErgodic { converged: bool },
    /// Quantile estimates from sampled densities.
    Estimated {
        epsilon: f64,
        n_max: usize,
        trials: usize,
        converged: bool,
    },
}

/// The four spectral quantities the bound depends on, in nats per symbol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralInputs {
    pub i_sup_xu: f64,
    pub i_inf_xu: f64,
    pub i_inf_uy: f64,
    pub d_inf: f64,
    pub provenance: Provenance,
}

impl SpectralInputs {
    pub fn new(i_sup_xu: f64, i_inf_xu: f64, i_inf_uy: f64, d_inf: f64, provenance: Provenance) -> Result<Self> {
        if !(i_sup_xu.is_finite() && i_inf_xu.is_finite() && i_inf_uy.is_finite()) || d_inf.is_nan() {
            return Err(Error::param("spectral inputs must be finite"));
        }
        if i_inf_xu > i_sup_xu {
            return Err(Error::param(format!(
                "I_inf(X;U) = {i_inf_xu} exceeds I_sup(X;U) = {i_sup_xu}"
            )));
        }
        Ok(SpectralInputs {
            i_sup_xu,
            i_inf_xu,
            i_inf_uy,
            d_inf,
            provenance,
        })
    }

    /// Exact i.i.d. quantities: inf and sup coincide.
    pub fn exact(m: &IidMeasures) -> Self {
        SpectralInputs {
            i_sup_xu: m.i_xu,
            i_inf_xu: m.i_xu,
            i_inf_uy: m.i_uy,
            d_inf: m.d_uy,
            provenance: Provenance::Exact,
        }
    }

    /// Stationary ergodic limits: `entropy_diff` plays the role of
    /// `I(X;U) - I(U;Y)` and the penalty vanishes.
    pub fn stationary(entropy_diff: f64, div_rate: f64, converged: bool) -> Self {
        SpectralInputs {
            i_sup_xu: entropy_diff,
            i_inf_xu: entropy_diff,
            i_inf_uy: 0.0,
            d_inf: div_rate,
            provenance: Provenance::StationaryErgodic { converged },
        }
    }

    /// `I_sup(X;U) - I_inf(U;Y)`: the rate at which binning becomes feasible.
    pub fn binning_threshold(&self) -> f64 {
        self.i_sup_xu - self.i_inf_uy
    }

    pub fn penalty(&self) -> f64 {
        self.i_inf_xu - self.i_sup_xu
    }

    pub fn decision_term(&self) -> f64 {
        self.d_inf + self.penalty()
    }

    /// Rate where the binning and decision terms meet.
    pub fn crossover_rate(&self) -> f64 {
        self.binning_threshold() + self.decision_term()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    BinningLimited,
    DecisionLimited,
    Infeasible,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub r: f64,
    pub binning_term: f64,
    pub decision_term: f64,
    pub penalty: f64,
    /// May be negative; see `theta_clamped`.
    pub theta: f64,
    pub theta_clamped: f64,
    pub feasible: bool,
    pub regime: Regime,
}

pub fn theorem1_bound(si: &SpectralInputs, r: f64) -> ExponentReport {
    let binning_term = r - si.binning_threshold();
    let decision_term = si.decision_term();
    let theta = binning_term.min(decision_term);
    let feasible = binning_term > 0.0;
    let regime = if !feasible {
        Regime::Infeasible
    } else if binning_term < decision_term {
        Regime::BinningLimited
    } else {
        Regime::DecisionLimited
    };
    ExponentReport {
        r,
        binning_term,
        decision_term,
        penalty: si.penalty(),
        theta,
        theta_clamped: theta.max(0.0),
        feasible,
        regime,
    }
}

/// Per-symbol `I(X;U)`, `I(U;Y)` under H0 and `D(P_UY || P̄_UY)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IidMeasures {
    pub i_xu: f64,
    pub i_uy: f64,
    pub d_uy: f64,
}

fn xlogy_ratio(p: f64, q: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else if q == 0.0 {
        f64::INFINITY
    } else {
        p * (p / q).ln()
    }
}

/// Exact per-symbol measures by enumeration over `(x, u, y)`.
pub fn iid_measures(model: &DiscreteJointSource, channel: &TestChannel) -> Result<IidMeasures> {
    if !model.is_iid() {
        return Err(Error::Unsupported("exact enumeration needs an i.i.d. model"));
    }
    let w = channel.as_discrete()?;
    let (nx, ny, nu) = (model.nx(), model.ny(), w.nu());
    if w.nx() != nx {
        return Err(Error::LengthMismatch {
            expected: nx,
            found: w.nx(),
        });
    }
    let size = nx.saturating_mul(nu).saturating_mul(ny);
    if size > MAX_ENUMERATION {
        return Err(Error::AlphabetTooLarge {
            size,
            limit: MAX_ENUMERATION,
        });
    }
    let joint_uy = |h: Hypothesis| {
        let p = model.pmf(h);
        let mut t = vec![0.0; nu * ny];
        for x in 0..nx {
            for y in 0..ny {
                for u in 0..nu {
                    t[u * ny + y] += p.get(x, y) * w.get(x, u);
                }
            }
        }
        t
    };
    let px = model.pmf(Hypothesis::H0).marginal_x();
    let py = model.pmf(Hypothesis::H0).marginal_y();
    let pu: Vec<f64> = (0..nu).map(|u| (0..nx).map(|x| px[x] * w.get(x, u)).sum()).collect();
    let mut i_xu = 0.0;
    for x in 0..nx {
        for u in 0..nu {
            i_xu += px[x] * xlogy_ratio(w.get(x, u), pu[u]);
        }
    }
    let uy0 = joint_uy(Hypothesis::H0);
    let uy1 = joint_uy(Hypothesis::H1);
    let mut i_uy = 0.0;
    let mut d_uy = 0.0;
    for u in 0..nu {
        for y in 0..ny {
            let p = uy0[u * ny + y];
            i_uy += xlogy_ratio(p, pu[u] * py[y]);
            d_uy += xlogy_ratio(p, uy1[u * ny + y]);
        }
    }
    Ok(IidMeasures { i_xu, i_uy, d_uy })
}

pub fn iid_spectral_inputs(model: &DiscreteJointSource, channel: &TestChannel) -> Result<SpectralInputs> {
    Ok(SpectralInputs::exact(&iid_measures(model, channel)?))
}

pub fn iid_exponent(model: &DiscreteJointSource, channel: &TestChannel, r: f64) -> Result<ExponentReport> {
    Ok(theorem1_bound(&iid_spectral_inputs(model, channel)?, r))
}

/// `binning = r - entropy_diff`, `decision = div_rate`, no penalty.
pub fn stationary_ergodic_exponent(entropy_diff: f64, div_rate: f64, r: f64) -> ExponentReport {
    theorem1_bound(&SpectralInputs::stationary(entropy_diff, div_rate, true), r)
}

/// Sampled estimates feeding the bound for sources with memory.
#[derive(Clone, Debug, Serialize)]
pub struct EstimatedSpectra {
    pub xu_liminf: SpectralEstimate,
    pub xu_limsup: SpectralEstimate,
    pub uy_liminf: SpectralEstimate,
    pub div_liminf: SpectralEstimate,
}

/// Estimates the four inputs from H0 density samples. Each density uses
/// its own seed offset so the three sample sets are independent.
pub fn estimated_spectral_inputs(
    model: &DiscreteJointSource,
    channel: &TestChannel,
    n_list: &[usize],
    trials: usize,
    eps: f64,
    seed: u64,
) -> Result<(SpectralInputs, EstimatedSpectra)> {
    let ev = DensityEvaluator::new(model, channel)?;
    let (xu_lo, xu_hi, _) = estimate_both(&ev, DensityKind::XuInfo, n_list, trials, eps, seed)?;
    let (uy_lo, _, _) = estimate_both(&ev, DensityKind::UyInfo, n_list, trials, eps, seed.wrapping_add(1))?;
    let (div_lo, _, _) = estimate_both(&ev, DensityKind::UyDivergence, n_list, trials, eps, seed.wrapping_add(2))?;
    let converged = xu_lo.converged && xu_hi.converged && uy_lo.converged && div_lo.converged;
    let si = SpectralInputs::new(
        xu_hi.extrapolated,
        xu_lo.extrapolated,
        uy_lo.extrapolated,
        div_lo.extrapolated,
        Provenance::Estimated {
            epsilon: eps,
            n_max: *n_list.last().expect("checked non-empty"),
            trials,
            converged,
        },
    )?;
    Ok((
        si,
        EstimatedSpectra {
            xu_liminf: xu_lo,
            xu_limsup: xu_hi,
            uy_liminf: uy_lo,
            div_liminf: div_lo,
        },
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct GaussianExponent {
    pub kappa: f64,
    pub report: ExponentReport,
    pub entropy_trace: LimitTrace,
    pub divergence_trace: LimitTrace,
    pub converged: bool,
    pub warnings: Vec<String>,
}

/// Warnings for inputs that are accepted but contradict the model assumptions.
pub fn gaussian_warnings(src: &GaussianJointSource) -> Vec<String> {
    let mut w = Vec::new();
    if src.has_mean_difference() {
        w.push("means differ across hypotheses although marginals should not".to_string());
    }
    w
}

/// Evaluates both Gaussian terms over `n_list` and feeds the values at the
/// largest `n` into the stationary ergodic exponent.
pub fn gaussian_exponent(src: &GaussianJointSource, kappa: f64, r: f64, n_list: &[usize]) -> Result<GaussianExponent> {
    let n_max = *n_list.last().ok_or_else(|| Error::param("empty n_list"))?;
    src.validate(n_max)?;
    let entropy_trace = limit_sequence(|n| entropy_term_at(src, kappa, n), n_list, DEFAULT_LIMIT_TOLERANCE)?;
    let divergence_trace = limit_sequence(|n| divergence_term_at(src, kappa, n), n_list, DEFAULT_LIMIT_TOLERANCE)?;
    let converged = entropy_trace.converged && divergence_trace.converged;
    let si = SpectralInputs::stationary(entropy_trace.last(), divergence_trace.last(), converged);
    Ok(GaussianExponent {
        kappa,
        report: theorem1_bound(&si, r),
        entropy_trace,
        divergence_trace,
        converged,
        warnings: gaussian_warnings(src),
    })
}

fn check_grid(grid: &[f64], what: &str) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|v| !v.is_finite()) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param(format!("{what} grid must be non-empty, finite and increasing")));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct RateSweep {
    pub reports: Vec<ExponentReport>,
    /// Analytic crossover `I_sup(X;U) - I_inf(U;Y) + decision_term`.
    pub r_star: f64,
    /// First grid rate labelled `DecisionLimited`.
    pub switch_at: Option<f64>,
}

pub fn sweep_rate(si: &SpectralInputs, r_grid: &[f64]) -> Result<RateSweep> {
    check_grid(r_grid, "rate")?;
    let reports: Vec<ExponentReport> = r_grid.iter().map(|&r| theorem1_bound(si, r)).collect();
    let switch_at = reports
        .iter()
        .find(|rep| rep.regime == Regime::DecisionLimited)
        .map(|rep| rep.r);
    Ok(RateSweep {
        reports,
        r_star: si.crossover_rate(),
        switch_at,
    })
}

/// Exponent at one blocklength `n` for each `kappa` in the grid.
pub fn sweep_kappa(src: &GaussianJointSource, r: f64, kappa_grid: &[f64], n: usize) -> Result<Vec<(f64, ExponentReport)>> {
    check_grid(kappa_grid, "kappa")?;
    src.validate(n)?;
    kappa_grid
        .par_iter()
        .map(|&k| {
            let e = entropy_term_at(src, k, n)?;
            let d = divergence_term_at(src, k, n)?;
            Ok((k, theorem1_bound(&SpectralInputs::stationary(e, d, false), r)))
        })
        .collect()
}

/// The feasible `kappa` with the largest clamped exponent; ties go to the smaller `kappa`.
pub fn optimize_kappa(src: &GaussianJointSource, r: f64, kappa_grid: &[f64], n: usize) -> Result<(f64, ExponentReport)> {
    if kappa_grid.iter().any(|&k| !(k > 0.0)) {
        return Err(Error::param("kappa grid must be positive"));
    }
    let mut grid = kappa_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut best: Option<(f64, ExponentReport)> = None;
    for (k, rep) in sweep_kappa(src, r, &grid, n)? {
        if !rep.feasible {
            continue;
        }
        if best.as_ref().is_none_or(|(_, b)| rep.theta_clamped > b.theta_clamped) {
            best = Some((k, rep));
        }
    }
    best.ok_or(Error::AllInfeasible)
}

/// One sweep row; `kappa` is empty for discrete models.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub r: f64,
    pub kappa: Option<f64>,
    pub binning: f64,
    pub decision: f64,
    pub penalty: f64,
    pub theta: f64,
    pub regime: Regime,
    pub feasible: bool,
}

impl SweepRow {
    pub fn new(kappa: Option<f64>, rep: &ExponentReport) -> Self {
        SweepRow {
            r: rep.r,
            kappa,
            binning: rep.binning_term,
            decision: rep.decision_term,
            penalty: rep.penalty,
            theta: rep.theta,
            regime: rep.regime,
            feasible: rep.feasible,
        }
    }
}

/// CSV with columns `r,kappa,binning,decision,penalty,theta,regime,feasible`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r", "kappa", "binning", "decision", "penalty", "theta", "regime", "feasible"])?;
    for row in rows {
        w.write_record([
            row.r.to_string(),
            row.kappa.map(|k| k.to_string()).unwrap_or_default(),
            row.binning.to_string(),
            row.decision.to_string(),
            row.penalty.to_string(),
            row.theta.to_string(),
            row.regime.to_string(),
            row.feasible.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
