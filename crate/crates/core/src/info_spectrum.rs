//! Per-sequence information and divergence densities, and finite-n quantile
//! estimates of their limits in probability.
//!
//! A p-limsup is estimated by the `(1 - eps)`-quantile of the density at
//! each blocklength and a p-liminf by the `eps`-quantile; the reported value
//! is the one at the largest blocklength. Infinite samples are left out of
//! the quantiles but counted.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian_tools::check_increasing;
use crate::seed::{Domain, SeedScope, StreamRng};
use crate::source_models::{
    apply_test_channel, sample_block, CodingView, DiscreteJointSource, Hypothesis, Symbol, TestChannel,
};

pub const DEFAULT_EPSILON: f64 = 0.05;
/// Gap between the last two per-n quantiles below which an estimate counts as settled.
pub const DEFAULT_SPECTRAL_TOLERANCE: f64 = 0.02;
pub const MIN_TRIALS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    /// `(1/n) log P(u|x) / P_U(u)`
    XuInfo,
    /// `(1/n) log P(u|y) / P_U(u)`
    UyInfo,
    /// `(1/n) log P_UY(u,y) / P̄_UY(u,y)`
    UyDivergence,
}

impl DensityKind {
    pub fn name(self) -> &'static str {
        match self {
            DensityKind::XuInfo => "xu_info",
            DensityKind::UyInfo => "uy_info",
            DensityKind::UyDivergence => "uy_divergence",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralKind {
    PLiminf,
    PLimsup,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DensitySample {
    pub n: usize,
    /// nats per symbol; `±inf` when a zero-probability event occurred
    pub value: f64,
    pub kind: DensityKind,
}

/// `a - b` for log-probabilities, with impossible numerators winning.
fn log_ratio(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else if b == f64::NEG_INFINITY {
        f64::INFINITY
    } else {
        a - b
    }
}

fn per_symbol(v: f64, n: usize) -> f64 {
    v / n as f64
}

/// Evaluates the three densities against one model/channel pair.
#[derive(Clone, Debug)]
pub struct DensityEvaluator<'a> {
    view: CodingView<'a>,
    channel: &'a TestChannel,
}

impl<'a> DensityEvaluator<'a> {
    pub fn new(model: &'a DiscreteJointSource, channel: &'a TestChannel) -> Result<Self> {
        Ok(DensityEvaluator {
            view: CodingView::new(model, channel)?,
            channel,
        })
    }

    pub fn view(&self) -> &CodingView<'a> {
        &self.view
    }

    pub fn xu(&self, x: &[Symbol], u: &[Symbol]) -> Result<f64> {
        let num = self.view.log_cond_u_given_x(u, x)?;
        let den = self.view.log_marginal_u(u, Hypothesis::H0)?;
        Ok(per_symbol(log_ratio(num, den), u.len()))
    }

    pub fn uy(&self, u: &[Symbol], y: &[Symbol], h: Hypothesis) -> Result<f64> {
        let num = self.view.log_cond_u_given_y(u, y, h)?;
        let den = self.view.log_marginal_u(u, h)?;
        Ok(per_symbol(log_ratio(num, den), u.len()))
    }

    pub fn divergence(&self, u: &[Symbol], y: &[Symbol]) -> Result<f64> {
        let p0 = self.view.log_joint_uy(u, y, Hypothesis::H0)?;
        let p1 = self.view.log_joint_uy(u, y, Hypothesis::H1)?;
        Ok(per_symbol(log_ratio(p0, p1), u.len()))
    }

    /// Draws `(x, y)` under H0, passes `x` through the channel and evaluates `kind`.
    pub fn sample(&self, kind: DensityKind, n: usize, rng: &mut StreamRng) -> f64 {
        let (x, y) = sample_block(self.view.model(), Hypothesis::H0, n, rng);
        let u = apply_test_channel(self.channel, &x, rng).expect("discrete channel checked at construction");
        match kind {
            DensityKind::XuInfo => self.xu(&x, &u),
            DensityKind::UyInfo => self.uy(&u, &y, Hypothesis::H0),
            DensityKind::UyDivergence => self.divergence(&u, &y),
        }
        .expect("sampled symbols lie in the alphabets")
    }
}

pub fn info_density_xu(
    model: &DiscreteJointSource,
    channel: &TestChannel,
    x: &[Symbol],
    u: &[Symbol],
) -> Result<DensitySample> {
    let value = DensityEvaluator::new(model, channel)?.xu(x, u)?;
    Ok(DensitySample {
        n: u.len(),
        value,
        kind: DensityKind::XuInfo,
    })
}

pub fn info_density_uy(
    model: &DiscreteJointSource,
    channel: &TestChannel,
    u: &[Symbol],
    y: &[Symbol],
    h: Hypothesis,
) -> Result<DensitySample> {
    let value = DensityEvaluator::new(model, channel)?.uy(u, y, h)?;
    Ok(DensitySample {
        n: u.len(),
        value,
        kind: DensityKind::UyInfo,
    })
}

pub fn divergence_density(
    model: &DiscreteJointSource,
    channel: &TestChannel,
    u: &[Symbol],
    y: &[Symbol],
) -> Result<DensitySample> {
    let value = DensityEvaluator::new(model, channel)?.divergence(u, y)?;
    Ok(DensitySample {
        n: u.len(),
        value,
        kind: DensityKind::UyDivergence,
    })
}

/// Raw density draws, `values[i][t]` for `n_list[i]` and trial `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensitySamples {
    pub kind: DensityKind,
    pub n_list: Vec<usize>,
    pub values: Vec<Vec<f64>>,
}

/// Draws `trials` densities at each blocklength. Trial `t` at blocklength
/// `n` uses its own substream, so the result does not depend on scheduling.
pub fn sample_densities<F>(kind: DensityKind, sampler: F, n_list: &[usize], trials: usize, seed: u64) -> Result<DensitySamples>
where
    F: Fn(usize, &mut StreamRng) -> f64 + Sync,
{
    check_increasing(n_list)?;
    let values = n_list
        .iter()
        .map(|&n| {
            let scope = SeedScope::new(seed, Domain::Spectral, n);
            (0..trials as u64)
                .into_par_iter()
                .map(|t| sampler(n, &mut scope.trial(Hypothesis::H0, t).rng()))
                .collect()
        })
        .collect();
    Ok(DensitySamples {
        kind,
        n_list: n_list.to_vec(),
        values,
    })
}

/// Type-7 (linear interpolation) quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        m => {
            let h = (m - 1) as f64 * p;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(m - 1);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerN {
    pub n: usize,
    /// `eps`-quantile of the finite samples
    pub lower_quantile: f64,
    /// `(1 - eps)`-quantile of the finite samples
    pub upper_quantile: f64,
    pub mean: f64,
    pub std: f64,
    pub infinite_count: usize,
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralEstimate {
    pub kind: SpectralKind,
    pub density: DensityKind,
    pub epsilon: f64,
    pub per_n: Vec<PerN>,
    /// The kind's quantile at the largest blocklength.
    pub extrapolated: f64,
    pub converged: bool,
}

impl SpectralEstimate {
    /// The quantile this estimate tracks, per blocklength.
    pub fn values(&self) -> Vec<f64> {
        self.per_n.iter().map(|p| self.pick(p)).collect()
    }

    fn pick(&self, p: &PerN) -> f64 {
        match self.kind {
            SpectralKind::PLiminf => p.lower_quantile,
            SpectralKind::PLimsup => p.upper_quantile,
        }
    }
}

fn check_epsilon(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 0.5 {
        Ok(())
    } else {
        Err(Error::param(format!("epsilon must lie in (0, 0.5), got {eps}")))
    }
}

fn summarize(n: usize, samples: &[f64], eps: f64) -> PerN {
    let mut finite: Vec<f64> = samples.iter().copied().filter(|v| v.is_finite()).collect();
    finite.sort_by(f64::total_cmp);
    let m = finite.len() as f64;
    let mean = finite.iter().sum::<f64>() / m;
    let std = if finite.len() > 1 {
        (finite.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
    } else {
        f64::NAN
    };
    let per = PerN {
        n,
        lower_quantile: quantile_sorted(&finite, eps),
        upper_quantile: quantile_sorted(&finite, 1.0 - eps),
        mean,
        std,
        infinite_count: samples.len() - finite.len(),
        trials: samples.len(),
    };
    assert!(
        !(per.lower_quantile > per.upper_quantile),
        "quantile ordering violated at n = {n}"
    );
    per
}

impl DensitySamples {
    pub fn estimate(&self, kind: SpectralKind, eps: f64, tol: f64) -> Result<SpectralEstimate> {
        check_epsilon(eps)?;
        let per_n: Vec<PerN> = self
            .n_list
            .iter()
            .zip(&self.values)
            .map(|(&n, v)| summarize(n, v, eps))
            .collect();
        let mut est = SpectralEstimate {
            kind,
            density: self.kind,
            epsilon: eps,
            per_n,
            extrapolated: f64::NAN,
            converged: false,
        };
        let vals = est.values();
        est.extrapolated = *vals.last().expect("non-empty n_list");
        let too_many_infinite = est
            .per_n
            .iter()
            .any(|p| p.infinite_count as f64 > eps * p.trials as f64);
        let settled = vals.len() >= 2 && (vals[vals.len() - 1] - vals[vals.len() - 2]).abs() < tol;
        est.converged = settled && est.extrapolated.is_finite() && !too_many_infinite;
        Ok(est)
    }

    /// Long-format CSV: `kind,n,trial,value`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["kind", "n", "trial", "value"])?;
        for (n, vals) in self.n_list.iter().zip(&self.values) {
            for (t, v) in vals.iter().enumerate() {
                w.write_record([self.kind.name(), &n.to_string(), &t.to_string(), &v.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Samples a density and reduces it to a p-liminf or p-limsup estimate.
pub fn estimate_spectral<F>(
    kind: SpectralKind,
    density: DensityKind,
    sampler: F,
    n_list: &[usize],
    trials: usize,
    eps: f64,
    seed: u64,
) -> Result<SpectralEstimate>
where
    F: Fn(usize, &mut StreamRng) -> f64 + Sync,
{
    if trials < MIN_TRIALS {
        return Err(Error::TooFewTrials { trials, min: MIN_TRIALS });
    }
    check_epsilon(eps)?;
    sample_densities(density, sampler, n_list, trials, seed)?.estimate(kind, eps, DEFAULT_SPECTRAL_TOLERANCE)
}

/// Both estimates of one density from a single shared sample set.
pub fn estimate_both(
    eval: &DensityEvaluator<'_>,
    density: DensityKind,
    n_list: &[usize],
    trials: usize,
    eps: f64,
    seed: u64,
) -> Result<(SpectralEstimate, SpectralEstimate, DensitySamples)> {
    if trials < MIN_TRIALS {
        return Err(Error::TooFewTrials { trials, min: MIN_TRIALS });
    }
    check_epsilon(eps)?;
    let samples = sample_densities(density, |n, rng| eval.sample(density, n, rng), n_list, trials, seed)?;
    let lo = samples.estimate(SpectralKind::PLiminf, eps, DEFAULT_SPECTRAL_TOLERANCE)?;
    let hi = samples.estimate(SpectralKind::PLimsup, eps, DEFAULT_SPECTRAL_TOLERANCE)?;
    Ok((lo, hi, samples))
}
