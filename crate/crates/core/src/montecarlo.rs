//! Monte Carlo estimation of the Type-I and Type-II error probabilities of
//! the codec, with Wilson intervals, event counts and an empirical exponent fit.

use std::io::Write;
use std::ops::Add;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec_sim::{build_codebook, Codebook, Codec, CodecParams, Event, DEFAULT_CODEBOOK_CAP};
use crate::error::{Error, Result};
use crate::seed::{Domain, SeedScope};
pub use crate::seed::derive_trial_seed;
use crate::source_models::{DiscreteJointSource, Hypothesis, TestChannel};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959963984540054;
pub const MIN_TRIALS: usize = 1000;
pub const MIN_BLOCKLENGTHS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// Wilson score interval for `k` successes out of `n`.
pub fn wilson(k: usize, n: usize) -> Interval {
    if n == 0 {
        return Interval { lo: 0.0, hi: 1.0 };
    }
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Interval {
        lo: if k == 0.0 { 0.0 } else { (center - half).max(0.0) },
        hi: if k == n { 1.0 } else { (center + half).min(1.0) },
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventCounts {
    pub e11: usize,
    pub e12: usize,
    pub e21: usize,
    pub e22: usize,
}

/// Rates at which the encoder's codeword misses each test set, under H0.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct H0Diagnostics {
    /// trials where `T1` was empty (error message)
    pub outside_t1: usize,
    pub outside_t2: usize,
    pub outside_an: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Tally {
    counts: EventCounts,
    diag: H0Diagnostics,
}

impl Add for Tally {
    type Output = Tally;
    fn add(self, o: Tally) -> Tally {
        Tally {
            counts: EventCounts {
                e11: self.counts.e11 + o.counts.e11,
                e12: self.counts.e12 + o.counts.e12,
                e21: self.counts.e21 + o.counts.e21,
                e22: self.counts.e22 + o.counts.e22,
            },
            diag: H0Diagnostics {
                outside_t1: self.diag.outside_t1 + o.diag.outside_t1,
                outside_t2: self.diag.outside_t2 + o.diag.outside_t2,
                outside_an: self.diag.outside_an + o.diag.outside_an,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub n: usize,
    pub trials_h0: usize,
    pub trials_h1: usize,
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub ci_alpha: Interval,
    pub ci_beta: Interval,
    pub event_counts: EventCounts,
    pub seed: u64,
    pub diagnostics: H0Diagnostics,
    /// codebook size; absent in per-trial codebook mode
    pub m1: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    /// worker threads; `None` uses the global pool
    pub threads: Option<usize>,
    /// draw a fresh codebook for every trial
    pub per_trial_codebook: bool,
    pub cap: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            threads: None,
            per_trial_codebook: false,
            cap: DEFAULT_CODEBOOK_CAP,
        }
    }
}

fn tally_trial(codec: &Codec<'_>, h: Hypothesis, t: u64, master: u64) -> Result<Tally> {
    let trace = codec.run_trial(h, &mut derive_trial_seed(master, h, t).rng())?;
    let mut tally = Tally::default();
    match trace.event {
        Event::Correct => {}
        Event::E11 => tally.counts.e11 = 1,
        Event::E12 => tally.counts.e12 = 1,
        Event::E21 => tally.counts.e21 = 1,
        Event::E22 => tally.counts.e22 = 1,
    }
    if h == Hypothesis::H0 {
        match trace.chosen {
            None => tally.diag.outside_t1 = 1,
            Some(d) => {
                tally.diag.outside_t2 = !d.in_t2 as usize;
                tally.diag.outside_an = !d.in_an as usize;
            }
        }
    }
    Ok(tally)
}

/// Runs `trials` codec trials at blocklength `n`, the first half under H0
/// and the rest under H1. Counts are integer sums, so the result does not
/// depend on scheduling or thread count.
pub fn run_experiment(
    model: &DiscreteJointSource,
    channel: &TestChannel,
    params: &CodecParams,
    n: usize,
    trials: usize,
    master_seed: u64,
    opts: &RunOptions,
) -> Result<SimulationResult> {
    if trials < MIN_TRIALS {
        return Err(Error::TooFewTrials { trials, min: MIN_TRIALS });
    }
    params.validate()?;
    let trials_h1 = trials / 2;
    let trials_h0 = trials - trials_h1;
    let scope = SeedScope::new(master_seed, Domain::Codebook, n);
    let shared: Option<Codebook> = if opts.per_trial_codebook {
        None
    } else {
        Some(build_codebook(model, channel, n, params, opts.cap, scope.single())?)
    };
    let work: Vec<(Hypothesis, u64)> = (0..trials_h0 as u64)
        .map(|t| (Hypothesis::H0, t))
        .chain((0..trials_h1 as u64).map(|t| (Hypothesis::H1, t)))
        .collect();
    let run = || -> Result<Tally> {
        match &shared {
            Some(cb) => {
                let codec = Codec::new(model, channel, cb, *params)?;
                work.par_iter()
                    .map(|&(h, t)| tally_trial(&codec, h, t, master_seed))
                    .try_reduce(Tally::default, |a, b| Ok(a + b))
            }
            None => work
                .par_iter()
                .map(|&(h, t)| {
                    let cb = build_codebook(model, channel, n, params, opts.cap, scope.trial(h, t + 1))?;
                    tally_trial(&Codec::new(model, channel, &cb, *params)?, h, t, master_seed)
                })
                .try_reduce(Tally::default, |a, b| Ok(a + b)),
        }
    };
    let tally = match opts.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map_err(|e| Error::param(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    let c = tally.counts;
    let (err0, err1) = (c.e11 + c.e12, c.e21 + c.e22);
    Ok(SimulationResult {
        n,
        trials_h0,
        trials_h1,
        alpha_hat: err0 as f64 / trials_h0 as f64,
        beta_hat: if trials_h1 == 0 { 0.0 } else { err1 as f64 / trials_h1 as f64 },
        ci_alpha: wilson(err0, trials_h0),
        ci_beta: wilson(err1, trials_h1),
        event_counts: c,
        seed: master_seed,
        diagnostics: tally.diag,
        m1: shared.as_ref().map(Codebook::m1),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitPoint {
    pub n: usize,
    /// `-(1/n) ln beta_hat`
    pub exponent: f64,
    /// exponent range implied by the Wilson interval on `beta_hat`
    pub ci: Interval,
}

impl FitPoint {
    pub fn ci_width(&self) -> f64 {
        self.ci.hi - self.ci.lo
    }
}

/// Blocklength with no observed Type-II error: only `-(1/n) ln(1/trials)` is reportable.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroErrorBound {
    pub n: usize,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    pub points: Vec<FitPoint>,
    pub zero_error: Vec<ZeroErrorBound>,
    /// blocklength-weighted mean of the point exponents
    pub slope_estimate: f64,
    pub theoretical_theta: Option<f64>,
}

pub fn fit_exponent(results: &[SimulationResult], theoretical_theta: Option<f64>) -> Result<ExponentFit> {
    if results.len() < MIN_BLOCKLENGTHS {
        return Err(Error::TooFewBlocklengths {
            min: MIN_BLOCKLENGTHS,
            got: results.len(),
        });
    }
    let mut sorted: Vec<&SimulationResult> = results.iter().collect();
    sorted.sort_by_key(|r| r.n);
    let mut points = Vec::new();
    let mut zero_error = Vec::new();
    for r in sorted {
        let n = r.n as f64;
        if r.beta_hat > 0.0 {
            points.push(FitPoint {
                n: r.n,
                exponent: -r.beta_hat.ln() / n,
                ci: Interval {
                    lo: -r.ci_beta.hi.ln() / n,
                    hi: -r.ci_beta.lo.ln() / n,
                },
            });
        } else {
            zero_error.push(ZeroErrorBound {
                n: r.n,
                bound: (r.trials_h1.max(1) as f64).ln() / n,
            });
        }
    }
    if points.is_empty() {
        return Err(Error::AllZeroErrors);
    }
    let weight: f64 = points.iter().map(|p| p.n as f64).sum();
    let slope_estimate = points.iter().map(|p| p.n as f64 * p.exponent).sum::<f64>() / weight;
    Ok(ExponentFit {
        points,
        zero_error,
        slope_estimate,
        theoretical_theta,
    })
}

pub const CSV_COLUMNS: [&str; 14] = [
    "n", "trials_h0", "trials_h1", "alpha_hat", "alpha_lo", "alpha_hi", "beta_hat", "beta_lo", "beta_hi", "e11",
    "e12", "e21", "e22", "seed",
];

pub fn write_results_csv<W: Write>(results: &[SimulationResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in results {
        let c = r.event_counts;
        w.write_record([
            r.n.to_string(),
            r.trials_h0.to_string(),
            r.trials_h1.to_string(),
            r.alpha_hat.to_string(),
            r.ci_alpha.lo.to_string(),
            r.ci_alpha.hi.to_string(),
            r.beta_hat.to_string(),
            r.ci_beta.lo.to_string(),
            r.ci_beta.hi.to_string(),
            c.e11.to_string(),
            c.e12.to_string(),
            c.e21.to_string(),
            c.e22.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn wilson_matches_closed_form() {
        // k = 10, n = 100: center (0.1 + z^2/200)/(1 + z^2/100)
        let z2 = Z_95 * Z_95;
        let center = (0.1 + z2 / 200.0) / (1.0 + z2 / 100.0);
        let half = Z_95 * (0.1 * 0.9 / 100.0 + z2 / 40000.0).sqrt() / (1.0 + z2 / 100.0);
        let ci = wilson(10, 100);
        assert_abs_diff_eq!(ci.lo, center - half, epsilon = 1e-15);
        assert_abs_diff_eq!(ci.hi, center + half, epsilon = 1e-15);
        assert_abs_diff_eq!(ci.lo, 0.05522, epsilon = 1e-5);
        assert_abs_diff_eq!(ci.hi, 0.17437, epsilon = 1e-5);
        let zero = wilson(0, 1000);
        assert_eq!(zero.lo, 0.0);
        assert!(zero.hi > 0.0 && zero.hi < 0.004);
        assert_eq!(wilson(50, 50).hi, 1.0);
    }

    fn synthetic(n: usize, beta: f64, trials_h1: usize) -> SimulationResult {
        let k = (beta * trials_h1 as f64).round() as usize;
        SimulationResult {
            n,
            trials_h0: trials_h1,
            trials_h1,
            alpha_hat: 0.0,
            beta_hat: beta,
            ci_alpha: wilson(0, trials_h1),
            ci_beta: wilson(k, trials_h1),
            event_counts: EventCounts::default(),
            seed: 0,
            diagnostics: H0Diagnostics::default(),
            m1: None,
        }
    }

    #[test]
    fn planted_exponential_is_recovered() {
        let rs: Vec<_> = [16, 32, 64].iter().map(|&n| synthetic(n, (-0.08 * n as f64).exp(), 1 << 30)).collect();
        let fit = fit_exponent(&rs, Some(0.08)).unwrap();
        assert!((fit.slope_estimate - 0.08).abs() < 0.005);
        assert_eq!(fit.theoretical_theta, Some(0.08));
    }

    #[test]
    fn constant_beta_decays_as_one_over_n() {
        let rs: Vec<_> = [10, 20, 40].iter().map(|&n| synthetic(n, 0.5, 1000)).collect();
        let fit = fit_exponent(&rs, None).unwrap();
        let e: Vec<f64> = fit.points.iter().map(|p| p.exponent).collect();
        assert!(e.windows(2).all(|w| w[1] < w[0]));
        assert_abs_diff_eq!(e[0] * 10.0, 2f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn zero_error_cells_are_bounds() {
        let rs = vec![synthetic(10, 0.2, 1000), synthetic(20, 0.0, 1000), synthetic(30, 0.05, 1000)];
        let fit = fit_exponent(&rs, None).unwrap();
        assert_eq!(fit.points.len(), 2);
        assert_eq!(fit.zero_error, vec![ZeroErrorBound { n: 20, bound: 1000f64.ln() / 20.0 }]);
        let all_zero: Vec<_> = [10, 20, 30].iter().map(|&n| synthetic(n, 0.0, 1000)).collect();
        assert!(matches!(fit_exponent(&all_zero, None), Err(Error::AllZeroErrors)));
        assert!(matches!(fit_exponent(&rs[..2], None), Err(Error::TooFewBlocklengths { .. })));
    }

    #[test]
    fn csv_header() {
        let mut buf = Vec::new();
        write_results_csv(&[synthetic(8, 0.25, 1000)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        assert!(lines.next().unwrap().starts_with("8,1000,1000,0,0,"));
    }
}
