//! Finite-blocklength quantize-and-binning encoder and decoder for discrete
//! sources, with per-trial error-event attribution.
//!
//! The encoder sees only `x^n` and the decoder only `(bin, y^n)`, so the
//! chain `U -> X -> Y` holds by construction.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent_calc::SpectralInputs;
use crate::seed::{StreamRng, SubstreamSeed};
use crate::source_models::{
    apply_test_channel, sample_block, CodingView, DiscreteJointSource, Hypothesis, Symbol, TestChannel,
};

pub const DEFAULT_SLACK: f64 = 0.02;
pub const DEFAULT_CODEBOOK_CAP: usize = 1 << 20;

/// Slack added to the bounds of the three test sets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slack {
    pub t1: f64,
    pub t2: f64,
    pub an: f64,
}

impl Slack {
    pub fn uniform(eps: f64) -> Self {
        Slack { t1: eps, t2: eps, an: eps }
    }
}

impl Default for Slack {
    fn default() -> Self {
        Slack::uniform(DEFAULT_SLACK)
    }
}

/// Rates and thresholds of the scheme, all in nats per symbol.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodecParams {
    /// bin rate: `M2 = ceil(e^{n r})`
    pub r: f64,
    pub r0_lower: f64,
    /// codebook rate: `M1 = ceil(e^{n (r0_upper + slack.t1)})`
    pub r0_upper: f64,
    pub r_prime: f64,
    pub s_threshold: f64,
    pub slack: Slack,
}

impl CodecParams {
    /// `r0_lower = I_inf(X;U)`, `r0_upper = I_sup(X;U)`, `r' = I_inf(U;Y)`, `S = D_inf`.
    pub fn from_inputs(si: &SpectralInputs, r: f64) -> Self {
        CodecParams {
            r,
            r0_lower: si.i_inf_xu,
            r0_upper: si.i_sup_xu,
            r_prime: si.i_inf_uy,
            s_threshold: si.d_inf,
            slack: Slack::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r.is_finite() && self.r >= 0.0) {
            return Err(Error::param(format!("rate must be finite and >= 0, got {}", self.r)));
        }
        if !self.r0_upper.is_finite() {
            return Err(Error::param("r0_upper must be finite"));
        }
        if self.r0_lower > self.r0_upper {
            return Err(Error::param("r0_lower exceeds r0_upper"));
        }
        let s = self.slack;
        if !(s.t1 > 0.0 && s.t2 > 0.0 && s.an > 0.0) {
            return Err(Error::param("slacks must be positive"));
        }
        if self.r_prime.is_nan() || self.s_threshold.is_nan() || self.r0_lower.is_nan() {
            return Err(Error::param("thresholds must not be NaN"));
        }
        Ok(())
    }

    pub fn codebook_rate(&self) -> f64 {
        self.r0_upper + self.slack.t1
    }
}

/// `ceil(e^{n rate})` as a float, snapping values within rounding noise of
/// an integer so that e.g. `e^{4 ln 2}` gives 16 rather than 17.
pub fn cardinality(n: usize, rate: f64) -> f64 {
    let v = (n as f64 * rate).exp();
    let near = v.round();
    if (v - near).abs() <= 1e-9 * near.max(1.0) {
        near.max(1.0)
    } else {
        v.ceil().max(1.0)
    }
}

/// Random codebook: `M1` codewords from `P_{U^n}` (H0) and a uniform bin per codeword.
#[derive(Clone, Debug)]
pub struct Codebook {
    n: usize,
    nu: usize,
    /// flat `M1 x n`
    symbols: Vec<Symbol>,
    log_pu: Vec<f64>,
    bin_of: Vec<u64>,
    /// `(bin, index)` sorted, for bin lookup
    by_bin: Vec<(u64, u32)>,
    m2: u64,
    pub seed: SubstreamSeed,
    pub warnings: Vec<String>,
}

impl Codebook {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m1(&self) -> usize {
        self.log_pu.len()
    }

    /// Number of bins; saturates at `u64::MAX`.
    pub fn m2(&self) -> u64 {
        self.m2
    }

    pub fn codeword(&self, i: usize) -> &[Symbol] {
        &self.symbols[i * self.n..(i + 1) * self.n]
    }

    /// 1-based bin of codeword `i`.
    pub fn bin_of(&self, i: usize) -> u64 {
        self.bin_of[i]
    }

    pub fn log_pu(&self, i: usize) -> f64 {
        self.log_pu[i]
    }

    /// Codeword indices in `bin`, ascending.
    pub fn members(&self, bin: u64) -> impl Iterator<Item = usize> + '_ {
        let lo = self.by_bin.partition_point(|&(b, _)| b < bin);
        let hi = self.by_bin.partition_point(|&(b, _)| b <= bin);
        self.by_bin[lo..hi].iter().map(|&(_, i)| i as usize)
    }

    /// Text form: a header line, then `u_1 ... u_n<TAB>bin` per codeword.
    pub fn write_audit<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# n={} m1={} m2={} nu={}", self.n, self.m1(), self.m2, self.nu)?;
        for i in 0..self.m1() {
            let word: Vec<String> = self.codeword(i).iter().map(|s| s.to_string()).collect();
            writeln!(out, "{}\t{}", word.join(" "), self.bin_of[i])?;
        }
        Ok(())
    }
}

pub fn build_codebook(
    model: &DiscreteJointSource,
    channel: &TestChannel,
    n: usize,
    params: &CodecParams,
    cap: usize,
    seed: SubstreamSeed,
) -> Result<Codebook> {
    params.validate()?;
    if n == 0 {
        return Err(Error::param("blocklength must be positive"));
    }
    let view = CodingView::new(model, channel)?;
    let m1f = cardinality(n, params.codebook_rate());
    if m1f > cap as f64 || m1f > u32::MAX as f64 {
        return Err(Error::CodebookTooLarge { required: m1f, cap });
    }
    let m1 = m1f as usize;
    let m2f = cardinality(n, params.r);
    let m2 = if m2f >= u64::MAX as f64 { u64::MAX } else { m2f as u64 };
    let mut warnings = Vec::new();
    if m2f > m1f {
        warnings.push(format!("more bins ({m2f:.3e}) than codewords ({m1})"));
    }
    let mut rng = seed.rng();
    let mut symbols = Vec::with_capacity(m1 * n);
    let mut log_pu = Vec::with_capacity(m1);
    for _ in 0..m1 {
        let (x, _) = sample_block(model, Hypothesis::H0, n, &mut rng);
        let u = apply_test_channel(channel, &x, &mut rng)?;
        log_pu.push(view.log_marginal_u_unchecked(&u, Hypothesis::H0));
        symbols.extend_from_slice(&u);
    }
    let bin_of: Vec<u64> = (0..m1).map(|_| rng.random_range(1..=m2)).collect();
    let mut by_bin: Vec<(u64, u32)> = bin_of.iter().enumerate().map(|(i, &b)| (b, i as u32)).collect();
    by_bin.sort_unstable();
    Ok(Codebook {
        n,
        nu: view.nu(),
        symbols,
        log_pu,
        bin_of,
        by_bin,
        m2,
        seed,
        warnings,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderOutcome {
    Sent { bin: u64 },
    ErrorMessage,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Encoded {
    pub outcome: EncoderOutcome,
    pub chosen: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Decoded {
    pub decision: Hypothesis,
    pub debinned: Option<usize>,
    /// some codeword in the bin passed `T2`
    pub t2_pass: bool,
    /// the debinned codeword passed `A_n`
    pub an_pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Event {
    Correct,
    E11,
    E12,
    E21,
    E22,
}

/// Diagnostics on the encoder's codeword, independent of the decoder's scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ChosenDiagnostics {
    pub in_t2: bool,
    pub in_an: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialTrace {
    pub hypothesis: Hypothesis,
    pub encoder_outcome: EncoderOutcome,
    pub chosen_codeword: Option<usize>,
    pub debinned_codeword: Option<usize>,
    pub t2_pass: bool,
    pub an_pass: bool,
    pub decision: Hypothesis,
    pub event: Event,
    pub chosen: Option<ChosenDiagnostics>,
}

/// Encoder and decoder bound to one codebook.
#[derive(Clone, Debug)]
pub struct Codec<'a> {
    view: CodingView<'a>,
    channel: &'a TestChannel,
    cb: &'a Codebook,
    params: CodecParams,
}

impl<'a> Codec<'a> {
    pub fn new(model: &'a DiscreteJointSource, channel: &'a TestChannel, cb: &'a Codebook, params: CodecParams) -> Result<Self> {
        params.validate()?;
        let view = CodingView::new(model, channel)?;
        if view.nu() != cb.nu {
            return Err(Error::param("codebook alphabet does not match the channel"));
        }
        Ok(Codec {
            view,
            channel,
            cb,
            params,
        })
    }

    pub fn codebook(&self) -> &Codebook {
        self.cb
    }

    fn check_len(&self, s: &[Symbol]) -> Result<()> {
        if s.len() == self.cb.n {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                expected: self.cb.n,
                found: s.len(),
            })
        }
    }

    /// Picks the codeword of largest `log P(u|x)` inside `T1`; ties go to the lowest index.
    pub fn encode(&self, x: &[Symbol]) -> Result<Encoded> {
        self.check_len(x)?;
        let nx = self.view.model().nx();
        if let Some(&s) = x.iter().find(|&&s| s as usize >= nx) {
            return Err(Error::SymbolOutOfAlphabet { symbol: s as usize, size: nx });
        }
        let nu = self.cb.nu;
        let log_w = self.view.log_channel_table();
        let rows: Vec<&[f64]> = x.iter().map(|&s| &log_w[s as usize * nu..(s as usize + 1) * nu]).collect();
        let inv_n = 1.0 / self.cb.n as f64;
        let lo = self.params.r0_lower - self.params.slack.t1;
        let hi = self.params.r0_upper + self.params.slack.t1;
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.cb.m1() {
            let u = self.cb.codeword(i);
            let cond: f64 = rows.iter().zip(u).map(|(row, &s)| row[s as usize]).sum();
            let density = density(cond, self.cb.log_pu[i], inv_n);
            if density > lo && density < hi && best.is_none_or(|(_, b)| cond > b) {
                best = Some((i, cond));
            }
        }
        Ok(match best {
            Some((i, _)) => Encoded {
                outcome: EncoderOutcome::Sent { bin: self.cb.bin_of[i] },
                chosen: Some(i),
            },
            None => Encoded {
                outcome: EncoderOutcome::ErrorMessage,
                chosen: None,
            },
        })
    }

    /// `(1/n) log P(u|y) / P_U(u)` under H0, given `log P_Y(y)`.
    fn t2_density(&self, i: usize, y: &[Symbol], log_py: f64) -> f64 {
        let joint = self.view.log_joint_uy_unchecked(self.cb.codeword(i), y, Hypothesis::H0);
        let cond = if log_py == f64::NEG_INFINITY { f64::NEG_INFINITY } else { joint - log_py };
        density(cond, self.cb.log_pu[i], 1.0 / self.cb.n as f64)
    }

    fn an_density(&self, i: usize, y: &[Symbol]) -> f64 {
        let u = self.cb.codeword(i);
        let p0 = self.view.log_joint_uy_unchecked(u, y, Hypothesis::H0);
        let p1 = self.view.log_joint_uy_unchecked(u, y, Hypothesis::H1);
        density(p0, p1, 1.0 / self.cb.n as f64)
    }

    fn in_t2(&self, i: usize, y: &[Symbol], log_py: f64) -> bool {
        self.t2_density(i, y, log_py) > self.params.r_prime - self.params.slack.t2
    }

    fn in_an(&self, i: usize, y: &[Symbol]) -> bool {
        self.an_density(i, y) > self.params.s_threshold - self.params.slack.an
    }

    /// Scans the bin in index order; the first `T2` member is debinned and
    /// H0 is declared iff it lies in `A_n`.
    pub fn decode(&self, outcome: EncoderOutcome, y: &[Symbol]) -> Result<Decoded> {
        self.check_len(y)?;
        let reject = Decoded {
            decision: Hypothesis::H1,
            debinned: None,
            t2_pass: false,
            an_pass: false,
        };
        let EncoderOutcome::Sent { bin } = outcome else {
            return Ok(reject);
        };
        let log_py = self.view.model().log_marginal_y(Hypothesis::H0, y)?;
        let Some(i) = self.cb.members(bin).find(|&i| self.in_t2(i, y, log_py)) else {
            return Ok(reject);
        };
        let an_pass = self.in_an(i, y);
        Ok(Decoded {
            decision: if an_pass { Hypothesis::H0 } else { Hypothesis::H1 },
            debinned: Some(i),
            t2_pass: true,
            an_pass,
        })
    }

    /// Whether the encoder's codeword would pass `T2` and `A_n` against `y`.
    pub fn diagnose(&self, chosen: usize, y: &[Symbol]) -> Result<ChosenDiagnostics> {
        self.check_len(y)?;
        let log_py = self.view.model().log_marginal_y(Hypothesis::H0, y)?;
        Ok(ChosenDiagnostics {
            in_t2: self.in_t2(chosen, y, log_py),
            in_an: self.in_an(chosen, y),
        })
    }

    /// One full trial: draw `(x, y)` under `truth`, encode, decode, classify.
    pub fn run_trial(&self, truth: Hypothesis, rng: &mut StreamRng) -> Result<TrialTrace> {
        let (x, y) = sample_block(self.view.model(), truth, self.cb.n, rng);
        let enc = self.encode(&x)?;
        let dec = self.decode(enc.outcome, &y)?;
        let chosen = enc.chosen.map(|c| self.diagnose(c, &y)).transpose()?;
        let mut trace = TrialTrace {
            hypothesis: truth,
            encoder_outcome: enc.outcome,
            chosen_codeword: enc.chosen,
            debinned_codeword: dec.debinned,
            t2_pass: dec.t2_pass,
            an_pass: dec.an_pass,
            decision: dec.decision,
            event: Event::Correct,
            chosen,
        };
        trace.event = classify_event(&trace)?;
        Ok(trace)
    }

    /// The channel in use; the codebook was drawn through it.
    pub fn channel(&self) -> &TestChannel {
        self.channel
    }
}

fn density(num: f64, den: f64, inv_n: f64) -> f64 {
    if num == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else if den == f64::NEG_INFINITY {
        f64::INFINITY
    } else {
        (num - den) * inv_n
    }
}

/// Tags a trial. Under H0 a rejection is `E12` when a codeword other than
/// the encoder's was debinned, else `E11`; under H1 an acceptance is `E21`
/// when the debinned codeword differs from the encoder's, else `E22`.
pub fn classify_event(t: &TrialTrace) -> Result<Event> {
    if t.debinned_codeword.is_some() != t.t2_pass {
        return Err(Error::InconsistentTrace("debinned codeword without T2 pass"));
    }
    if t.an_pass && t.debinned_codeword.is_none() {
        return Err(Error::InconsistentTrace("A_n pass without a debinned codeword"));
    }
    if (t.decision == Hypothesis::H0) != t.an_pass {
        return Err(Error::InconsistentTrace("decision disagrees with A_n"));
    }
    match (t.encoder_outcome, t.chosen_codeword) {
        (EncoderOutcome::ErrorMessage, None) => {
            if t.debinned_codeword.is_some() {
                return Err(Error::InconsistentTrace("debinning after an error message"));
            }
        }
        (EncoderOutcome::Sent { .. }, Some(_)) => {}
        _ => return Err(Error::InconsistentTrace("encoder outcome and chosen codeword disagree")),
    }
    let mismatch = t.debinned_codeword.is_some() && t.debinned_codeword != t.chosen_codeword;
    Ok(match (t.hypothesis, t.decision) {
        (Hypothesis::H0, Hypothesis::H0) | (Hypothesis::H1, Hypothesis::H1) => Event::Correct,
        (Hypothesis::H0, Hypothesis::H1) if mismatch => Event::E12,
        (Hypothesis::H0, Hypothesis::H1) => Event::E11,
        (Hypothesis::H1, Hypothesis::H0) if mismatch => Event::E21,
        (Hypothesis::H1, Hypothesis::H0) => Event::E22,
    })
}
