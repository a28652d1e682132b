//! Hypothesis-indexed joint laws of `(X^n, Y^n)` and the auxiliary test channel.
//!
//! Every discrete source is stored internally as a latent chain: a hidden
//! state `s` with an initial law, an optional transition kernel, and a
//! per-state emission pmf over `(x, y)` pairs. The three memory kinds map
//! onto it as follows.
//!
//! | memory  | states          | transition       | emission          |
//! |---------|-----------------|------------------|-------------------|
//! | IID     | 1               | none             | the joint pmf     |
//! | Markov  | `|X|·|Y|` pairs | the pair kernel  | point mass on `s` |
//! | Mixture | components      | none (persists)  | component pmf     |
//!
//! All sequence probabilities (`P(x,y)`, `P(u)`, `P(u,y)`, `P(y)`) are then
//! one scaled forward recursion with a different per-state emission factor.
//! Information quantities are in nats throughout; zero-probability events
//! evaluate to `-inf` instead of erroring.

mod block;
mod channel;
mod gaussian;
mod pmf;

pub use block::BlockIidSource;
pub use channel::{apply_test_channel, ChannelMatrix, TestChannel};
pub use gaussian::{CovGenerator, GaussianJointSource};
pub use pmf::{JointPmf, PMF_SUM_TOLERANCE};

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use channel::check_symbol;

/// Symbols are indices into a finite alphabet of at most 256 letters.
pub type Symbol = u8;
pub const MAX_ALPHABET: usize = 256;
/// Upper bound on the number of latent states (pair alphabet of a Markov chain).
pub const MAX_CHAIN_STATES: usize = 4096;
/// Tolerance used when validating that marginals agree across hypotheses.
pub const MARGINAL_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Hypothesis {
    H0,
    H1,
}

impl Hypothesis {
    pub const BOTH: [Hypothesis; 2] = [Hypothesis::H0, Hypothesis::H1];

    pub fn index(self) -> usize {
        match self {
            Hypothesis::H0 => 0,
            Hypothesis::H1 => 1,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Hypothesis::H0 => Hypothesis::H1,
            Hypothesis::H1 => Hypothesis::H0,
        }
    }
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Hypothesis::H0 => write!(f, "H0"),
            Hypothesis::H1 => write!(f, "H1"),
        }
    }
}

/// Memory structure of a discrete source.
#[derive(Clone, Debug, PartialEq)]
pub enum Memory {
    Iid,
    /// Markov chain on the pair alphabet, state index `x * ny + y`. The
    /// per-hypothesis pmf is the initial law.
    Markov { transitions: [Vec<Vec<f64>>; 2] },
    /// One IID component is drawn per sequence with the given weights
    /// (shared by both hypotheses). Non-ergodic.
    Mixture {
        weights: Vec<f64>,
        components: [Vec<JointPmf>; 2],
    },
}

#[derive(Clone, Debug)]
struct LatentChain {
    states: usize,
    initial: Vec<f64>,
    /// Row-major `states x states`; `None` means the state never changes.
    transition: Option<Vec<f64>>,
    /// Row-major `states x (nx * ny)`.
    emission: Vec<f64>,
    px: Vec<f64>,
    py: Vec<f64>,
    initial_sampler: WeightedIndex<f64>,
    transition_samplers: Vec<WeightedIndex<f64>>,
    emission_samplers: Vec<WeightedIndex<f64>>,
}

impl LatentChain {
    fn new(
        nx: usize,
        ny: usize,
        initial: Vec<f64>,
        transition: Option<Vec<f64>>,
        emission: Vec<f64>,
    ) -> Self {
        let states = initial.len();
        let nxy = nx * ny;
        let mut px = vec![0.0; states * nx];
        let mut py = vec![0.0; states * ny];
        for s in 0..states {
            for x in 0..nx {
                for y in 0..ny {
                    let e = emission[s * nxy + x * ny + y];
                    px[s * nx + x] += e;
                    py[s * ny + y] += e;
                }
            }
        }
        let sampler = |w: &[f64]| WeightedIndex::new(w.iter().copied()).expect("validated weights");
        let transition_samplers = transition
            .as_ref()
            .map(|t| t.chunks(states).map(sampler).collect())
            .unwrap_or_default();
        LatentChain {
            states,
            initial_sampler: sampler(&initial),
            transition_samplers,
            emission_samplers: emission.chunks(nxy).map(sampler).collect(),
            initial,
            transition,
            emission,
            px,
            py,
        }
    }

    /// Scaled forward recursion; `emit(t, s)` is the observation likelihood of
    /// step `t` in state `s`. Returns the log-likelihood, `-inf` on a zero.
    fn forward(&self, len: usize, mut emit: impl FnMut(usize, usize) -> f64) -> f64 {
        let s = self.states;
        if s == 1 {
            let mut acc = 0.0;
            for t in 0..len {
                let e = emit(t, 0);
                if e <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                acc += e.ln();
            }
            return acc;
        }
        if len == 0 {
            return 0.0;
        }
        let mut alpha: Vec<f64> = (0..s).map(|k| self.initial[k] * emit(0, k)).collect();
        let mut next = vec![0.0; s];
        let mut ll = 0.0;
        for t in 0..len {
            if t > 0 {
                match &self.transition {
                    None => {
                        for k in 0..s {
                            next[k] = if alpha[k] > 0.0 { alpha[k] * emit(t, k) } else { 0.0 };
                        }
                    }
                    Some(a) => {
                        for (k2, nk) in next.iter_mut().enumerate() {
                            let mut acc = 0.0;
                            for k in 0..s {
                                acc += alpha[k] * a[k * s + k2];
                            }
                            *nk = if acc > 0.0 { acc * emit(t, k2) } else { 0.0 };
                        }
                    }
                }
                std::mem::swap(&mut alpha, &mut next);
            }
            let c: f64 = alpha.iter().sum();
            if c <= 0.0 || !c.is_finite() {
                return f64::NEG_INFINITY;
            }
            ll += c.ln();
            for v in alpha.iter_mut() {
                *v /= c;
            }
        }
        ll
    }

    fn sample<R: Rng + ?Sized>(&self, ny: usize, n: usize, rng: &mut R) -> (Vec<Symbol>, Vec<Symbol>) {
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        if n == 0 {
            return (xs, ys);
        }
        let mut s = self.initial_sampler.sample(rng);
        for t in 0..n {
            if t > 0 && !self.transition_samplers.is_empty() {
                s = self.transition_samplers[s].sample(rng);
            }
            let pair = self.emission_samplers[s].sample(rng);
            xs.push((pair / ny) as Symbol);
            ys.push((pair % ny) as Symbol);
        }
        (xs, ys)
    }
}

/// Marginal agreement summary returned by [`validate_marginals`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MarginalReport {
    pub max_deviation_x: f64,
    pub max_deviation_y: f64,
}

/// Hypothesis-indexed joint law of `(X^n, Y^n)` over finite alphabets.
#[derive(Clone, Debug)]
pub struct DiscreteJointSource {
    nx: usize,
    ny: usize,
    pmf: [JointPmf; 2],
    memory: Memory,
    chains: [LatentChain; 2],
}

fn check_alphabets(nx: usize, ny: usize) -> Result<()> {
    for size in [nx, ny] {
        if size == 0 || size > MAX_ALPHABET {
            return Err(Error::AlphabetTooLarge {
                size,
                limit: MAX_ALPHABET,
            });
        }
    }
    Ok(())
}

fn same_shape(a: &JointPmf, b: &JointPmf) -> Result<()> {
    if a.nx() != b.nx() || a.ny() != b.ny() {
        return Err(Error::param(format!(
            "pmf shapes differ: {}x{} vs {}x{}",
            a.nx(),
            a.ny(),
            b.nx(),
            b.ny()
        )));
    }
    Ok(())
}

impl DiscreteJointSource {
    /// Memoryless source: pairs `(X_t, Y_t)` i.i.d. with the per-hypothesis pmf.
    pub fn iid(pmf_h0: JointPmf, pmf_h1: JointPmf) -> Result<Self> {
        same_shape(&pmf_h0, &pmf_h1)?;
        let (nx, ny) = (pmf_h0.nx(), pmf_h0.ny());
        check_alphabets(nx, ny)?;
        let chain = |p: &JointPmf| LatentChain::new(nx, ny, vec![1.0], None, p.probs().to_vec());
        Ok(DiscreteJointSource {
            nx,
            ny,
            chains: [chain(&pmf_h0), chain(&pmf_h1)],
            pmf: [pmf_h0, pmf_h1],
            memory: Memory::Iid,
        })
    }

    /// Doubly symmetric binary source with crossover `p0` under H0 and `p1` under H1.
    pub fn dsbs(p0: f64, p1: f64) -> Result<Self> {
        DiscreteJointSource::iid(JointPmf::dsbs(p0)?, JointPmf::dsbs(p1)?)
    }

    /// Markov chain on pairs `(X_t, Y_t)`. Transition rows are indexed by the
    /// pair state `x * ny + y`; `initial_*` is the law of the first pair.
    pub fn markov(
        initial_h0: JointPmf,
        initial_h1: JointPmf,
        transition_h0: Vec<Vec<f64>>,
        transition_h1: Vec<Vec<f64>>,
    ) -> Result<Self> {
        same_shape(&initial_h0, &initial_h1)?;
        let (nx, ny) = (initial_h0.nx(), initial_h0.ny());
        check_alphabets(nx, ny)?;
        let states = nx * ny;
        if states > MAX_CHAIN_STATES {
            return Err(Error::AlphabetTooLarge {
                size: states,
                limit: MAX_CHAIN_STATES,
            });
        }
        let mut flat = Vec::with_capacity(2);
        let mut kept = Vec::with_capacity(2);
        for (h, t) in [transition_h0, transition_h1].into_iter().enumerate() {
            if t.len() != states {
                return Err(Error::LengthMismatch {
                    expected: states,
                    found: t.len(),
                });
            }
            let mut rows = Vec::with_capacity(states);
            for (i, r) in t.iter().enumerate() {
                if r.len() != states {
                    return Err(Error::LengthMismatch {
                        expected: states,
                        found: r.len(),
                    });
                }
                rows.push(pmf::normalized(&format!("H{h} transition row {i}"), r.clone())?);
            }
            flat.push(rows.concat());
            kept.push(rows);
        }
        let mut emission = vec![0.0; states * states];
        for s in 0..states {
            emission[s * states + s] = 1.0;
        }
        let t1 = flat.pop().unwrap();
        let t0 = flat.pop().unwrap();
        let chains = [
            LatentChain::new(nx, ny, initial_h0.probs().to_vec(), Some(t0), emission.clone()),
            LatentChain::new(nx, ny, initial_h1.probs().to_vec(), Some(t1), emission),
        ];
        let k1 = kept.pop().unwrap();
        let k0 = kept.pop().unwrap();
        Ok(DiscreteJointSource {
            nx,
            ny,
            pmf: [initial_h0, initial_h1],
            memory: Memory::Markov {
                transitions: [k0, k1],
            },
            chains,
        })
    }

    /// Mixture of IID laws: one component is selected per sequence.
    pub fn mixture(weights: Vec<f64>, components_h0: Vec<JointPmf>, components_h1: Vec<JointPmf>) -> Result<Self> {
        let weights = pmf::normalized("mixture weights", weights)?;
        let k = weights.len();
        if components_h0.len() != k || components_h1.len() != k {
            return Err(Error::param("one component per weight and hypothesis required"));
        }
        let first = &components_h0[0];
        for c in components_h0.iter().chain(&components_h1) {
            same_shape(first, c)?;
        }
        let (nx, ny) = (first.nx(), first.ny());
        check_alphabets(nx, ny)?;
        let average = |comps: &[JointPmf]| -> Result<JointPmf> {
            let mut acc = vec![0.0; nx * ny];
            for (w, c) in weights.iter().zip(comps) {
                for (a, p) in acc.iter_mut().zip(c.probs()) {
                    *a += w * p;
                }
            }
            JointPmf::new(nx, ny, acc)
        };
        let pmf = [average(&components_h0)?, average(&components_h1)?];
        let chain = |comps: &[JointPmf]| {
            let emission = comps.iter().flat_map(|c| c.probs().iter().copied()).collect();
            LatentChain::new(nx, ny, weights.clone(), None, emission)
        };
        let chains = [chain(&components_h0), chain(&components_h1)];
        Ok(DiscreteJointSource {
            nx,
            ny,
            pmf,
            memory: Memory::Mixture {
                weights,
                components: [components_h0, components_h1],
            },
            chains,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Per-step pmf: the joint law for IID, the initial law for Markov, the
    /// component average for mixtures.
    pub fn pmf(&self, h: Hypothesis) -> &JointPmf {
        &self.pmf[h.index()]
    }

    pub fn memory(&self) -> &Memory {
        &self.memory
    }

    pub fn is_iid(&self) -> bool {
        matches!(self.memory, Memory::Iid)
    }

    /// Same model with the roles of H0 and H1 exchanged.
    pub fn swapped(&self) -> Self {
        let mut m = self.clone();
        m.pmf.swap(0, 1);
        m.chains.swap(0, 1);
        match &mut m.memory {
            Memory::Iid => {}
            Memory::Markov { transitions } => transitions.swap(0, 1),
            Memory::Mixture { components, .. } => components.swap(0, 1),
        }
        m
    }

    /// Stationary law of the pair chain (Markov memory), or `None`.
    pub fn stationary_pmf(&self, h: Hypothesis) -> Result<Option<JointPmf>> {
        match &self.memory {
            Memory::Markov { .. } => {
                let chain = &self.chains[h.index()];
                let pi = stationary_vector(chain.states, chain.transition.as_ref().unwrap())?;
                Ok(Some(JointPmf::new(self.nx, self.ny, pi)?))
            }
            _ => Ok(None),
        }
    }

    fn chain(&self, h: Hypothesis) -> &LatentChain {
        &self.chains[h.index()]
    }

    fn check_x(&self, x: &[Symbol]) -> Result<()> {
        x.iter().try_for_each(|&s| check_symbol(s, self.nx))
    }

    fn check_y(&self, y: &[Symbol]) -> Result<()> {
        y.iter().try_for_each(|&s| check_symbol(s, self.ny))
    }

    /// `log P_{X^n}(x)` under `h`.
    pub fn log_marginal_x(&self, h: Hypothesis, x: &[Symbol]) -> Result<f64> {
        self.check_x(x)?;
        let c = self.chain(h);
        Ok(c.forward(x.len(), |t, s| c.px[s * self.nx + x[t] as usize]))
    }

    /// `log P_{Y^n}(y)` under `h`.
    pub fn log_marginal_y(&self, h: Hypothesis, y: &[Symbol]) -> Result<f64> {
        self.check_y(y)?;
        let c = self.chain(h);
        Ok(c.forward(y.len(), |t, s| c.py[s * self.ny + y[t] as usize]))
    }
}

/// Solves `pi A = pi`, `sum(pi) = 1` for a row-stochastic kernel.
fn stationary_vector(states: usize, transition: &[f64]) -> Result<Vec<f64>> {
    // (A^T - I) pi = 0 with the last equation replaced by normalization
    let mut m = DMatrix::<f64>::zeros(states, states);
    for i in 0..states {
        for j in 0..states {
            m[(j, i)] = transition[i * states + j];
        }
        m[(i, i)] -= 1.0;
    }
    for j in 0..states {
        m[(states - 1, j)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(states);
    rhs[states - 1] = 1.0;
    let pi = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::param("transition kernel has no unique stationary law"))?;
    Ok(pi.iter().map(|&p| p.max(0.0)).collect())
}

fn compare(axis: char, a: &[f64], b: &[f64], tol: f64) -> Result<f64> {
    let mut worst = (0usize, 0.0f64);
    for (i, (p, q)) in a.iter().zip(b).enumerate() {
        let d = (p - q).abs();
        if d > worst.1 {
            worst = (i, d);
        }
    }
    if worst.1 > tol {
        return Err(Error::MarginalMismatch {
            axis,
            symbol: worst.0,
            deviation: worst.1,
        });
    }
    Ok(worst.1)
}

/// Checks that the X and Y marginals do not depend on the hypothesis.
///
/// IID and mixture sources compare the per-step marginals. Markov sources
/// compare both the initial-law marginals and the stationary marginals
/// (obtained from the unit-eigenvalue left eigenvector of each kernel).
pub fn validate_marginals(model: &DiscreteJointSource) -> Result<MarginalReport> {
    validate_marginals_with(model, MARGINAL_TOLERANCE)
}

pub fn validate_marginals_with(model: &DiscreteJointSource, tol: f64) -> Result<MarginalReport> {
    let mut laws = vec![(model.pmf(Hypothesis::H0).clone(), model.pmf(Hypothesis::H1).clone())];
    if let (Some(a), Some(b)) = (
        model.stationary_pmf(Hypothesis::H0)?,
        model.stationary_pmf(Hypothesis::H1)?,
    ) {
        laws.push((a, b));
    }
    let mut report = MarginalReport {
        max_deviation_x: 0.0,
        max_deviation_y: 0.0,
    };
    for (p0, p1) in &laws {
        let dx = compare('X', &p0.marginal_x(), &p1.marginal_x(), tol)?;
        let dy = compare('Y', &p0.marginal_y(), &p1.marginal_y(), tol)?;
        report.max_deviation_x = report.max_deviation_x.max(dx);
        report.max_deviation_y = report.max_deviation_y.max(dy);
    }
    Ok(report)
}

/// Draws a length-`n` pair `(x^n, y^n)` from the law of `h`.
pub fn sample_block<R: Rng + ?Sized>(
    model: &DiscreteJointSource,
    h: Hypothesis,
    n: usize,
    rng: &mut R,
) -> (Vec<Symbol>, Vec<Symbol>) {
    model.chain(h).sample(model.ny, n, rng)
}

/// Exact `log P(x^n, y^n)` under `h`, `-inf` for impossible sequences.
pub fn log_joint_prob(model: &DiscreteJointSource, h: Hypothesis, x: &[Symbol], y: &[Symbol]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    model.check_x(x)?;
    model.check_y(y)?;
    let c = model.chain(h);
    let nxy = model.nx * model.ny;
    Ok(c.forward(x.len(), |t, s| c.emission[s * nxy + x[t] as usize * model.ny + y[t] as usize]))
}

/// A source paired with a discrete test channel, with per-state emission
/// tables for `U` precomputed. Cheap to evaluate repeatedly; used by the
/// density and codec code.
#[derive(Clone, Debug)]
pub struct CodingView<'a> {
    model: &'a DiscreteJointSource,
    channel: &'a ChannelMatrix,
    /// per hypothesis: `states x nu`, `P(U=u | s)`
    pu: [Vec<f64>; 2],
    /// per hypothesis: `states x (ny * nu)`, `P(Y=y, U=u | s)`
    puy: [Vec<f64>; 2],
    log_w: Vec<f64>,
}

impl<'a> CodingView<'a> {
    pub fn new(model: &'a DiscreteJointSource, channel: &'a TestChannel) -> Result<Self> {
        let channel = match channel {
            TestChannel::Discrete(m) => m,
            TestChannel::GaussianAdditive { .. } => {
                return Err(Error::Unsupported("Gaussian channels are handled analytically only"))
            }
        };
        if channel.nx() != model.nx {
            return Err(Error::LengthMismatch {
                expected: model.nx,
                found: channel.nx(),
            });
        }
        let (nx, ny, nu) = (model.nx, model.ny, channel.nu());
        let nxy = nx * ny;
        let tables = |c: &LatentChain| {
            let mut pu = vec![0.0; c.states * nu];
            let mut puy = vec![0.0; c.states * ny * nu];
            for s in 0..c.states {
                for x in 0..nx {
                    for y in 0..ny {
                        let e = c.emission[s * nxy + x * ny + y];
                        if e == 0.0 {
                            continue;
                        }
                        for u in 0..nu {
                            let v = e * channel.get(x, u);
                            pu[s * nu + u] += v;
                            puy[s * ny * nu + y * nu + u] += v;
                        }
                    }
                }
            }
            (pu, puy)
        };
        let (pu0, puy0) = tables(&model.chains[0]);
        let (pu1, puy1) = tables(&model.chains[1]);
        let log_w = (0..nx * nu).map(|i| channel.get(i / nu, i % nu).ln()).collect();
        Ok(CodingView {
            model,
            channel,
            pu: [pu0, pu1],
            puy: [puy0, puy1],
            log_w,
        })
    }

    pub fn model(&self) -> &DiscreteJointSource {
        self.model
    }

    pub fn nu(&self) -> usize {
        self.channel.nu()
    }

    fn check_u(&self, u: &[Symbol]) -> Result<()> {
        u.iter().try_for_each(|&s| check_symbol(s, self.channel.nu()))
    }

    /// `ln W(u | x)` table, row-major `x * nu + u`.
    pub fn log_channel_table(&self) -> &[f64] {
        &self.log_w
    }

    /// `log P_{U^n}(u)` under `h`.
    pub fn log_marginal_u(&self, u: &[Symbol], h: Hypothesis) -> Result<f64> {
        self.check_u(u)?;
        Ok(self.log_marginal_u_unchecked(u, h))
    }

    pub(crate) fn log_marginal_u_unchecked(&self, u: &[Symbol], h: Hypothesis) -> f64 {
        let c = self.model.chain(h);
        let nu = self.channel.nu();
        let pu = &self.pu[h.index()];
        c.forward(u.len(), |t, s| pu[s * nu + u[t] as usize])
    }

    /// `log P_{U^n Y^n}(u, y)` under `h`.
    pub fn log_joint_uy(&self, u: &[Symbol], y: &[Symbol], h: Hypothesis) -> Result<f64> {
        if u.len() != y.len() {
            return Err(Error::LengthMismatch {
                expected: y.len(),
                found: u.len(),
            });
        }
        self.check_u(u)?;
        self.model.check_y(y)?;
        Ok(self.log_joint_uy_unchecked(u, y, h))
    }

    pub(crate) fn log_joint_uy_unchecked(&self, u: &[Symbol], y: &[Symbol], h: Hypothesis) -> f64 {
        let c = self.model.chain(h);
        let nu = self.channel.nu();
        let stride = self.model.ny * nu;
        let puy = &self.puy[h.index()];
        c.forward(u.len(), |t, s| puy[s * stride + y[t] as usize * nu + u[t] as usize])
    }

    /// `log P_{U^n | Y^n}(u | y)` under `h`.
    pub fn log_cond_u_given_y(&self, u: &[Symbol], y: &[Symbol], h: Hypothesis) -> Result<f64> {
        let joint = self.log_joint_uy(u, y, h)?;
        let py = self.model.log_marginal_y(h, y)?;
        Ok(cond_log(joint, py))
    }

    /// `log P_{U^n | X^n}(u | x)`: the memoryless channel product.
    pub fn log_cond_u_given_x(&self, u: &[Symbol], x: &[Symbol]) -> Result<f64> {
        if u.len() != x.len() {
            return Err(Error::LengthMismatch {
                expected: x.len(),
                found: u.len(),
            });
        }
        self.check_u(u)?;
        self.model.check_x(x)?;
        let nu = self.channel.nu();
        Ok(u
            .iter()
            .zip(x)
            .map(|(&ui, &xi)| self.log_w[xi as usize * nu + ui as usize])
            .sum())
    }
}

/// `a - b` in log space where `b = -inf` (conditioning on an impossible
/// event) yields `-inf` instead of NaN.
pub(crate) fn cond_log(joint: f64, marginal: f64) -> f64 {
    if marginal == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        joint - marginal
    }
}

/// `log P_{U^n}(u)` under H0 (equal to H1 for models with valid marginals).
pub fn log_marginal_u(model: &DiscreteJointSource, channel: &TestChannel, u: &[Symbol]) -> Result<f64> {
    CodingView::new(model, channel)?.log_marginal_u(u, Hypothesis::H0)
}

/// `log P_{U^n | Y^n}(u | y)` under `h`, marginalizing the hidden X.
pub fn log_cond_u_given_y(
    model: &DiscreteJointSource,
    channel: &TestChannel,
    u: &[Symbol],
    y: &[Symbol],
    h: Hypothesis,
) -> Result<f64> {
    CodingView::new(model, channel)?.log_cond_u_given_y(u, y, h)
}
