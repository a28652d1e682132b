use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::pmf::normalized;
use super::Symbol;
use crate::error::{Error, Result};

/// Per-symbol conditional pmf `P_{U|X}`, row-major over `x * nu + u`.
#[derive(Clone, Debug)]
pub struct ChannelMatrix {
    nx: usize,
    nu: usize,
    probs: Vec<f64>,
    rows: Vec<WeightedIndex<f64>>,
}

impl PartialEq for ChannelMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.nx == other.nx && self.nu == other.nu && self.probs == other.probs
    }
}

impl ChannelMatrix {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let nx = rows.len();
        let nu = rows.first().map_or(0, Vec::len);
        if nx == 0 || nu == 0 || nu > super::MAX_ALPHABET || nx > super::MAX_ALPHABET {
            return Err(Error::param("channel alphabets must be in 1..=256"));
        }
        let mut probs = Vec::with_capacity(nx * nu);
        for (x, r) in rows.iter().enumerate() {
            if r.len() != nu {
                return Err(Error::param("ragged channel rows"));
            }
            probs.extend(normalized(&format!("channel row {x}"), r.clone())?);
        }
        let rows = probs
            .chunks(nu)
            .map(|r| WeightedIndex::new(r.iter().copied()).expect("validated row"))
            .collect();
        Ok(ChannelMatrix { nx, nu, probs, rows })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    #[inline]
    pub fn get(&self, x: usize, u: usize) -> f64 {
        self.probs[x * self.nu + u]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.probs.chunks(self.nu).map(<[f64]>::to_vec).collect()
    }
}

/// The auxiliary-variable kernel. It only ever reads X, so `U -> X -> Y`
/// holds for every source law it is paired with.
#[derive(Clone, Debug, PartialEq)]
pub enum TestChannel {
    Discrete(ChannelMatrix),
    /// `U = X + Z` with `Z ~ N(0, kappa)` independent of X.
    GaussianAdditive { kappa: f64 },
}

impl TestChannel {
    pub fn discrete(rows: &[Vec<f64>]) -> Result<Self> {
        Ok(TestChannel::Discrete(ChannelMatrix::new(rows)?))
    }

    /// Binary symmetric channel with crossover `q`.
    pub fn bsc(q: f64) -> Result<Self> {
        TestChannel::discrete(&[vec![1.0 - q, q], vec![q, 1.0 - q]])
    }

    pub fn gaussian(kappa: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::param(format!("kappa must be finite and > 0, got {kappa}")));
        }
        Ok(TestChannel::GaussianAdditive { kappa })
    }

    pub fn as_discrete(&self) -> Result<&ChannelMatrix> {
        match self {
            TestChannel::Discrete(m) => Ok(m),
            TestChannel::GaussianAdditive { .. } => {
                Err(Error::KindMismatch("discrete input needs a discrete channel"))
            }
        }
    }

    pub fn kappa(&self) -> Result<f64> {
        match self {
            TestChannel::GaussianAdditive { kappa } => Ok(*kappa),
            TestChannel::Discrete(_) => Err(Error::KindMismatch("real input needs a Gaussian channel")),
        }
    }

    /// Applies the channel symbol by symbol to a discrete sequence.
    pub fn apply_discrete<R: Rng + ?Sized>(&self, x: &[Symbol], rng: &mut R) -> Result<Vec<Symbol>> {
        let m = self.as_discrete()?;
        x.iter()
            .map(|&s| {
                let row = m.rows.get(s as usize).ok_or(Error::SymbolOutOfAlphabet {
                    symbol: s as usize,
                    size: m.nx,
                })?;
                Ok(row.sample(rng) as Symbol)
            })
            .collect()
    }

    /// Adds independent `N(0, kappa)` noise to a real sequence.
    pub fn apply_gaussian<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        let kappa = self.kappa()?;
        let noise = Normal::new(0.0, kappa.sqrt()).map_err(|e| Error::param(e.to_string()))?;
        Ok(x.iter().map(|&v| v + noise.sample(rng)).collect())
    }

    /// `log P_{U^n|X^n}(u|x)` for a discrete channel (product over symbols).
    pub fn log_cond(&self, u: &[Symbol], x: &[Symbol]) -> Result<f64> {
        let m = self.as_discrete()?;
        if u.len() != x.len() {
            return Err(Error::LengthMismatch {
                expected: x.len(),
                found: u.len(),
            });
        }
        let mut acc = 0.0;
        for (&ui, &xi) in u.iter().zip(x) {
            check_symbol(xi, m.nx)?;
            check_symbol(ui, m.nu)?;
            acc += m.get(xi as usize, ui as usize).ln();
        }
        Ok(acc)
    }
}

pub(crate) fn check_symbol(s: Symbol, size: usize) -> Result<()> {
    if (s as usize) < size {
        Ok(())
    } else {
        Err(Error::SymbolOutOfAlphabet {
            symbol: s as usize,
            size,
        })
    }
}

/// Applies a test channel to a discrete sequence.
pub fn apply_test_channel<R: Rng + ?Sized>(
    channel: &TestChannel,
    x: &[Symbol],
    rng: &mut R,
) -> Result<Vec<Symbol>> {
    channel.apply_discrete(x, rng)
}
