use super::{DiscreteJointSource, JointPmf, Symbol, MAX_ALPHABET};
use crate::error::{Error, Result};

/// Successive pairs of vectors `(X_t^M, Y_t^N)` drawn i.i.d. from a block
/// joint pmf. Equivalent to an IID source over super-symbols, where a block
/// `(a_0, .., a_{M-1})` maps to the base-|X| integer `a_0 a_1 .. a_{M-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockIidSource {
    pub x_alphabet: usize,
    pub y_alphabet: usize,
    pub m: usize,
    pub n: usize,
    /// Per hypothesis, row-major over `(x_super, y_super)`.
    pub block_pmf: [JointPmf; 2],
}

fn checked_pow(base: usize, exp: usize) -> Result<usize> {
    base.checked_pow(exp as u32)
        .filter(|&v| v <= MAX_ALPHABET)
        .ok_or(Error::AlphabetTooLarge {
            size: base.saturating_pow(exp as u32),
            limit: MAX_ALPHABET,
        })
}

impl BlockIidSource {
    pub fn new(x_alphabet: usize, y_alphabet: usize, m: usize, n: usize, h0: JointPmf, h1: JointPmf) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::param("block dimensions must be positive"));
        }
        let sx = checked_pow(x_alphabet, m)?;
        let sy = checked_pow(y_alphabet, n)?;
        for p in [&h0, &h1] {
            if p.nx() != sx || p.ny() != sy {
                return Err(Error::param(format!(
                    "block pmf must be {sx}x{sy}, got {}x{}",
                    p.nx(),
                    p.ny()
                )));
            }
        }
        Ok(BlockIidSource {
            x_alphabet,
            y_alphabet,
            m,
            n,
            block_pmf: [h0, h1],
        })
    }

    pub fn to_discrete(&self) -> Result<DiscreteJointSource> {
        DiscreteJointSource::iid(self.block_pmf[0].clone(), self.block_pmf[1].clone())
    }

    pub fn encode_x(&self, block: &[Symbol]) -> Symbol {
        encode(block, self.x_alphabet)
    }

    pub fn decode_x(&self, s: Symbol) -> Vec<Symbol> {
        decode(s, self.x_alphabet, self.m)
    }

    pub fn encode_y(&self, block: &[Symbol]) -> Symbol {
        encode(block, self.y_alphabet)
    }

    pub fn decode_y(&self, s: Symbol) -> Vec<Symbol> {
        decode(s, self.y_alphabet, self.n)
    }
}

fn encode(block: &[Symbol], base: usize) -> Symbol {
    block.iter().fold(0usize, |acc, &a| acc * base + a as usize) as Symbol
}

fn decode(s: Symbol, base: usize, len: usize) -> Vec<Symbol> {
    let mut v = vec![0; len];
    let mut rest = s as usize;
    for slot in v.iter_mut().rev() {
        *slot = (rest % base) as Symbol;
        rest /= base;
    }
    v
}
