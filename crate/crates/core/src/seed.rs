//! Portable random substreams.
//!
//! All randomness comes from ChaCha8 (`rand_chacha` 0.9), a counter-based
//! generator whose output is fixed by its 256-bit key and 64-bit stream id.
//! A substream is addressed by `(master seed, domain, blocklength)` packed
//! into the key and `(trial index, hypothesis)` packed into the stream id,
//! so the mapping is injective and independent of execution order.
//!
//! Layout (version 1, little-endian):
//!
//! ```text
//! key[0..8]   master seed
//! key[8..16]  domain tag
//! key[16..24] blocklength n (0 when not applicable)
//! key[24..32] layout version
//! stream      (trial_index << 1) | hypothesis bit
//! ```

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::source_models::Hypothesis;

pub const SEED_LAYOUT_VERSION: u64 = 1;

/// The generator used everywhere in the crate.
pub type StreamRng = ChaCha8Rng;

/// What a substream is used for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Domain {
    Trial = 1,
    Codebook = 2,
    Spectral = 3,
}

/// A fully addressed substream: ChaCha8 key plus stream id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SubstreamSeed {
    pub key: [u8; 32],
    pub stream: u64,
}

impl SubstreamSeed {
    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(self.stream);
        rng
    }
}

/// `(master seed, domain, n)` prefix shared by a family of substreams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeedScope {
    pub master: u64,
    pub domain: Domain,
    pub n: u64,
}

impl SeedScope {
    pub fn new(master: u64, domain: Domain, n: usize) -> Self {
        SeedScope {
            master,
            domain,
            n: n as u64,
        }
    }

    fn key(&self) -> [u8; 32] {
        let mut key = [0u8; 32];
        key[0..8].copy_from_slice(&self.master.to_le_bytes());
        key[8..16].copy_from_slice(&(self.domain as u64).to_le_bytes());
        key[16..24].copy_from_slice(&self.n.to_le_bytes());
        key[24..32].copy_from_slice(&SEED_LAYOUT_VERSION.to_le_bytes());
        key
    }

    /// Substream of trial `index` under `hypothesis`. `index` must be below 2^63.
    pub fn trial(&self, hypothesis: Hypothesis, index: u64) -> SubstreamSeed {
        debug_assert!(index < 1 << 63);
        SubstreamSeed {
            key: self.key(),
            stream: (index << 1) | hypothesis.index() as u64,
        }
    }

    /// A single substream for the whole scope (codebooks, one-off draws).
    pub fn single(&self) -> SubstreamSeed {
        self.trial(Hypothesis::H0, 0)
    }
}

/// Substream for a codec trial, independent of blocklength.
pub fn derive_trial_seed(master_seed: u64, hypothesis: Hypothesis, trial_index: u64) -> SubstreamSeed {
    SeedScope::new(master_seed, Domain::Trial, 0).trial(hypothesis, trial_index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use std::collections::HashSet;

    #[test]
    fn distinct_indices_give_distinct_seeds() {
        let a = derive_trial_seed(7, Hypothesis::H0, 0);
        let b = derive_trial_seed(7, Hypothesis::H0, 1);
        let c = derive_trial_seed(7, Hypothesis::H1, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_trial_seed(7, Hypothesis::H0, 0));
    }

    #[test]
    fn million_seeds_are_unique() {
        let mut seen = HashSet::with_capacity(1_000_000);
        for i in 0..500_000u64 {
            for h in Hypothesis::BOTH {
                assert!(seen.insert(derive_trial_seed(42, h, i)));
            }
        }
        assert_eq!(seen.len(), 1_000_000);
    }

    #[test]
    fn streams_are_reproducible_and_differ() {
        let s = SeedScope::new(3, Domain::Spectral, 64);
        let x: Vec<u64> = (0..4).map(|_| s.trial(Hypothesis::H0, 5).rng().random()).collect();
        assert!(x.windows(2).all(|w| w[0] == w[1]));
        let y: u64 = s.trial(Hypothesis::H0, 6).rng().random();
        assert_ne!(x[0], y);
        let z: u64 = SeedScope::new(3, Domain::Spectral, 128).trial(Hypothesis::H0, 5).rng().random();
        assert_ne!(x[0], z);
    }

    #[test]
    fn first_output_is_pinned() {
        // reference value from a standalone ChaCha8 block computation over the documented key layout
        let v: u64 = derive_trial_seed(0, Hypothesis::H0, 0).rng().random();
        assert_eq!(v, 616_607_144_547_620_255);
    }
}
