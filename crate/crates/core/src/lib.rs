//! Achievable Type-II error exponents for distributed hypothesis testing
//! under general (non-i.i.d., non-stationary, non-ergodic) sources, plus a
//! finite-blocklength simulator of the quantize-and-binning scheme that
//! achieves them.
//!
//! All information quantities are in nats (per symbol unless stated).

pub mod codec_sim;
pub mod error;
pub mod exponent_calc;
pub mod gaussian_tools;
pub mod info_spectrum;
pub mod model_file;
pub mod montecarlo;
pub mod seed;
pub mod source_models;

pub use error::{Error, Result};
