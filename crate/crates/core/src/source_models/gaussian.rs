use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Generator of a stationary (cross-)covariance sequence `c(k)`, `k >= 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovGenerator {
    /// Explicit values for lags `0, 1, ...`; zero beyond the list.
    Values(Vec<f64>),
    /// `scale * phi^k`.
    Ar1 { scale: f64, phi: f64 },
}

impl CovGenerator {
    pub fn at(&self, lag: usize) -> f64 {
        match self {
            CovGenerator::Values(v) => v.get(lag).copied().unwrap_or(0.0),
            CovGenerator::Ar1 { scale, phi } => scale * phi.powi(lag as i32),
        }
    }

    pub fn zero() -> Self {
        CovGenerator::Values(vec![0.0])
    }

    pub fn is_zero(&self) -> bool {
        match self {
            CovGenerator::Values(v) => v.iter().all(|&c| c == 0.0),
            CovGenerator::Ar1 { scale, .. } => *scale == 0.0,
        }
    }

    /// Symmetric Toeplitz matrix `[c(|i - j|)]`.
    pub fn toeplitz(&self, n: usize) -> DMatrix<f64> {
        let c: Vec<f64> = (0..n).map(|k| self.at(k)).collect();
        DMatrix::from_fn(n, n, |i, j| c[i.abs_diff(j)])
    }
}

/// Jointly Gaussian stationary sources. `K_X` and `K_Y` are shared by both
/// hypotheses; only the cross-covariance (and optionally the means) differ.
///
/// The cross-covariance generator gives `Cov(X_t, Y_{t+k})` for `k >= 0`;
/// `ccf_negative` gives `Cov(X_{t+k}, Y_t)` and defaults to the same values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianJointSource {
    pub acf_x: CovGenerator,
    pub acf_y: CovGenerator,
    pub ccf: [CovGenerator; 2],
    #[serde(default)]
    pub ccf_negative: Option<[CovGenerator; 2]>,
    /// `(mean_x, mean_y)` per hypothesis, constant over time.
    #[serde(default)]
    pub means: [(f64, f64); 2],
}

impl GaussianJointSource {
    pub fn new(acf_x: CovGenerator, acf_y: CovGenerator, ccf_h0: CovGenerator, ccf_h1: CovGenerator) -> Self {
        GaussianJointSource {
            acf_x,
            acf_y,
            ccf: [ccf_h0, ccf_h1],
            ccf_negative: None,
            means: [(0.0, 0.0); 2],
        }
    }

    /// `K_X`, `K_Y` for block length `n`.
    pub fn auto_covariances(&self, n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
        (self.acf_x.toeplitz(n), self.acf_y.toeplitz(n))
    }

    /// `K_XY` under hypothesis index `h` (0 or 1).
    pub fn cross_covariance(&self, h: usize, n: usize) -> DMatrix<f64> {
        let pos = &self.ccf[h];
        let neg = self.ccf_negative.as_ref().map_or(pos, |c| &c[h]);
        DMatrix::from_fn(n, n, |i, j| if j >= i { pos.at(j - i) } else { neg.at(i - j) })
    }

    /// `mu_bar - mu` for the stacked `(U, Y)` vector (U inherits the X mean).
    pub fn mean_difference(&self, n: usize) -> DVector<f64> {
        let dx = self.means[1].0 - self.means[0].0;
        let dy = self.means[1].1 - self.means[0].1;
        DVector::from_fn(2 * n, |i, _| if i < n { dx } else { dy })
    }

    /// Nonzero mean differences contradict hypothesis-independent marginals.
    pub fn has_mean_difference(&self) -> bool {
        self.means[0] != self.means[1]
    }

    /// Checks `K_X`, `K_Y` and both joint covariances are positive-definite at `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::param("block length must be positive"));
        }
        let (kx, ky) = self.auto_covariances(n);
        if Cholesky::new(kx.clone()).is_none() {
            return Err(Error::NonSpd("K_X"));
        }
        if Cholesky::new(ky.clone()).is_none() {
            return Err(Error::NonSpd("K_Y"));
        }
        for h in 0..2 {
            let kxy = self.cross_covariance(h, n);
            let mut k = DMatrix::zeros(2 * n, 2 * n);
            k.view_mut((0, 0), (n, n)).copy_from(&kx);
            k.view_mut((n, n), (n, n)).copy_from(&ky);
            k.view_mut((0, n), (n, n)).copy_from(&kxy);
            k.view_mut((n, 0), (n, n)).copy_from(&kxy.transpose());
            if Cholesky::new(k).is_none() {
                return Err(Error::NonSpd(if h == 0 { "K (H0)" } else { "K (H1)" }));
            }
        }
        Ok(())
    }
}
