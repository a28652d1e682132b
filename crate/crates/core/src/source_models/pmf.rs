use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sum-to-one tolerance accepted from user input; accepted pmfs are then
/// renormalized so the stored value sums to 1 to machine precision.
pub const PMF_SUM_TOLERANCE: f64 = 1e-9;

/// Per-step joint pmf of `(X, Y)`, row-major over `x * ny + y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointPmf {
    nx: usize,
    ny: usize,
    probs: Vec<f64>,
}

pub(crate) fn check_distribution(what: &str, probs: &[f64]) -> Result<f64> {
    if probs.is_empty() {
        return Err(Error::InvalidPmf {
            what: what.into(),
            detail: "empty".into(),
        });
    }
    for (i, &p) in probs.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::InvalidPmf {
                what: what.into(),
                detail: format!("entry {i} is {p}"),
            });
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PMF_SUM_TOLERANCE {
        return Err(Error::InvalidPmf {
            what: what.into(),
            detail: format!("sums to {sum}"),
        });
    }
    Ok(sum)
}

pub(crate) fn normalized(what: &str, probs: Vec<f64>) -> Result<Vec<f64>> {
    let sum = check_distribution(what, &probs)?;
    Ok(probs.into_iter().map(|p| p / sum).collect())
}

impl JointPmf {
    pub fn new(nx: usize, ny: usize, probs: Vec<f64>) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::param("alphabets must be non-empty"));
        }
        if probs.len() != nx * ny {
            return Err(Error::LengthMismatch {
                expected: nx * ny,
                found: probs.len(),
            });
        }
        let probs = normalized("joint pmf", probs)?;
        Ok(JointPmf { nx, ny, probs })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nx = rows.len();
        let ny = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ny) {
            return Err(Error::param("ragged pmf rows"));
        }
        JointPmf::new(nx, ny, rows.concat())
    }

    /// Doubly symmetric binary source: uniform X, Y = X xor Bernoulli(p).
    pub fn dsbs(p: f64) -> Result<Self> {
        JointPmf::new(2, 2, vec![0.5 * (1.0 - p), 0.5 * p, 0.5 * p, 0.5 * (1.0 - p)])
    }

    /// `P_X(x) P_Y(y)` built from this pmf's marginals.
    pub fn independent_coupling(&self) -> Self {
        let px = self.marginal_x();
        let py = self.marginal_y();
        let probs = px
            .iter()
            .flat_map(|&a| py.iter().map(move |&b| a * b))
            .collect();
        JointPmf {
            nx: self.nx,
            ny: self.ny,
            probs,
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.probs[x * self.ny + y]
    }

    pub fn marginal_x(&self) -> Vec<f64> {
        self.probs.chunks(self.ny).map(|r| r.iter().sum()).collect()
    }

    pub fn marginal_y(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.ny];
        for row in self.probs.chunks(self.ny) {
            for (acc, p) in m.iter_mut().zip(row) {
                *acc += p;
            }
        }
        m
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.probs.chunks(self.ny).map(<[f64]>::to_vec).collect()
    }
}
