//! Dense linear-algebra kernels for jointly Gaussian stationary sources
//! observed through the additive test channel `U = X + Z`, `Z ~ N(0, kappa I)`.
//!
//! Per-symbol terms are evaluated at finite `n` and collected into
//! [`LimitTrace`]s; the limit itself is never assumed.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};
use crate::source_models::{GaussianJointSource, Hypothesis};

pub const DEFAULT_LIMIT_TOLERANCE: f64 = 1e-3;

/// Covariance blocks of `(X^n, Y^n)` under one hypothesis.
#[derive(Clone, Debug, PartialEq)]
pub struct JointCov {
    pub n: usize,
    pub kx: DMatrix<f64>,
    pub ky: DMatrix<f64>,
    /// `Cov(X^n, Y^n)`; the lower-left block of `K` is its transpose.
    pub kxy: DMatrix<f64>,
}

impl JointCov {
    pub fn new(kx: DMatrix<f64>, ky: DMatrix<f64>, kxy: DMatrix<f64>) -> Result<Self> {
        let n = kx.nrows();
        for (m, what) in [(&kx, "K_X"), (&ky, "K_Y"), (&kxy, "K_XY")] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::param(format!("{what} must be {n}x{n}")));
            }
        }
        if n == 0 {
            return Err(Error::param("empty covariance"));
        }
        Ok(JointCov { n, kx, ky, kxy })
    }

    /// Blocks generated by the source's Toeplitz generators.
    pub fn from_source(src: &GaussianJointSource, h: Hypothesis, n: usize) -> Self {
        let (kx, ky) = src.auto_covariances(n);
        JointCov {
            n,
            kx,
            ky,
            kxy: src.cross_covariance(h.index(), n),
        }
    }

    /// The `2n x 2n` matrix `[[K_X, K_XY], [K_YX, K_Y]]`.
    pub fn assemble(&self) -> DMatrix<f64> {
        block2(&self.kx, &self.kxy, &self.ky)
    }
}

fn block2(a: &DMatrix<f64>, b: &DMatrix<f64>, d: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut k = DMatrix::zeros(2 * n, 2 * n);
    k.view_mut((0, 0), (n, n)).copy_from(a);
    k.view_mut((0, n), (n, n)).copy_from(b);
    k.view_mut((n, 0), (n, n)).copy_from(&b.transpose());
    k.view_mut((n, n), (n, n)).copy_from(d);
    k
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

fn ascending_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `K_{X|Y}` and its eigenvalues in ascending order.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalCov {
    pub matrix: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
}

/// `K_X - K_XY K_Y^{-1} K_YX`, symmetrized, with every eigenvalue checked positive.
pub fn conditional_cov(jc: &JointCov) -> Result<ConditionalCov> {
    let chol = Cholesky::new(jc.ky.clone()).ok_or(Error::SingularKy)?;
    let z = chol.solve(&jc.kxy.transpose());
    let mut m = &jc.kx - &jc.kxy * z;
    symmetrize(&mut m);
    let eigenvalues = ascending_eigenvalues(&m);
    let min = eigenvalues[0];
    if !(min > 0.0) {
        return Err(Error::NonPositiveResult { min_eigenvalue: min });
    }
    Ok(ConditionalCov { matrix: m, eigenvalues })
}

/// `(1 / 2n) sum_i ln((lambda_i + kappa) / kappa)` over the eigenvalues of
/// the `n x n` SPD matrix `k_cond`.
pub fn entropy_rate_diff_term(k_cond: &DMatrix<f64>, kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    let mut m = k_cond.clone();
    symmetrize(&mut m);
    let ev = ascending_eigenvalues(&m);
    if ev.is_empty() || !(ev[0] > 0.0) {
        return Err(Error::NonSpd("K_{X|Y}"));
    }
    Ok(entropy_term_from_eigenvalues(&ev, kappa))
}

pub fn entropy_term_from_eigenvalues(eigenvalues: &[f64], kappa: f64) -> f64 {
    let s: f64 = eigenvalues.iter().map(|&l| (l / kappa).ln_1p()).sum();
    s / (2.0 * eigenvalues.len() as f64)
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa.is_finite() && kappa > 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!("kappa must be finite and > 0, got {kappa}")))
    }
}

/// Covariances of `(U^n, Y^n)` under H0 (`sigma`) and H1 (`sigma_bar`).
#[derive(Clone, Debug, PartialEq)]
pub struct UYCov {
    pub n: usize,
    pub sigma: DMatrix<f64>,
    pub sigma_bar: DMatrix<f64>,
}

impl UYCov {
    pub fn new(sigma: DMatrix<f64>, sigma_bar: DMatrix<f64>) -> Result<Self> {
        let d = sigma.nrows();
        if d == 0 || d % 2 != 0 || !sigma.is_square() || sigma_bar.shape() != sigma.shape() {
            return Err(Error::param("Sigma and SigmaBar must be equal-sized 2n x 2n matrices"));
        }
        Ok(UYCov {
            n: d / 2,
            sigma,
            sigma_bar,
        })
    }

    /// `K_U = K_X + kappa I`, `K_UY = K_XY` per hypothesis.
    pub fn from_source(src: &GaussianJointSource, kappa: f64, n: usize) -> Result<Self> {
        check_kappa(kappa)?;
        let (kx, ky) = src.auto_covariances(n);
        let ku = kx + DMatrix::identity(n, n) * kappa;
        Ok(UYCov {
            n,
            sigma: block2(&ku, &src.cross_covariance(0, n), &ky),
            sigma_bar: block2(&ku, &src.cross_covariance(1, n), &ky),
        })
    }
}

fn log_det(chol: &Cholesky<f64, Dyn>) -> f64 {
    2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>()
}

/// Per-symbol Gaussian KL divergence
/// `(1 / 2n)[ln|SigmaBar| - ln|Sigma| - 2n + mu' SigmaBar^{-1} mu + tr(SigmaBar^{-1} Sigma)]`.
pub fn gauss_divergence_term(uy: &UYCov, mu_diff: &DVector<f64>) -> Result<f64> {
    let d = uy.sigma.nrows();
    if mu_diff.len() != d {
        return Err(Error::LengthMismatch {
            expected: d,
            found: mu_diff.len(),
        });
    }
    let bar = Cholesky::new(uy.sigma_bar.clone()).ok_or(Error::SingularSigmaBar)?;
    let sig = Cholesky::new(uy.sigma.clone()).ok_or(Error::NonSpd("Sigma"))?;
    let lb = bar.l();
    // tr(Lb^-T Lb^-1 L L^T) = ||Lb^-1 L||_F^2
    let a = lb
        .solve_lower_triangular(&sig.l())
        .ok_or(Error::SingularSigmaBar)?;
    let v = lb.solve_lower_triangular(mu_diff).ok_or(Error::SingularSigmaBar)?;
    let trace = a.norm_squared();
    let quad = v.norm_squared();
    Ok((log_det(&bar) - log_det(&sig) - d as f64 + quad + trace) / d as f64)
}

/// Entropy term of the source at blocklength `n` (H0 cross-covariance).
pub fn entropy_term_at(src: &GaussianJointSource, kappa: f64, n: usize) -> Result<f64> {
    let cc = conditional_cov(&JointCov::from_source(src, Hypothesis::H0, n))?;
    check_kappa(kappa)?;
    Ok(entropy_term_from_eigenvalues(&cc.eigenvalues, kappa))
}

/// Divergence term of the source at blocklength `n`, including any mean shift.
pub fn divergence_term_at(src: &GaussianJointSource, kappa: f64, n: usize) -> Result<f64> {
    gauss_divergence_term(&UYCov::from_source(src, kappa, n)?, &src.mean_difference(n))
}

/// A per-symbol term evaluated along increasing blocklengths.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct LimitTrace {
    pub n_list: Vec<usize>,
    pub values: Vec<f64>,
    /// `|v_last - v_prev|`; `None` with a single blocklength.
    pub final_gap: Option<f64>,
    pub converged: bool,
}

impl LimitTrace {
    pub fn last(&self) -> f64 {
        *self.values.last().expect("non-empty trace")
    }
}

pub(crate) fn check_increasing(n_list: &[usize]) -> Result<()> {
    if n_list.is_empty() || n_list[0] == 0 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("n_list must be non-empty, positive and strictly increasing"));
    }
    Ok(())
}

/// Evaluates `term(n)` over `n_list`; converged iff the last two values
/// differ by less than `tol`.
pub fn limit_sequence<F>(term: F, n_list: &[usize], tol: f64) -> Result<LimitTrace>
where
    F: Fn(usize) -> Result<f64>,
{
    check_increasing(n_list)?;
    let values = n_list.iter().map(|&n| term(n)).collect::<Result<Vec<_>>>()?;
    let final_gap = (values.len() >= 2).then(|| (values[values.len() - 1] - values[values.len() - 2]).abs());
    Ok(LimitTrace {
        n_list: n_list.to_vec(),
        values,
        final_gap,
        converged: final_gap.is_some_and(|g| g < tol),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source_models::CovGenerator;
    use approx::assert_abs_diff_eq;

    fn scalar(rho: f64) -> JointCov {
        let m = |v| DMatrix::from_element(1, 1, v);
        JointCov::new(m(1.0), m(1.0), m(rho)).unwrap()
    }

    fn ar1(cross: f64) -> GaussianJointSource {
        GaussianJointSource::new(
            CovGenerator::Ar1 { scale: 1.0, phi: 0.8 },
            CovGenerator::Ar1 { scale: 1.0, phi: 0.8 },
            CovGenerator::Ar1 { scale: cross, phi: 0.8 },
            CovGenerator::zero(),
        )
    }

    #[test]
    fn scalar_conditional_variance() {
        let cc = conditional_cov(&scalar(0.9)).unwrap();
        assert_abs_diff_eq!(cc.matrix[(0, 0)], 0.19, epsilon = 1e-15);
        let indep = JointCov::from_source(&ar1(0.0), Hypothesis::H0, 5);
        assert_eq!(conditional_cov(&indep).unwrap().matrix, indep.kx);
    }

    #[test]
    fn schur_complement_matches_dense_inverse() {
        let jc = JointCov::from_source(&ar1(0.5), Hypothesis::H0, 8);
        let cc = conditional_cov(&jc).unwrap();
        // oracle: top-left block of K^{-1} is K_{X|Y}^{-1}
        let kinv = jc.assemble().try_inverse().unwrap();
        let oracle = kinv.view((0, 0), (8, 8)).into_owned().try_inverse().unwrap();
        assert!((&cc.matrix - oracle).amax() < 1e-10);
        let lmax = ascending_eigenvalues(&jc.kx)[7];
        assert!(cc.eigenvalues.iter().all(|&l| l > 0.0 && l <= lmax + 1e-12));
    }

    #[test]
    fn singular_ky_is_reported() {
        let jc = JointCov::new(DMatrix::identity(2, 2), DMatrix::from_element(2, 2, 1.0), DMatrix::zeros(2, 2)).unwrap();
        assert!(matches!(conditional_cov(&jc), Err(Error::SingularKy)));
        let perfect = scalar(1.0);
        assert!(matches!(conditional_cov(&perfect), Err(Error::NonPositiveResult { .. })));
    }

    #[test]
    fn entropy_term_scalar_and_limits() {
        let m = DMatrix::from_element(1, 1, 0.19);
        assert_abs_diff_eq!(entropy_rate_diff_term(&m, 0.1).unwrap(), 0.5 * 2.9f64.ln(), epsilon = 1e-12);
        assert!(entropy_rate_diff_term(&m, 1e9).unwrap() < 1e-6);
        for n in [1, 4, 9] {
            let c = DMatrix::identity(n, n) * 0.7;
            assert_abs_diff_eq!(entropy_rate_diff_term(&c, 0.3).unwrap(), 0.5 * (1.0f64 / 0.3).ln(), epsilon = 1e-12);
        }
        assert!(entropy_rate_diff_term(&m, 0.0).is_err());
        assert!(matches!(entropy_rate_diff_term(&(-m), 0.1), Err(Error::NonSpd(_))));
    }

    #[test]
    fn entropy_term_matches_log_det_route() {
        // (1/2n) ln |K_{X|Y} + kI| / |kI|
        let jc = JointCov::from_source(&ar1(0.5), Hypothesis::H0, 16);
        let cc = conditional_cov(&jc).unwrap();
        let kappa = 0.4;
        let shifted = &cc.matrix + DMatrix::identity(16, 16) * kappa;
        let oracle = (shifted.determinant().ln() - 16.0 * kappa.ln()) / 32.0;
        assert_abs_diff_eq!(entropy_rate_diff_term(&cc.matrix, kappa).unwrap(), oracle, epsilon = 1e-10);
    }

    #[test]
    fn entropy_term_decreases_in_kappa() {
        let cc = conditional_cov(&JointCov::from_source(&ar1(0.5), Hypothesis::H0, 32)).unwrap();
        let vals: Vec<f64> = [0.01, 0.1, 0.5, 1.0, 5.0]
            .iter()
            .map(|&k| entropy_rate_diff_term(&cc.matrix, k).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
    }

    fn kl_2x2(s: [[f64; 2]; 2], sb: [[f64; 2]; 2]) -> f64 {
        let det = |m: [[f64; 2]; 2]| m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let db = det(sb);
        let inv = [[sb[1][1] / db, -sb[0][1] / db], [-sb[1][0] / db, sb[0][0] / db]];
        let tr = inv[0][0] * s[0][0] + inv[0][1] * s[1][0] + inv[1][0] * s[0][1] + inv[1][1] * s[1][1];
        0.5 * ((db / det(s)).ln() - 2.0 + tr)
    }

    #[test]
    fn divergence_matches_two_by_two_closed_form() {
        let src = GaussianJointSource::new(
            CovGenerator::Values(vec![1.0]),
            CovGenerator::Values(vec![1.0]),
            CovGenerator::Values(vec![0.9]),
            CovGenerator::zero(),
        );
        let uy = UYCov::from_source(&src, 0.1, 1).unwrap();
        let got = gauss_divergence_term(&uy, &DVector::zeros(2)).unwrap();
        let oracle = kl_2x2([[1.1, 0.9], [0.9, 1.0]], [[1.1, 0.0], [0.0, 1.0]]);
        assert_abs_diff_eq!(got, oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(got, 0.5 * (1.1f64 / 0.29).ln(), epsilon = 1e-12);
    }

    #[test]
    fn divergence_identities() {
        let uy = UYCov::from_source(&ar1(0.5), 0.5, 6).unwrap();
        let same = UYCov::new(uy.sigma.clone(), uy.sigma.clone()).unwrap();
        assert!(gauss_divergence_term(&same, &DVector::zeros(12)).unwrap().abs() < 1e-12);
        let base = gauss_divergence_term(&uy, &DVector::zeros(12)).unwrap();
        let scaled = UYCov::new(&uy.sigma * 3.7, &uy.sigma_bar * 3.7).unwrap();
        assert_abs_diff_eq!(gauss_divergence_term(&scaled, &DVector::zeros(12)).unwrap(), base, epsilon = 1e-10);
        let shifted = gauss_divergence_term(&uy, &DVector::from_element(12, 0.3)).unwrap();
        assert!(shifted > base);
    }

    #[test]
    fn divergence_with_mean_shift_matches_dense_formula() {
        let uy = UYCov::from_source(&ar1(0.4), 0.2, 3).unwrap();
        let mu = DVector::from_vec(vec![0.1, -0.2, 0.3, 0.0, 0.5, -0.1]);
        let inv = uy.sigma_bar.clone().try_inverse().unwrap();
        let oracle = (uy.sigma_bar.determinant().ln() - uy.sigma.determinant().ln() - 6.0
            + (mu.transpose() * &inv * &mu)[(0, 0)]
            + (&inv * &uy.sigma).trace())
            / 6.0;
        assert_abs_diff_eq!(gauss_divergence_term(&uy, &mu).unwrap(), oracle, epsilon = 1e-10);
    }

    #[test]
    fn singular_sigma_bar_is_reported() {
        let s = DMatrix::identity(2, 2);
        let uy = UYCov::new(s, DMatrix::from_element(2, 2, 1.0)).unwrap();
        assert!(matches!(gauss_divergence_term(&uy, &DVector::zeros(2)), Err(Error::SingularSigmaBar)));
    }

    #[test]
    fn iid_blocks_give_constant_trace() {
        let src = GaussianJointSource::new(
            CovGenerator::Values(vec![1.0]),
            CovGenerator::Values(vec![1.0]),
            CovGenerator::Values(vec![0.9]),
            CovGenerator::zero(),
        );
        let t = limit_sequence(|n| entropy_term_at(&src, 0.1, n), &[1, 2, 4], DEFAULT_LIMIT_TOLERANCE).unwrap();
        assert!(t.converged);
        assert!(t.values.iter().all(|v| (v - 0.5 * 2.9f64.ln()).abs() < 1e-12));
        let eq = ar1(0.0);
        let d = limit_sequence(|n| divergence_term_at(&eq, 0.5, n), &[4, 8, 16], 1e-3).unwrap();
        assert!(d.values.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn ar1_entropy_trace_settles() {
        let src = ar1(0.5);
        let t = limit_sequence(|n| entropy_term_at(&src, 0.5, n), &[64, 128, 256, 512], 1e-3).unwrap();
        let gaps: Vec<f64> = t.values.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(gaps.iter().all(|g| g.signum() == gaps[0].signum()), "{:?}", t.values);
        assert!(gaps.windows(2).all(|w| w[1].abs() < w[0].abs()));
        assert!(t.converged);
    }

    #[test]
    fn bad_n_list_is_rejected() {
        assert!(limit_sequence(|_| Ok(0.0), &[4, 4], 1e-3).is_err());
        assert!(limit_sequence(|_| Ok(0.0), &[], 1e-3).is_err());
        let single = limit_sequence(|_| Ok(1.0), &[8], 1e-3).unwrap();
        assert!(!single.converged && single.final_gap.is_none());
    }
}
