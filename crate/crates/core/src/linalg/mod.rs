//! Dense helpers and structured solvers shared by the statistical modules.

mod blocktri;
mod lyapunov;

pub use blocktri::{BlockCholesky, BlockTridiag};
pub use lyapunov::{discrete_lyapunov, spectral_radius};

use libm::lgamma as ln_gamma;
use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Largest `T*k` for which a block-band object may be densified.
pub const DENSE_LIMIT: usize = 5000;

/// Lower Cholesky factor, or `CholeskyFailure` naming `what`.
pub fn chol(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    nalgebra::Cholesky::new(m.clone())
        .map(|c| c.l())
        .ok_or_else(|| Error::CholeskyFailure(what.to_string()))
}

/// log|A| for symmetric positive-definite A.
pub fn logdet_spd(m: &DMatrix<f64>) -> Result<f64> {
    let l = chol(m, "log-determinant")?;
    Ok(2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>())
}

/// Inverse of a symmetric positive-definite matrix via Cholesky.
pub fn inv_spd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let c = nalgebra::Cholesky::new(m.clone())
        .ok_or_else(|| Error::CholeskyFailure("inverse".into()))?;
    Ok(symmetrize(&c.inverse()))
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Multivariate log-gamma ln Γ_N(a).
pub fn ln_mvgamma(n: usize, a: f64) -> f64 {
    let nf = n as f64;
    nf * (nf - 1.0) / 4.0 * std::f64::consts::PI.ln()
        + (0..n).map(|j| ln_gamma(a - j as f64 / 2.0)).sum::<f64>()
}

/// Max absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eig(m: &DMatrix<f64>) -> f64 {
    symmetrize(m)
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Draw a matrix of iid standard normals.
pub fn std_normal_matrix<R: rand::Rng + ?Sized>(rng: &mut R, r: usize, c: usize) -> DMatrix<f64> {
    use rand_distr::StandardNormal;
    DMatrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn std_normal_vector<R: rand::Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    use rand_distr::StandardNormal;
    DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Draw from the inverse Wishart IW(S, nu) (mean S/(nu-N-1)) with the Bartlett
/// construction applied to the Wishart(S⁻¹, nu) precision.
pub fn draw_inv_wishart<R: rand::Rng + ?Sized>(
    rng: &mut R,
    s: &DMatrix<f64>,
    nu: f64,
) -> Result<DMatrix<f64>> {
    use rand_distr::{ChiSquared, Distribution, StandardNormal};
    let n = s.nrows();
    if nu <= n as f64 - 1.0 {
        return Err(Error::InvalidParameter(format!("IW dof {nu} <= N-1")));
    }
    let sinv = inv_spd(s)?;
    let lp = chol(&sinv, "IW scale")?;
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let chi =
            ChiSquared::new(nu - i as f64).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        a[(i, i)] = chi.sample(rng).sqrt();
        for j in 0..i {
            a[(i, j)] = rng.sample::<f64, _>(StandardNormal);
        }
    }
    // precision W = (Lp A)(Lp A)'; Σ = W⁻¹
    let la = &lp * a;
    let la_inv = la
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .ok_or_else(|| Error::CholeskyFailure("Bartlett factor".into()))?;
    Ok(symmetrize(&(la_inv.transpose() * la_inv)))
}
