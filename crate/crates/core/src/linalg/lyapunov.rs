use nalgebra::DMatrix;

use crate::{Error, Result};

/// Spectral radius from the complex eigenvalues.
pub fn spectral_radius(t: &DMatrix<f64>) -> f64 {
    if t.nrows() == 0 {
        return 0.0;
    }
    t.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Solve `X = A X A' + Q` by doubling.
///
/// Errors with `NonStationary` when the spectral radius of `A` is not below
/// `1 - 1e-8`.
pub fn discrete_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let rho = spectral_radius(a);
    if rho >= 1.0 - 1e-8 {
        return Err(Error::NonStationary(rho));
    }
    let mut ak = a.clone();
    let mut x = q.clone();
    for _ in 0..200 {
        let next = &x + &ak * &x * ak.transpose();
        ak = &ak * &ak;
        let diff = super::max_abs(&(&next - &x));
        x = next;
        if diff <= 1e-15 * super::max_abs(&x).max(1e-300) {
            break;
        }
    }
    Ok(super::symmetrize(&x))
}
