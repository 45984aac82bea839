use nalgebra::{DMatrix, DVector};

use super::{ReSolution, StateSpaceSolution};
use crate::linalg::{discrete_lyapunov, min_eig, symmetrize};
use crate::{Error, Result};

/// Non-central population moments of `(x_t, y_t)` for each sample period.
#[derive(Clone, Debug)]
pub struct TheoryMoments {
    pub gxx: Vec<DMatrix<f64>>,
    pub gxy: Vec<DMatrix<f64>>,
    pub gyy: Vec<DMatrix<f64>>,
    pub mean_y: Vec<DVector<f64>>,
}

impl TheoryMoments {
    pub fn len(&self) -> usize {
        self.gxx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gxx.is_empty()
    }

    /// Γxy stacked as a `(T k) x N` matrix.
    pub fn stacked_gxy(&self) -> DMatrix<f64> {
        let k = self.gxy[0].nrows();
        let n = self.gxy[0].ncols();
        let mut out = DMatrix::zeros(self.len() * k, n);
        for (t, b) in self.gxy.iter().enumerate() {
            out.rows_mut(t * k, k).copy_from(b);
        }
        out
    }

    pub fn sum_gyy(&self) -> DMatrix<f64> {
        self.gyy.iter().fold(
            DMatrix::zeros(self.gyy[0].nrows(), self.gyy[0].ncols()),
            |a, b| a + b,
        )
    }

    /// Per-period restriction function `Γxx,t⁻¹ Γxy,t`, stacked.
    pub fn restriction_path(&self) -> Result<DMatrix<f64>> {
        let k = self.gxy[0].nrows();
        let mut out = DMatrix::zeros(self.len() * k, self.gxy[0].ncols());
        for t in 0..self.len() {
            let c = nalgebra::Cholesky::new(self.gxx[t].clone()).ok_or(Error::SingularGamma(t))?;
            out.rows_mut(t * k, k).copy_from(&c.solve(&self.gxy[t]));
        }
        Ok(out)
    }
}

/// Stationary covariance and mean of the baseline state process.
pub fn stationary_moments(
    law: &ReSolution,
    omega: &DVector<f64>,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let q = &law.r * DMatrix::from_diagonal(omega) * law.r.transpose();
    let sigma = discrete_lyapunov(&law.t, &q)?;
    let n = law.t.nrows();
    let i_t = DMatrix::identity(n, n) - &law.t;
    let mean = i_t.lu().solve(&law.c).ok_or(Error::NonStationary(1.0))?;
    Ok((sigma, mean))
}

/// Population moments of `x_t = [1, y_{t-1}', …, y_{t-p}']'` and `y_t` for
/// periods `0..t_len` of `sol`.
///
/// The state recursion starts from the stationary baseline distribution;
/// periods before the sample use the baseline law.
pub fn theory_moments(sol: &StateSpaceSolution, p: usize, t_len: usize) -> Result<TheoryMoments> {
    let n = sol.n_obs();
    let k = 1 + n * p;
    let (sig0, m0) = stationary_moments(&sol.baseline, &sol.omega)?;
    let omega = DMatrix::from_diagonal(&sol.omega);

    // covs[h] = Cov(s_j, s_{j-h}) for the current j, h = 0..=p; means keep the last p+1
    let mut covs: Vec<DMatrix<f64>> = Vec::with_capacity(p + 1);
    let mut c = sig0;
    for _ in 0..=p {
        covs.push(c.clone());
        c = &sol.baseline.t * c;
    }
    // window over periods j-p..=j; position i holds period j - (p - i)
    let mut hist_cov: Vec<Vec<DMatrix<f64>>> = vec![covs; p + 1];
    let mut hist_mean: Vec<DVector<f64>> = vec![m0; p + 1];
    let mut hist_meas: Vec<DVector<f64>> = vec![sol.baseline_meas_var.clone(); p + 1];

    let mut out = TheoryMoments {
        gxx: Vec::with_capacity(t_len),
        gxy: Vec::with_capacity(t_len),
        gyy: Vec::with_capacity(t_len),
        mean_y: Vec::with_capacity(t_len),
    };
    let ey = |m: &DVector<f64>| &sol.d + &sol.b * m;

    for j in 0..t_len {
        let law = sol.at(j as isize);
        let prev = hist_cov.last().unwrap();
        let mut cur = Vec::with_capacity(p + 1);
        let c0 = &law.t * &prev[0] * law.t.transpose() + &law.r * &omega * law.r.transpose();
        cur.push(symmetrize(&c0));
        for h in 1..=p {
            cur.push(&law.t * &prev[h - 1]);
        }
        let m = &law.c + &law.t * hist_mean.last().unwrap();
        hist_cov.remove(0);
        hist_cov.push(cur);
        hist_mean.remove(0);
        hist_mean.push(m);
        hist_meas.remove(0);
        hist_meas.push(sol.meas_at(j as isize).clone());
        let means = &hist_mean;
        // index a = 0..=p refers to period j - a: hist position p - a
        let cov_y = |a: usize, b: usize| -> DMatrix<f64> {
            // E[y_{j-a} y_{j-b}']
            let (ia, ib) = (p - a, p - b);
            let ca = if a <= b {
                &sol.b * &hist_cov[ia][b - a] * sol.b.transpose()
            } else {
                (&sol.b * &hist_cov[ib][a - b] * sol.b.transpose()).transpose()
            };
            let mut v = ca + ey(&means[ia]) * ey(&means[ib]).transpose();
            if a == b {
                for i in 0..n {
                    v[(i, i)] += hist_meas[ia][i];
                }
            }
            v
        };

        let mut gxx = DMatrix::zeros(k, k);
        gxx[(0, 0)] = 1.0;
        for a in 1..=p {
            let mu = ey(&means[p - a]);
            gxx.view_mut((0, 1 + (a - 1) * n), (1, n))
                .copy_from(&mu.transpose());
            gxx.view_mut((1 + (a - 1) * n, 0), (n, 1)).copy_from(&mu);
            for b in 1..=p {
                gxx.view_mut((1 + (a - 1) * n, 1 + (b - 1) * n), (n, n))
                    .copy_from(&cov_y(a, b));
            }
        }
        let mut gxy = DMatrix::zeros(k, n);
        let my = ey(&means[p]);
        gxy.view_mut((0, 0), (1, n)).copy_from(&my.transpose());
        for a in 1..=p {
            gxy.view_mut((1 + (a - 1) * n, 0), (n, n))
                .copy_from(&cov_y(a, 0));
        }
        let gyy = symmetrize(&cov_y(0, 0));
        let gxx = check_pd(symmetrize(&gxx), j)?;
        out.gxx.push(gxx);
        out.gxy.push(gxy);
        out.gyy.push(gyy);
        out.mean_y.push(my);
    }
    Ok(out)
}

/// Positive-definiteness guard with a single diagonal jitter.
fn check_pd(g: DMatrix<f64>, t: usize) -> Result<DMatrix<f64>> {
    let k = g.nrows();
    let tol = 1e-10 * g.trace() / k as f64;
    if min_eig(&g) >= tol {
        return Ok(g);
    }
    let jittered = &g + DMatrix::identity(k, k) * 1e-8;
    if min_eig(&jittered) >= tol {
        log::warn!("Γxx at period {t} jittered to restore positive definiteness");
        return Ok(jittered);
    }
    Err(Error::SingularGamma(t))
}
