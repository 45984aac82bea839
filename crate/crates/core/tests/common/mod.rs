//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use tctvp::posterior::StaticDesign;
use tctvp::theory::{ReSystem, TheoryMoments};

pub fn normal_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.sample(StandardNormal))
}

pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, ridge: f64) -> DMatrix<f64> {
    let a = normal_matrix(rng, n, n);
    &a * a.transpose() + DMatrix::identity(n, n) * ridge
}

pub fn lower(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.clone().cholesky().expect("spd").l()
}

pub fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let scale = 1.0 + b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (a - b).iter().fold(0.0f64, |m, v| m.max(v.abs())) / scale
}

/// Random moments with a positive definite joint `[[Γxx, Γxy], [Γyx, Γyy]]`.
pub fn random_moments(rng: &mut ChaCha8Rng, t: usize, k: usize, n: usize) -> TheoryMoments {
    let mut m = TheoryMoments {
        gxx: vec![],
        gxy: vec![],
        gyy: vec![],
        mean_y: vec![],
    };
    for _ in 0..t {
        let g = random_spd(rng, k + n, 0.5) / (k + n) as f64;
        m.gxx.push(g.view((0, 0), (k, k)).into_owned());
        m.gxy.push(g.view((0, k), (k, n)).into_owned());
        m.gyy.push(g.view((k, k), (n, n)).into_owned());
        m.mean_y.push(DVector::zeros(n));
    }
    m
}

/// Pseudo observations per period: the columns of a factor of
/// `γ [[Γxx, Γxy], [Γyx, Γyy]]`, split into regressor and response parts.
pub fn pseudo_rows(m: &TheoryMoments, gamma: f64) -> Vec<Vec<(DVector<f64>, DVector<f64>)>> {
    let k = m.gxx[0].nrows();
    let n = m.gyy[0].nrows();
    (0..m.gxx.len())
        .map(|t| {
            if gamma == 0.0 {
                return vec![];
            }
            let mut g = DMatrix::zeros(k + n, k + n);
            g.view_mut((0, 0), (k, k)).copy_from(&m.gxx[t]);
            g.view_mut((0, k), (k, n)).copy_from(&m.gxy[t]);
            g.view_mut((k, 0), (n, k)).copy_from(&m.gxy[t].transpose());
            g.view_mut((k, k), (n, n)).copy_from(&m.gyy[t]);
            let l = lower(&(g * gamma));
            (0..k + n)
                .map(|j| {
                    (
                        l.view((0, j), (k, 1)).into_owned().column(0).into_owned(),
                        l.view((k, j), (n, 1)).column(0).into_owned(),
                    )
                })
                .collect()
        })
        .collect()
}

/// Matrix-variate Kalman filter and RTS smoother for
/// `y_t' = x_t' Φ_t + u_t'`, `Φ_t = Φ_{t−1} + η_t`, with every covariance
/// scaled by Σ on the right. Returns smoothed means, smoothed row
/// covariances and `S + Σ v v' / f` over all processed rows.
pub struct KfOut {
    pub mean: Vec<DMatrix<f64>>,
    pub cov: Vec<DMatrix<f64>>,
    pub s: DMatrix<f64>,
    pub rows: usize,
}

pub fn kalman_smoother(
    design: &StaticDesign,
    pseudo: &[Vec<(DVector<f64>, DVector<f64>)>],
    phi0: &DMatrix<f64>,
    first_cov: &DMatrix<f64>,
    step_cov: &DMatrix<f64>,
    s0: &DMatrix<f64>,
) -> KfOut {
    let t_len = design.periods();
    let mut s = s0.clone();
    let mut rows = 0;
    let mut pred_m = Vec::with_capacity(t_len);
    let mut pred_p = Vec::with_capacity(t_len);
    let mut filt_m: Vec<DMatrix<f64>> = Vec::with_capacity(t_len);
    let mut filt_p: Vec<DMatrix<f64>> = Vec::with_capacity(t_len);
    for t in 0..t_len {
        let (mut m, mut p) = if t == 0 {
            (phi0.clone(), first_cov.clone())
        } else {
            (filt_m[t - 1].clone(), &filt_p[t - 1] + step_cov)
        };
        pred_m.push(m.clone());
        pred_p.push(p.clone());
        let mut obs: Vec<(DVector<f64>, DVector<f64>)> = pseudo[t].clone();
        if design.observed[t] {
            obs.push((design.x.row(t).transpose(), design.y.row(t).transpose()));
        }
        for (x, y) in obs {
            let px = &p * &x;
            let f = 1.0 + x.dot(&px);
            let v = y - m.transpose() * &x;
            s += &v * v.transpose() / f;
            m += &px * v.transpose() / f;
            p -= &px * px.transpose() / f;
            rows += 1;
        }
        filt_m.push(m);
        filt_p.push(p);
    }
    let mut mean = filt_m.clone();
    let mut cov = filt_p.clone();
    for t in (0..t_len.saturating_sub(1)).rev() {
        let g = &filt_p[t] * pred_p[t + 1].clone().try_inverse().unwrap();
        mean[t] = &filt_m[t] + &g * (&mean[t + 1] - &pred_m[t + 1]);
        cov[t] = &filt_p[t] + &g * (&cov[t + 1] - &pred_p[t + 1]) * g.transpose();
    }
    KfOut { mean, cov, s, rows }
}

/// Dense NIW state for the sequential predictive oracle.
#[derive(Clone)]
pub struct DenseNiw {
    pub m: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub s: DMatrix<f64>,
    pub nu: f64,
}

impl DenseNiw {
    /// Random-walk prior built from the dense first-difference operator.
    pub fn random_walk(
        phi0: &DMatrix<f64>,
        first_prec: &DMatrix<f64>,
        step_prec: &DMatrix<f64>,
        s: &DMatrix<f64>,
        nu: f64,
        t: usize,
    ) -> Self {
        let k = phi0.nrows();
        let mut h = DMatrix::<f64>::identity(t * k, t * k);
        let mut w = DMatrix::zeros(t * k, t * k);
        for b in 0..t {
            if b > 0 {
                h.view_mut((b * k, (b - 1) * k), (k, k))
                    .fill_with_identity();
                h.view_mut((b * k, (b - 1) * k), (k, k)).neg_mut();
            }
            w.view_mut((b * k, b * k), (k, k)).copy_from(if b == 0 {
                first_prec
            } else {
                step_prec
            });
        }
        let mut m = DMatrix::zeros(t * k, phi0.ncols());
        for b in 0..t {
            m.view_mut((b * k, 0), (k, phi0.ncols())).copy_from(phi0);
        }
        Self {
            m,
            k: h.transpose() * w * h,
            s: s.clone(),
            nu,
        }
    }

    /// Absorb one observation row `y' = x̃' Φ + u'` (`x̃` of length T k).
    pub fn absorb(&mut self, x: &DVector<f64>, y: &DVector<f64>, dof: f64) {
        let k_new = &self.k + x * x.transpose();
        let rhs = &self.k * &self.m + x * y.transpose();
        let m_new = k_new.clone().cholesky().unwrap().solve(&rhs);
        self.s = &self.s + y * y.transpose() + self.m.transpose() * &self.k * &self.m
            - m_new.transpose() * &k_new * &m_new;
        self.s = (&self.s + self.s.transpose()) * 0.5;
        self.k = k_new;
        self.m = m_new;
        self.nu += dof;
    }

    /// Multivariate Student-t log density of `y` given regressor `x̃`.
    pub fn log_predictive(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let n = y.len() as f64;
        let c = 1.0 + x.dot(&self.k.clone().cholesky().unwrap().solve(x));
        let d = self.nu - n + 1.0;
        let scale = &self.s * (c / d);
        let e = y - self.m.transpose() * x;
        let ch = scale.clone().cholesky().unwrap();
        let q = e.dot(&ch.solve(&e));
        let logdet = 2.0 * ch.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        libm::lgamma((d + n) / 2.0)
            - libm::lgamma(d / 2.0)
            - n / 2.0 * (d * std::f64::consts::PI).ln()
            - 0.5 * logdet
            - (d + n) / 2.0 * (1.0 + q / d).ln()
    }
}

pub fn stacked_regressor(design: &StaticDesign, t: usize) -> DVector<f64> {
    let k = design.k();
    let mut x = DVector::zeros(design.periods() * k);
    x.rows_mut(t * k, k).copy_from(&design.x.row(t).transpose());
    x
}

/// Sum of one-step log predictive densities under sequential dense updates.
pub fn sequential_log_ml(design: &StaticDesign, prior: &DenseNiw) -> f64 {
    let mut st = prior.clone();
    let mut total = 0.0;
    for t in 0..design.periods() {
        if !design.observed[t] {
            continue;
        }
        let x = stacked_regressor(design, t);
        let y = design.y.row(t).transpose();
        total += st.log_predictive(&x, &y);
        st.absorb(&x, &y, 1.0);
    }
    total
}

/// Theory update of a dense prior by pseudo rows; `ν` grows by `γ T`.
pub fn dense_theory_update(
    prior: &DenseNiw,
    pseudo: &[Vec<(DVector<f64>, DVector<f64>)>],
    gamma: f64,
) -> DenseNiw {
    let t_len = pseudo.len();
    let k = prior.m.nrows() / t_len;
    let mut st = prior.clone();
    for (t, rows) in pseudo.iter().enumerate() {
        for (x, y) in rows {
            let mut xs = DVector::zeros(t_len * k);
            xs.rows_mut(t * k, k).copy_from(x);
            st.absorb(&xs, y, 0.0);
        }
    }
    st.nu += gamma * t_len as f64;
    st
}

/// Scalar (T = k = N = 1) integrating constant by 2-D trapezoidal quadrature
/// of `p(φ, σ² | λ) ∏ N(y* | x* φ, σ²)^γ`, with the pseudo-likelihood written
/// through the moments. The grid is in `(z, ln σ²)` with
/// `φ = m + z σ / √K̃`, so the φ range widens with σ².
pub fn scalar_constant_quadrature(
    phi0: f64,
    kprec: f64,
    s: f64,
    nu: f64,
    gxx: f64,
    gxy: f64,
    gyy: f64,
    gamma: f64,
) -> f64 {
    use std::f64::consts::PI;
    // IW(s, ν) on σ² is IG(ν/2, s/2)
    let log_prior = |phi: f64, v: f64| {
        let a = nu / 2.0;
        let b = s / 2.0;
        let lig = a * b.ln() - libm::lgamma(a) - (a + 1.0) * v.ln() - b / v;
        let ln = -0.5 * (2.0 * PI * v / kprec).ln() - kprec * (phi - phi0).powi(2) / (2.0 * v);
        lig + ln
    };
    let log_lik = |phi: f64, v: f64| {
        -gamma / 2.0 * (2.0 * PI * v).ln()
            - gamma * (gyy - 2.0 * phi * gxy + phi * phi * gxx) / (2.0 * v)
    };
    let kk = kprec + gamma * gxx;
    let mphi = (kprec * phi0 + gamma * gxy) / kk;
    let spost = s + gamma * gyy + kprec * phi0 * phi0 - kk * mphi * mphi;
    let vmode = spost / (nu + gamma + 2.0);
    let (n_z, n_u) = (801usize, 6001usize);
    let (z_lo, z_hi) = (-12.0, 12.0);
    let (u_lo, u_hi) = (vmode.ln() - 8.0, vmode.ln() + 90.0 / (nu + gamma));
    let dz = (z_hi - z_lo) / (n_z - 1) as f64;
    let du = (u_hi - u_lo) / (n_u - 1) as f64;
    let mut logs = Vec::with_capacity(n_z * n_u);
    for i in 0..n_z {
        let z = z_lo + i as f64 * dz;
        for j in 0..n_u {
            let u = u_lo + j as f64 * du;
            let v = u.exp();
            let sd = (v / kk).sqrt();
            let phi = mphi + z * sd;
            // dσ² = σ² du, dφ = sd dz
            logs.push(log_prior(phi, v) + log_lik(phi, v) + u + sd.ln());
        }
    }
    let mx = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for i in 0..n_z {
        for j in 0..n_u {
            let w = if i == 0 || i == n_z - 1 { 0.5 } else { 1.0 }
                * if j == 0 || j == n_u - 1 { 0.5 } else { 1.0 };
            sum += w * (logs[i * n_u + j] - mx).exp();
        }
    }
    mx + (sum * dz * du).ln()
}

/// Deterministic path of a structural system by stacking
/// `Γ2_t s_{t+1} + Γ0_t s_t − Γ1_t s_{t−1} = Γc_t + Ψ_t ε_t` for `t = 0..len`,
/// with `s_{−1}` given and `s_len` fixed at `terminal`. `systems[t]` is the
/// system in force at `t`.
pub fn perfect_foresight(
    systems: &[ReSystem],
    s_init: &DVector<f64>,
    shocks: &[DVector<f64>],
    terminal: &DVector<f64>,
) -> Vec<DVector<f64>> {
    let len = systems.len();
    let n = s_init.len();
    let mut a = DMatrix::zeros(len * n, len * n);
    let mut b = DVector::zeros(len * n);
    for t in 0..len {
        let sys = &systems[t];
        a.view_mut((t * n, t * n), (n, n)).copy_from(&sys.gamma0);
        let mut rhs = sys.gammac.clone() + &sys.psi * &shocks[t];
        if t > 0 {
            a.view_mut((t * n, (t - 1) * n), (n, n))
                .copy_from(&(-&sys.gamma1));
        } else {
            rhs += &sys.gamma1 * s_init;
        }
        if t + 1 < len {
            a.view_mut((t * n, (t + 1) * n), (n, n))
                .copy_from(&sys.gamma2);
        } else {
            rhs -= &sys.gamma2 * terminal;
        }
        b.rows_mut(t * n, n).copy_from(&rhs);
    }
    let x = a.lu().solve(&b).expect("stacked system is singular");
    (0..len).map(|t| x.rows(t * n, n).into_owned()).collect()
}

/// Sample mean and standard error of each entry of a set of matrices.
pub fn mean_se(samples: &[DMatrix<f64>]) -> (DMatrix<f64>, DMatrix<f64>) {
    let m = samples.len() as f64;
    let (r, c) = samples[0].shape();
    let mut mean = DMatrix::zeros(r, c);
    for s in samples {
        mean += s;
    }
    mean /= m;
    let mut var = DMatrix::zeros(r, c);
    for s in samples {
        let d = s - &mean;
        var += d.component_mul(&d);
    }
    var /= m - 1.0;
    (mean, var.map(|v| (v / m).sqrt()))
}
