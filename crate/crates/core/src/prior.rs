//! Random-walk and theory-coherent Normal-Inverse-Wishart priors.
//!
//! Coefficients are stacked period by period into a `(T k) x N` matrix Φ.
//! The random-walk prior has column precision `H' W H`, where `H` is the
//! first-difference operator and `W = blockdiag(P₁, Λ'Λ, …, Λ'Λ)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{
    chol, ln_mvgamma, logdet_spd, std_normal_matrix, symmetrize, BlockCholesky, BlockTridiag,
};
use crate::theory::TheoryMoments;
use crate::{Error, Result};

/// Persistence hyper-parameter: one λ for all regressors or one per regressor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Lambda {
    Scalar(f64),
    PerRegressor(Vec<f64>),
}

/// λ together with an optional precision override for the first period.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaSpec {
    pub lambda: Lambda,
    pub first_block: Option<DMatrix<f64>>,
}

impl LambdaSpec {
    pub fn scalar(l: f64) -> Self {
        Self {
            lambda: Lambda::Scalar(l),
            first_block: None,
        }
    }

    pub fn with_first_block(mut self, p1: DMatrix<f64>) -> Self {
        self.first_block = Some(p1);
        self
    }

    /// `Λ'Λ` as a k x k diagonal matrix.
    pub fn gram(&self, k: usize) -> Result<DMatrix<f64>> {
        let d = match &self.lambda {
            Lambda::Scalar(l) => DVector::from_element(k, l * l),
            Lambda::PerRegressor(v) => {
                if v.len() != k {
                    return Err(Error::Dimension(format!(
                        "{} λ values for k = {k}",
                        v.len()
                    )));
                }
                DVector::from_iterator(k, v.iter().map(|l| l * l))
            }
        };
        if d.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(
                "λ must be finite and non-negative".into(),
            ));
        }
        Ok(DMatrix::from_diagonal(&d))
    }

    /// Precision of the first period's increment: the override or `Λ'Λ`.
    pub fn first(&self, k: usize) -> Result<DMatrix<f64>> {
        match &self.first_block {
            Some(p) if p.shape() != (k, k) => Err(Error::Dimension(
                "first-block precision is not k x k".into(),
            )),
            Some(p) => Ok(p.clone()),
            None => self.gram(k),
        }
    }
}

/// Block first-difference operator `H` of `T` periods with blocks of size `k`.
#[derive(Clone, Copy, Debug)]
pub struct BandShift {
    pub t: usize,
    pub k: usize,
}

impl BandShift {
    /// `H x`: block `t` becomes `x_t − x_{t−1}`.
    pub fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let k = self.k;
        let mut out = x.clone();
        for t in 1..self.t {
            let prev = x.rows((t - 1) * k, k).into_owned();
            let mut cur = out.rows_mut(t * k, k);
            cur -= prev;
        }
        out
    }

    /// `H⁻¹ y`: cumulative block sums.
    pub fn solve(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        let k = self.k;
        let mut out = y.clone();
        for t in 1..self.t {
            let prev = out.rows((t - 1) * k, k).into_owned();
            let mut cur = out.rows_mut(t * k, k);
            cur += prev;
        }
        out
    }

    /// `H' W H` with `W = blockdiag(w_first, w, …, w)`.
    pub fn gram(&self, w_first: &DMatrix<f64>, w: &DMatrix<f64>) -> BlockTridiag {
        let mut p = BlockTridiag::zeros(self.t, self.k);
        for t in 0..self.t {
            let own = if t == 0 { w_first } else { w };
            p.diag[t] = if t + 1 < self.t { own + w } else { own.clone() };
            if t + 1 < self.t {
                p.sub[t] = -w;
            }
        }
        p
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.t * self.k;
        assert!(n <= crate::linalg::DENSE_LIMIT);
        self.apply(&DMatrix::identity(n, n))
    }
}

type Chol = nalgebra::Cholesky<f64, nalgebra::Dyn>;

/// `K = H' W H + blockdiag(D_t)` kept in parts. Solves run on the excess
/// `F_t` of each Schur complement over `w`, so they stay accurate when `w`
/// is many orders of magnitude larger than the data blocks.
#[derive(Clone, Debug)]
pub struct RwPrecision {
    pub w_first: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub extra: Vec<DMatrix<f64>>,
}

impl RwPrecision {
    /// `K x`, with increments formed before scaling by `w`.
    pub fn mul(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let t_len = self.extra.len();
        let k = self.w.nrows();
        let blk = |t: usize| x.rows(t * k, k);
        let mut out = DMatrix::zeros(x.nrows(), x.ncols());
        for t in 0..t_len {
            let mut r = &self.extra[t] * blk(t);
            r += if t == 0 {
                &self.w_first * blk(0)
            } else {
                &self.w * (blk(t) - blk(t - 1))
            };
            if t + 1 < t_len {
                r -= &self.w * (blk(t + 1) - blk(t));
            }
            out.rows_mut(t * k, k).copy_from(&r);
        }
        out
    }

    /// Schur complements `C_t` as Cholesky factors, with the excesses `F_t`.
    fn factors(&self) -> Result<(Vec<Chol>, Vec<DMatrix<f64>>)> {
        let t_len = self.extra.len();
        let mut cs = Vec::with_capacity(t_len);
        let mut fs: Vec<DMatrix<f64>> = Vec::with_capacity(t_len);
        for t in 0..t_len {
            let f = if t == 0 {
                &self.w_first + &self.extra[0]
            } else {
                let prev = &fs[t - 1];
                let c: &Chol = &cs[t - 1];
                symmetrize(&(&self.extra[t] + &self.w * c.solve(prev)))
            };
            let c = if t + 1 < t_len {
                &f + &self.w
            } else {
                f.clone()
            };
            cs.push(c.cholesky().ok_or_else(|| {
                Error::CholeskyFailure(format!("random-walk precision block {t}"))
            })?);
            fs.push(f);
        }
        Ok((cs, fs))
    }

    pub fn solve(&self, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let t_len = self.extra.len();
        let k = self.w.nrows();
        let (cs, fs) = self.factors()?;
        let mut y: Vec<DMatrix<f64>> = Vec::with_capacity(t_len);
        for t in 0..t_len {
            let mut yt = b.rows(t * k, k).into_owned();
            if t > 0 {
                yt += &self.w * cs[t - 1].solve(&y[t - 1]);
            }
            y.push(yt);
        }
        let mut x = DMatrix::zeros(b.nrows(), b.ncols());
        let mut next = cs[t_len - 1].solve(&y[t_len - 1]);
        x.rows_mut((t_len - 1) * k, k).copy_from(&next);
        for t in (0..t_len - 1).rev() {
            next = &next + cs[t].solve(&(&y[t] - &fs[t] * &next));
            x.rows_mut(t * k, k).copy_from(&next);
        }
        Ok(x)
    }

    pub fn logdet(&self) -> Result<f64> {
        let (cs, _) = self.factors()?;
        Ok(cs
            .iter()
            .map(|c| 2.0 * c.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>())
            .sum())
    }
}

/// Matric-variate Normal-Inverse-Wishart parameters:
/// `Σ ~ IW(S, ν)`, `vec(Φ) | Σ ~ N(vec(M), Σ ⊗ K⁻¹)`.
#[derive(Clone, Debug)]
pub struct NiwParams {
    pub m: DMatrix<f64>,
    pub k: BlockTridiag,
    /// Block Cholesky factor of `k`; `None` when `k` is singular.
    pub chol: Option<BlockCholesky>,
    pub s: DMatrix<f64>,
    pub nu: f64,
    /// Structured form of `k` when it is a random-walk precision plus
    /// block-diagonal terms; used for means and determinants.
    pub rw: Option<RwPrecision>,
}

impl NiwParams {
    pub fn new(m: DMatrix<f64>, k: BlockTridiag, s: DMatrix<f64>, nu: f64) -> Self {
        let chol = BlockCholesky::factor(&k).ok();
        Self {
            m,
            k,
            chol,
            s,
            nu,
            rw: None,
        }
    }

    fn with_rw(mut self, rw: RwPrecision) -> Self {
        self.rw = Some(rw);
        self
    }

    pub fn periods(&self) -> usize {
        self.k.nblocks()
    }

    pub fn block_size(&self) -> usize {
        self.k.block_size()
    }

    pub fn n_vars(&self) -> usize {
        self.s.nrows()
    }

    pub fn factor(&self) -> Result<&BlockCholesky> {
        self.chol.as_ref().ok_or(Error::DegeneratePrior)
    }

    pub fn logdet_k(&self) -> Result<f64> {
        let f = self.factor()?;
        match &self.rw {
            Some(rw) => rw.logdet(),
            None => Ok(f.logdet()),
        }
    }

    /// Coefficient block of period `t` (k x N).
    pub fn block(&self, t: usize) -> DMatrix<f64> {
        let k = self.block_size();
        self.m.rows(t * k, k).into_owned()
    }

    /// Conjugate update with a weighted Gram matrix that is block-diagonal
    /// over periods: precision `K + XX`, `K M_new = K M + XY`,
    /// `S_new = S + YY + M'KM − M_new' K_new M_new`, `ν_new = ν + n_obs`.
    pub fn update(
        &self,
        xx: &[DMatrix<f64>],
        xy: &DMatrix<f64>,
        yy: &DMatrix<f64>,
        n_obs: f64,
    ) -> Result<Self> {
        if xx.len() != self.periods()
            || xy.shape() != self.m.shape()
            || yy.shape() != self.s.shape()
        {
            return Err(Error::Dimension(
                "conjugate update blocks are not conformable".into(),
            ));
        }
        let mut k_new = self.k.clone();
        for (d, x) in k_new.diag.iter_mut().zip(xx) {
            *d += x;
        }
        let f = BlockCholesky::factor(&k_new).map_err(|_| Error::DegeneratePrior)?;
        let rw_new = self.rw.as_ref().map(|rw| RwPrecision {
            extra: rw.extra.iter().zip(xx).map(|(a, b)| a + b).collect(),
            ..rw.clone()
        });
        let (km, m_new) = match (&self.rw, &rw_new) {
            (Some(rw), Some(rn)) => {
                let km = rw.mul(&self.m);
                let m_new = rn.solve(&(&km + xy)).map_err(|_| Error::DegeneratePrior)?;
                (km, m_new)
            }
            _ => {
                let km = self.k.mul(&self.m);
                let m_new = f.solve(&(&km + xy));
                (km, m_new)
            }
        };
        let rhs = &km + xy;
        let s_new = &self.s + yy + self.m.transpose() * &km - rhs.transpose() * &m_new;
        Ok(Self {
            m: m_new,
            k: k_new,
            chol: Some(f),
            s: symmetrize(&s_new),
            nu: self.nu + n_obs,
            rw: rw_new,
        })
    }

    /// Draw `(Σ, Φ)` jointly: Σ from the inverse Wishart, then
    /// `Φ = M + L⁻ᵀ Z A'` with `Σ = A A'`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let sigma = crate::linalg::draw_inv_wishart(rng, &self.s, self.nu)?;
        let phi = self.draw_phi_given(&sigma, rng)?;
        Ok((sigma, phi))
    }

    pub fn draw_phi_given<R: Rng + ?Sized>(
        &self,
        sigma: &DMatrix<f64>,
        rng: &mut R,
    ) -> Result<DMatrix<f64>> {
        let f = self.factor()?;
        let a = chol(sigma, "Σ draw")?;
        let z = std_normal_matrix(rng, self.m.nrows(), self.n_vars());
        Ok(&self.m + f.solve_upper(&z) * a.transpose())
    }
}

/// Random-walk prior: location `Φ₀` in every period, precision `H' W H`.
pub fn rw_prior(
    spec: &LambdaSpec,
    phi0: &DMatrix<f64>,
    s: &DMatrix<f64>,
    nu: f64,
    t: usize,
) -> Result<NiwParams> {
    let k = phi0.nrows();
    if t == 0 {
        return Err(Error::InsufficientData(
            "random-walk prior needs T ≥ 1".into(),
        ));
    }
    if s.shape() != (phi0.ncols(), phi0.ncols()) {
        return Err(Error::Dimension("S is not N x N".into()));
    }
    let w = spec.gram(k)?;
    let w1 = spec.first(k)?;
    let kmat = BandShift { t, k }.gram(&w1, &w);
    let mut m = DMatrix::zeros(t * k, phi0.ncols());
    for b in 0..t {
        m.rows_mut(b * k, k).copy_from(phi0);
    }
    let rw = RwPrecision {
        w_first: w1,
        w,
        extra: vec![DMatrix::zeros(k, k); t],
    };
    Ok(NiwParams::new(m, kmat, s.clone(), nu).with_rw(rw))
}

/// Theory-coherent prior: the random-walk prior updated with `γ` replications
/// of the theory's population moments.
pub fn theory_update(rw: &NiwParams, moments: &TheoryMoments, gamma: f64) -> Result<NiwParams> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "γ = {gamma} must be finite and ≥ 0"
        )));
    }
    if moments.len() != rw.periods() {
        return Err(Error::Dimension(format!(
            "{} moment periods for T = {}",
            moments.len(),
            rw.periods()
        )));
    }
    if gamma == 0.0 {
        rw.factor()?;
        return Ok(rw.clone());
    }
    let xx: Vec<DMatrix<f64>> = moments.gxx.iter().map(|g| g * gamma).collect();
    let xy = moments.stacked_gxy() * gamma;
    let yy = moments.sum_gyy() * gamma;
    rw.update(&xx, &xy, &yy, gamma * rw.periods() as f64)
}

/// log of the normalising constant `c(λ, θ, γ)` of the theory-coherent prior:
/// `∫ p(Φ, Σ | λ) p(Y*(θ) | γ, Φ, Σ) dΦ dΣ`.
pub fn integrating_constant(
    rw: &NiwParams,
    tc: &NiwParams,
    gamma: f64,
    t: usize,
    n: usize,
) -> Result<f64> {
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let nf = n as f64;
    Ok(
        -(gamma * t as f64 * nf / 2.0) * std::f64::consts::PI.ln() + ln_mvgamma(n, tc.nu / 2.0)
            - ln_mvgamma(n, rw.nu / 2.0)
            + rw.nu / 2.0 * logdet_spd(&rw.s)?
            - tc.nu / 2.0 * logdet_spd(&tc.s)?
            + nf / 2.0 * (rw.logdet_k()? - tc.logdet_k()?),
    )
}

/// Forward Markov representation of a block-tridiagonal Gaussian prior:
/// `Φ₁ − μ₁ = V₁ ε₁`, `Φ_{t+1} − μ_{t+1} = A_{t+1}(Φ_t − μ_t) + V_{t+1} ε_{t+1}`
/// with `ε_t` iid and the row covariance `Σ` applied on the right.
#[derive(Clone, Debug)]
pub struct ConditionalChain {
    pub mu: Vec<DMatrix<f64>>,
    /// `a[t]` maps period `t−1` into period `t`; `a[0]` is zero.
    pub a: Vec<DMatrix<f64>>,
    pub v: Vec<DMatrix<f64>>,
}

impl ConditionalChain {
    /// Conditional covariance factor `V_t V_t'` (times Σ).
    pub fn cond_cov(&self, t: usize) -> DMatrix<f64> {
        &self.v[t] * self.v[t].transpose()
    }

    /// Draw a path given `Σ = A A'`.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        sigma: &DMatrix<f64>,
        rng: &mut R,
    ) -> Result<DMatrix<f64>> {
        let a = chol(sigma, "Σ")?;
        let k = self.mu[0].nrows();
        let n = sigma.nrows();
        let t_len = self.mu.len();
        let mut out = DMatrix::zeros(t_len * k, n);
        let mut dev = DMatrix::zeros(k, n);
        for t in 0..t_len {
            let z = std_normal_matrix(rng, k, n);
            dev = &self.a[t] * &dev + &self.v[t] * z * a.transpose();
            out.rows_mut(t * k, k).copy_from(&(&self.mu[t] + &dev));
        }
        Ok(out)
    }
}

/// Forward conditional chain of `prior`.
///
/// Factor the time-reversed precision so that `P = U U'` with `U` upper
/// block-bidiagonal; the rows of `U'` then give one independent innovation
/// per period in forward order.
pub fn conditional_chain(prior: &NiwParams) -> Result<ConditionalChain> {
    let t_len = prior.periods();
    let k = prior.block_size();
    let rev = BlockCholesky::factor(&prior.k.reversed())?;
    // U_tt = rev.diag[T-1-t], U_{t,t+1} = rev.sub[T-2-t]
    let u_diag = |t: usize| &rev.diag[t_len - 1 - t];
    let u_off = |t: usize| &rev.sub[t_len - 2 - t];
    let id = DMatrix::<f64>::identity(k, k);
    let mut a = vec![DMatrix::zeros(k, k)];
    let mut v = Vec::with_capacity(t_len);
    // V_t = U_tt⁻ᵀ
    let v_of = |t: usize| {
        u_diag(t)
            .tr_solve_lower_triangular(&id)
            .expect("nonsingular factor")
    };
    v.push(v_of(0));
    for t in 1..t_len {
        let vt = v_of(t);
        // A_t = −U_tt⁻ᵀ U_{t−1,t}'
        a.push(-&vt * u_off(t - 1).transpose());
        v.push(vt);
    }
    let mu = (0..t_len).map(|t| prior.block(t)).collect();
    Ok(ConditionalChain { mu, a, v })
}

/// Dummy observations `(Y*, X*)` whose Gram matrix is the random-walk
/// precision and whose least-squares fit is `Φ₀` in every period.
pub fn dummy_obs(
    spec: &LambdaSpec,
    phi0: &DMatrix<f64>,
    t: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let k = phi0.nrows();
    let lam = spec.gram(k)?.map(f64::sqrt);
    let first = match &spec.first_block {
        Some(p) => chol(p, "first-block precision")?.transpose(),
        None => lam.clone(),
    };
    let h = BandShift { t, k };
    let mut x = h.to_dense();
    for b in 0..t {
        let s = if b == 0 { &first } else { &lam };
        let rows = s * x.rows(b * k, k);
        x.rows_mut(b * k, k).copy_from(&rows);
    }
    let mut y = DMatrix::zeros(t * k, phi0.ncols());
    y.rows_mut(0, k).copy_from(&(&first * phi0));
    Ok((y, x))
}

/// First-period precision `(1/5) Σ x x'` from pre-sample regressors, or
/// `None` when the pre-sample has fewer rows than regressors.
pub fn presample_first_block(x_pre: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if x_pre.nrows() < x_pre.ncols() {
        return None;
    }
    let p1 = x_pre.transpose() * x_pre / 5.0;
    chol(&p1, "pre-sample").ok().map(|_| p1)
}

/// Residual variances of univariate AR(`lags`) regressions with intercept.
/// Series too short for the regression fall back to their sample variance.
pub fn ar_residual_variances(y: &DMatrix<f64>, lags: usize) -> DVector<f64> {
    DVector::from_iterator(
        y.ncols(),
        (0..y.ncols()).map(|i| {
            let col: Vec<f64> = y.column(i).iter().cloned().collect();
            ar_resid_var(&col, lags)
        }),
    )
}

fn ar_resid_var(x: &[f64], lags: usize) -> f64 {
    let n = x.len();
    let k = 1 + lags;
    if n < lags + k + 1 {
        let m = x.iter().sum::<f64>() / n.max(1) as f64;
        let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n.max(2) - 1) as f64;
        return if v > 0.0 { v } else { 1.0 };
    }
    let rows = n - lags;
    let xm = DMatrix::from_fn(rows, k, |r, c| if c == 0 { 1.0 } else { x[r + lags - c] });
    let ym = DVector::from_fn(rows, |r, _| x[r + lags]);
    let beta = (xm.transpose() * &xm)
        .lu()
        .solve(&(xm.transpose() * &ym))
        .unwrap_or_else(|| DVector::zeros(k));
    let e = ym - xm * beta;
    let v = e.norm_squared() / (rows - k) as f64;
    if v > 0.0 {
        v
    } else {
        1.0
    }
}
