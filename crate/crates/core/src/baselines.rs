//! Competing models: flat-prior VAR, Minnesota BVAR and the standard
//! TVP-VAR with independent inverse-gamma state variances.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::linalg::{
    chol, draw_inv_wishart, inv_spd, std_normal_matrix, symmetrize, BlockCholesky, BlockTridiag,
};
use crate::posterior::StaticDesign;
use crate::sampler::{chain_rng, presample_variances, ChainConfig, DrawStore};
use crate::{Error, Result};

/// Constant-coefficient matric-variate NIW:
/// `Σ ~ IW(S, ν)`, `vec(Π) | Σ ~ N(vec(M), Σ ⊗ K⁻¹)`.
#[derive(Clone, Debug)]
pub struct ConstantNiw {
    pub mean: DMatrix<f64>,
    pub prec: DMatrix<f64>,
    pub s: DMatrix<f64>,
    pub nu: f64,
}

impl ConstantNiw {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let sigma = draw_inv_wishart(rng, &self.s, self.nu)?;
        let l = chol(&self.prec, "coefficient precision")?;
        let a = chol(&sigma, "Σ draw")?;
        let z = std_normal_matrix(rng, self.mean.nrows(), self.mean.ncols());
        let dev = l
            .transpose()
            .solve_upper_triangular(&z)
            .ok_or(Error::CholeskyFailure("coefficient precision".into()))?;
        Ok((sigma, &self.mean + dev * a.transpose()))
    }

    /// Posterior mean of Σ (requires `ν > N + 1`).
    pub fn sigma_mean(&self) -> DMatrix<f64> {
        &self.s / (self.nu - self.s.nrows() as f64 - 1.0)
    }
}

fn spd_solve(a: &DMatrix<f64>, b: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let c = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::CholeskyFailure(what.into()))?;
    Ok(c.solve(b))
}

fn observed_rows(design: &StaticDesign) -> (DMatrix<f64>, DMatrix<f64>) {
    let idx: Vec<usize> = (0..design.periods())
        .filter(|&t| design.observed[t])
        .collect();
    (design.y.select_rows(&idx), design.x.select_rows(&idx))
}

/// Flat-prior VAR: posterior centred at OLS with `ν = T − k`.
pub fn fit_flat_var(design: &StaticDesign) -> Result<ConstantNiw> {
    let (y, x) = observed_rows(design);
    let (t, k, n) = (y.nrows(), x.ncols(), y.ncols());
    if t <= k + n {
        return Err(Error::InsufficientData(format!(
            "flat VAR needs T > k + N, got T = {t}, k = {k}, N = {n}"
        )));
    }
    let xx = x.transpose() * &x;
    let pi = spd_solve(&xx, &(x.transpose() * &y), "X'X")?;
    let e = &y - &x * &pi;
    Ok(ConstantNiw {
        mean: pi,
        prec: xx,
        s: symmetrize(&(e.transpose() * e)),
        nu: (t - k) as f64,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MinnesotaSpec {
    pub tightness: f64,
    /// Intercept prior variance; `f64::INFINITY` gives it zero precision.
    pub intercept_var: f64,
    /// Random-walk centring per variable (white noise otherwise).
    pub nonstationary: Vec<bool>,
}

impl Default for MinnesotaSpec {
    fn default() -> Self {
        Self {
            tightness: 0.1,
            intercept_var: 100.0,
            nonstationary: Vec::new(),
        }
    }
}

impl MinnesotaSpec {
    /// Prior precisions of the `k` regressors: intercept, then
    /// `σᵢ² l² / θ₁` for lag `l` of variable `i`.
    pub fn precisions(&self, sigma2: &DVector<f64>, p: usize) -> DVector<f64> {
        let n = sigma2.len();
        let mut w = DVector::zeros(1 + n * p);
        w[0] = 1.0 / self.intercept_var;
        for l in 1..=p {
            for i in 0..n {
                w[1 + (l - 1) * n + i] = sigma2[i] * (l * l) as f64 / self.tightness;
            }
        }
        w
    }

    pub fn centering(&self, n: usize, p: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(1 + n * p, n);
        if p > 0 {
            for i in 0..n {
                if self.nonstationary.get(i).copied().unwrap_or(false) {
                    m[(1 + i, i)] = 1.0;
                }
            }
        }
        m
    }
}

/// Conjugate Minnesota posterior with `S₀ = diag(σ̂²)`, `v₀ = N + 2`.
pub fn fit_minnesota(design: &StaticDesign, spec: &MinnesotaSpec) -> Result<ConstantNiw> {
    let (y, x) = observed_rows(design);
    let (t, n) = (y.nrows(), y.ncols());
    if t == 0 {
        return Err(Error::InsufficientData(
            "Minnesota BVAR needs at least one observation".into(),
        ));
    }
    if spec.tightness <= 0.0 || spec.intercept_var <= 0.0 {
        return Err(Error::InvalidParameter(
            "Minnesota tightness and intercept variance must be positive".into(),
        ));
    }
    let sigma2 = presample_variances(design);
    let w = spec.precisions(&sigma2, design.p);
    let m0 = spec.centering(n, design.p);
    let k0 = DMatrix::from_diagonal(&w);
    let prec = &k0 + x.transpose() * &x;
    let rhs = &k0 * &m0 + x.transpose() * &y;
    let mean = spd_solve(&prec, &rhs, "Minnesota posterior precision")?;
    let s0 = DMatrix::from_diagonal(&sigma2);
    let s =
        &s0 + y.transpose() * &y + m0.transpose() * &k0 * &m0 - mean.transpose() * &prec * &mean;
    Ok(ConstantNiw {
        mean,
        prec,
        s: symmetrize(&s),
        nu: n as f64 + 2.0 + t as f64,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StdTvpSpec {
    /// Inverse-gamma shape of each state variance.
    pub omega_shape: f64,
    /// Inverse-gamma scale of each state variance.
    pub omega_scale: f64,
}

impl Default for StdTvpSpec {
    fn default() -> Self {
        Self {
            omega_shape: 3.0,
            omega_scale: 0.005,
        }
    }
}

/// Prior pieces of the state-space TVP-VAR in `α_t = vec(Φ_t)` coordinates
/// (`α` index `i k + j` is regressor `j` of equation `i`).
#[derive(Clone, Debug)]
pub struct TvpPrior {
    pub alpha0: DVector<f64>,
    /// Precision of `α₁`.
    pub first_prec: DMatrix<f64>,
    pub s0: DMatrix<f64>,
    pub v0: f64,
}

impl TvpPrior {
    /// `α₁ ~ N(vec Φ₀, Σ̂ ⊗ P₁⁻¹)`, with `Σ̂ = S₀` and `P₁` the pre-sample
    /// regressor precision (identity if unavailable).
    pub fn from_design(design: &StaticDesign) -> Result<Self> {
        let n = design.n_vars();
        let k = design.k();
        let s0 = DMatrix::from_diagonal(&presample_variances(design));
        let p1 = crate::prior::presample_first_block(&design.presample_x)
            .unwrap_or_else(|| DMatrix::identity(k, k));
        Ok(Self {
            alpha0: DVector::zeros(n * k),
            first_prec: inv_spd(&s0)?.kronecker(&p1),
            s0,
            v0: n as f64 + 2.0,
        })
    }
}

/// Gaussian conditional of the coefficient path given Σ and the state
/// precision: returns the block-tridiagonal precision and its linear term.
pub fn alpha_conditional(
    design: &StaticDesign,
    sigma: &DMatrix<f64>,
    omega_prec: &DMatrix<f64>,
    first_prec: &DMatrix<f64>,
    alpha0: &DVector<f64>,
) -> Result<(BlockTridiag, DMatrix<f64>)> {
    let t_len = design.periods();
    let nk = design.n_vars() * design.k();
    let si = inv_spd(sigma)?;
    let mut q = BlockTridiag::zeros(t_len, nk);
    let mut b = DMatrix::zeros(t_len * nk, 1);
    for t in 0..t_len {
        q.diag[t] = if t == 0 {
            first_prec.clone()
        } else {
            omega_prec.clone()
        };
        if t + 1 < t_len {
            q.diag[t] += omega_prec;
            q.sub[t] = -omega_prec;
        }
        if design.observed[t] {
            q.diag[t] += si.kronecker(&design.xx[t]);
            let xt = design.x.row(t).transpose();
            let yt = design.y.row(t).transpose();
            let g = xt * (yt.transpose() * &si);
            b.rows_mut(t * nk, nk)
                .copy_from(&DMatrix::from_column_slice(nk, 1, g.as_slice()));
        }
    }
    let b0 = first_prec * alpha0;
    let mut top = b.rows_mut(0, nk);
    top += &b0;
    Ok((q, b))
}

/// Reshape a stacked `α` path into the `T k x N` Φ layout.
pub fn alpha_to_phi(alpha: &DMatrix<f64>, k: usize, n: usize) -> DMatrix<f64> {
    let t_len = alpha.nrows() / (n * k);
    let mut phi = DMatrix::zeros(t_len * k, n);
    for t in 0..t_len {
        for i in 0..n {
            for j in 0..k {
                phi[(t * k + j, i)] = alpha[(t * n * k + i * k + j, 0)];
            }
        }
    }
    phi
}

/// Conditional posterior mean of the coefficient path.
pub fn alpha_mean(q: &BlockTridiag, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(BlockCholesky::factor(q)?.solve(b))
}

fn draw_alpha<R: Rng + ?Sized>(
    q: &BlockTridiag,
    b: &DMatrix<f64>,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    let f = BlockCholesky::factor(q)?;
    let z = std_normal_matrix(rng, b.nrows(), 1);
    Ok(f.solve(b) + f.solve_upper(&z))
}

/// Inverse-gamma conditional of one state variance: shape
/// `a + n/2`, scale `b + ½ Σ Δα²` over the `n` increments.
pub fn omega_conditional(shape: f64, scale: f64, increments: &[f64]) -> (f64, f64) {
    let ss: f64 = increments.iter().map(|d| d * d).sum();
    (shape + increments.len() as f64 / 2.0, scale + 0.5 * ss)
}

fn draw_inv_gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64, scale: f64) -> f64 {
    let g = Gamma::new(shape, 1.0 / scale).expect("positive inverse-gamma parameters");
    1.0 / g.sample(rng)
}

/// Gibbs sampler for the standard TVP-VAR. Saved draws carry Φ, Σ and the
/// state variances (under `extra["omega"]`).
pub fn fit_std_tvpvar(
    design: &StaticDesign,
    spec: &StdTvpSpec,
    prior: &TvpPrior,
    cfg: &ChainConfig,
    chain: usize,
) -> Result<DrawStore> {
    cfg.validate()?;
    if spec.omega_shape <= 0.0 || spec.omega_scale <= 0.0 {
        return Err(Error::InvalidParameter(
            "state-variance prior must be positive".into(),
        ));
    }
    let mut rng = chain_rng(cfg.seed, chain as u64);
    let (t_len, k, n) = (design.periods(), design.k(), design.n_vars());
    let nk = n * k;
    let mut store = DrawStore::new("std-tvp-var", cfg);
    store.shape = (t_len, k, n);
    let mut sigma = &prior.s0 / (prior.v0 - n as f64 + 1.0).max(1.0);
    let mut omega = vec![spec.omega_scale / (spec.omega_shape + 1.0); nk];
    let mut omegas = Vec::new();
    for it in 0..cfg.iterations {
        let op = DMatrix::from_diagonal(&DVector::from_iterator(nk, omega.iter().map(|w| 1.0 / w)));
        let (q, b) = alpha_conditional(design, &sigma, &op, &prior.first_prec, &prior.alpha0)?;
        let alpha = draw_alpha(&q, &b, &mut rng)?;
        let phi = alpha_to_phi(&alpha, k, n);
        let mut ss = prior.s0.clone();
        let mut n_used = 0.0;
        for t in 0..t_len {
            if design.observed[t] {
                let u = design.y.row(t) - design.x.row(t) * phi.rows(t * k, k);
                ss += u.transpose() * u;
                n_used += 1.0;
            }
        }
        sigma = draw_inv_wishart(&mut rng, &symmetrize(&ss), prior.v0 + n_used)?;
        for (i, w) in omega.iter_mut().enumerate() {
            let inc: Vec<f64> = (1..t_len)
                .map(|t| alpha[(t * nk + i, 0)] - alpha[((t - 1) * nk + i, 0)])
                .collect();
            let (a, s) = omega_conditional(spec.omega_shape, spec.omega_scale, &inc);
            *w = draw_inv_gamma(&mut rng, a, s);
        }
        if it >= cfg.burn_in && (it - cfg.burn_in + 1).is_multiple_of(cfg.thin) {
            store.phi.push(phi);
            store.sigma.push(sigma.clone());
            store.chain.push(chain);
            omegas.push(omega.clone());
        }
    }
    store.extra.insert("omega".into(), omegas);
    Ok(store)
}
