//! Static-form design, conjugate posterior and closed-form marginal likelihood.

use nalgebra::DMatrix;

use crate::io::TimeSeriesPanel;
use crate::linalg::{inv_spd, ln_mvgamma, logdet_spd};
use crate::prior::NiwParams;
use crate::{Error, Result};

/// `Y = X Φ + U` with `X` block-diagonal over periods: row `t` of `X`
/// carries `x_t'` in block `t`.
///
/// Rows of the source data are laid out as `[pre-sample | p lags | sample]`.
#[derive(Clone, Debug)]
pub struct StaticDesign {
    pub y: DMatrix<f64>,
    /// Row `t` holds `x_t' = [1, y_{t-1}', …, y_{t-p}']`.
    pub x: DMatrix<f64>,
    pub xx: Vec<DMatrix<f64>>,
    /// `X'Y` stacked per period (`T k x N`).
    pub xy: DMatrix<f64>,
    pub yy: DMatrix<f64>,
    /// Periods that carry an observation; unobserved periods contribute nothing.
    pub observed: Vec<bool>,
    pub p: usize,
    pub presample_x: DMatrix<f64>,
    pub presample_y: DMatrix<f64>,
}

/// `[1, y_{r-1}', …, y_{r-p}']` from rows of `data`.
pub fn regressor(data: &DMatrix<f64>, r: usize, p: usize) -> nalgebra::DVector<f64> {
    let n = data.ncols();
    let mut x = nalgebra::DVector::zeros(1 + n * p);
    x[0] = 1.0;
    for l in 1..=p {
        for i in 0..n {
            x[1 + (l - 1) * n + i] = data[(r - l, i)];
        }
    }
    x
}

impl StaticDesign {
    pub fn new(data: &DMatrix<f64>, p: usize, presample: usize) -> Result<Self> {
        let rows = data.nrows();
        let n = data.ncols();
        if rows < p + 1 + presample {
            return Err(Error::InsufficientData(format!(
                "{rows} rows cannot hold {presample} pre-sample rows, {p} lags and one observation"
            )));
        }
        let t_len = rows - p - presample;
        let k = 1 + n * p;
        let start = presample + p;
        let mut x = DMatrix::zeros(t_len, k);
        let mut y = DMatrix::zeros(t_len, n);
        for t in 0..t_len {
            x.row_mut(t)
                .copy_from(&regressor(data, start + t, p).transpose());
            y.row_mut(t).copy_from(&data.row(start + t));
        }
        let mut presample_x = DMatrix::zeros(presample, k);
        for (i, r) in (p..p + presample).enumerate() {
            presample_x
                .row_mut(i)
                .copy_from(&regressor(data, r, p).transpose());
        }
        let presample_y = data.rows(0, start).into_owned();
        Ok(Self::assemble(
            y,
            x,
            vec![true; t_len],
            p,
            presample_x,
            presample_y,
        ))
    }

    fn assemble(
        y: DMatrix<f64>,
        x: DMatrix<f64>,
        observed: Vec<bool>,
        p: usize,
        presample_x: DMatrix<f64>,
        presample_y: DMatrix<f64>,
    ) -> Self {
        let (t_len, k, n) = (y.nrows(), x.ncols(), y.ncols());
        let mut xx = Vec::with_capacity(t_len);
        let mut xy = DMatrix::zeros(t_len * k, n);
        let mut yy = DMatrix::zeros(n, n);
        for t in 0..t_len {
            if !observed[t] {
                xx.push(DMatrix::zeros(k, k));
                continue;
            }
            let xt = x.row(t).transpose();
            let yt = y.row(t).transpose();
            xx.push(&xt * xt.transpose());
            xy.rows_mut(t * k, k).copy_from(&(&xt * yt.transpose()));
            yy += &yt * yt.transpose();
        }
        Self {
            y,
            x,
            xx,
            xy,
            yy,
            observed,
            p,
            presample_x,
            presample_y,
        }
    }

    /// Same design with the given periods marked unobserved.
    pub fn masked(&self, observed: Vec<bool>) -> Self {
        assert_eq!(observed.len(), self.periods());
        Self::assemble(
            self.y.clone(),
            self.x.clone(),
            observed,
            self.p,
            self.presample_x.clone(),
            self.presample_y.clone(),
        )
    }

    pub fn periods(&self) -> usize {
        self.y.nrows()
    }

    pub fn n_obs(&self) -> usize {
        self.observed.iter().filter(|o| **o).count()
    }

    pub fn n_vars(&self) -> usize {
        self.y.ncols()
    }

    pub fn k(&self) -> usize {
        self.x.ncols()
    }
}

pub fn build_design(panel: &TimeSeriesPanel, p: usize) -> Result<StaticDesign> {
    StaticDesign::new(&panel.values, p, panel.presample)
}

/// Conjugate posterior of `(Φ, Σ)` given the prior and the data.
pub fn conditional_posterior(design: &StaticDesign, prior: &NiwParams) -> Result<NiwParams> {
    if design.periods() != prior.periods() || design.k() != prior.block_size() {
        return Err(Error::Dimension(format!(
            "design has {} periods of {} regressors, prior {} of {}",
            design.periods(),
            design.k(),
            prior.periods(),
            prior.block_size()
        )));
    }
    if design.n_obs() == 0 {
        return Ok(prior.clone());
    }
    prior.update(&design.xx, &design.xy, &design.yy, design.n_obs() as f64)
}

/// Components of the log marginal likelihood: fit + penalty + constant = total.
#[derive(Clone, Debug, PartialEq)]
pub struct MlDecomposition {
    pub fit: f64,
    pub penalty: f64,
    pub constant: f64,
    /// `log|V_{t|t-1}|` for every observed period.
    pub log_det_pred: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlValue {
    pub log_ml: f64,
    pub decomposition: Option<MlDecomposition>,
}

fn log_ml_from(prior: &NiwParams, post: &NiwParams, n_obs: usize) -> Result<f64> {
    let n = prior.n_vars();
    let nf = n as f64;
    Ok(
        -(n_obs as f64 * nf / 2.0) * std::f64::consts::PI.ln() + ln_mvgamma(n, post.nu / 2.0)
            - ln_mvgamma(n, prior.nu / 2.0)
            + prior.nu / 2.0 * logdet_spd(&prior.s)?
            - post.nu / 2.0 * logdet_spd(&post.s)?
            + nf / 2.0 * (prior.logdet_k()? - post.logdet_k()?),
    )
}

/// log p(Y | λ, θ, γ) with (Φ, Σ) integrated out.
pub fn marginal_likelihood(design: &StaticDesign, prior: &NiwParams) -> Result<MlValue> {
    prior.factor()?;
    let post = conditional_posterior(design, prior)?;
    Ok(MlValue {
        log_ml: log_ml_from(prior, &post, design.n_obs())?,
        decomposition: None,
    })
}

/// Marginal likelihood split into a fit term, a complexity penalty built
/// from one-step predictive covariances, and a constant.
///
/// With `V_prior = S̿/(ν̿−N−1)` and `V_post = S̃/(T+ν̿−N−1)`:
/// fit = ((T+ν̿)/2)·log|V_prior V_post⁻¹|, penalty = −½ Σ_t log|V_{t|t−1}|
/// where `V_{t|t−1} = V_prior (1 + x̃_t' K_{t−1}⁻¹ x̃_t)` and `K_{t−1}` holds
/// the prior precision plus the data through `t−1`.
pub fn ml_decomposition(design: &StaticDesign, prior: &NiwParams) -> Result<MlValue> {
    let n = prior.n_vars();
    let nf = n as f64;
    let nu = prior.nu;
    if nu <= nf + 1.0 {
        return Err(Error::DofTooSmall { nu, n });
    }
    prior.factor()?;
    let post = conditional_posterior(design, prior)?;
    let total = log_ml_from(prior, &post, design.n_obs())?;
    let t_obs = design.n_obs() as f64;

    let q = predictive_factors(design, prior)?;
    let v_prior = &prior.s / (nu - nf - 1.0);
    let v_post = &post.s / (t_obs + nu - nf - 1.0);
    let ld_prior = logdet_spd(&v_prior)?;
    let ld_post = logdet_spd(&v_post)?;
    let fit = (t_obs + nu) / 2.0 * (ld_prior - ld_post);
    let log_det_pred: Vec<f64> = q.iter().map(|q| nf * (1.0 + q).ln() + ld_prior).collect();
    let penalty = -0.5 * log_det_pred.iter().sum::<f64>();
    let constant = -(t_obs * nf / 2.0) * std::f64::consts::PI.ln()
        + ln_mvgamma(n, (t_obs + nu) / 2.0)
        - ln_mvgamma(n, nu / 2.0)
        - nf * (t_obs + nu) / 2.0 * (t_obs + nu - nf - 1.0).ln()
        + nf * nu / 2.0 * (nu - nf - 1.0).ln();
    let dec = MlDecomposition {
        fit,
        penalty,
        constant,
        log_det_pred,
    };
    debug_assert!(
        (dec.fit + dec.penalty + dec.constant - total).abs() < 1e-6 * (1.0 + total.abs())
    );
    Ok(MlValue {
        log_ml: total,
        decomposition: Some(dec),
    })
}

/// `q_t = x̃_t' K_{t−1}⁻¹ x̃_t` for observed periods, by forward elimination of
/// the data-augmented blocks before `t` and backward elimination of the
/// prior-only blocks after `t`.
fn predictive_factors(design: &StaticDesign, prior: &NiwParams) -> Result<Vec<f64>> {
    let t_len = prior.periods();
    let kp = &prior.k;
    // backward Schur complements of the prior alone: b[s] for blocks s..T
    let mut b_inv: Vec<DMatrix<f64>> = vec![DMatrix::zeros(0, 0); t_len];
    for s in (0..t_len).rev() {
        let mut bs = kp.diag[s].clone();
        if s + 1 < t_len {
            let o = &kp.sub[s];
            bs -= o.transpose() * &b_inv[s + 1] * o;
        }
        b_inv[s] =
            inv_spd(&bs).map_err(|_| Error::CholeskyFailure(format!("backward block {s}")))?;
    }
    let mut q = Vec::with_capacity(design.n_obs());
    let mut c_inv: Option<DMatrix<f64>> = None;
    for t in 0..t_len {
        // Schur complement of block t in K_{t-1}
        let mut m = kp.diag[t].clone();
        if t > 0 {
            let o = &kp.sub[t - 1];
            m -= o * c_inv.as_ref().unwrap() * o.transpose();
        }
        let c_t = m.clone() + &design.xx[t];
        if t + 1 < t_len {
            let o = &kp.sub[t];
            m -= o.transpose() * &b_inv[t + 1] * o;
        }
        if design.observed[t] {
            let x = design.x.row(t).transpose();
            let mi =
                inv_spd(&m).map_err(|_| Error::CholeskyFailure(format!("predictive block {t}")))?;
            q.push((x.transpose() * mi * &x)[(0, 0)]);
        }
        c_inv =
            Some(inv_spd(&c_t).map_err(|_| Error::CholeskyFailure(format!("forward block {t}")))?);
    }
    Ok(q)
}
