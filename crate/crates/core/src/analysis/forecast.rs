//! Recursive out-of-sample forecasting.
//!
//! An origin is the index of the last data row a model may see; forecasts
//! for `h` are compared with row `origin + h`.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::score::{crps, mean, rmse};
use crate::baselines::{
    fit_flat_var, fit_minnesota, fit_std_tvpvar, ConstantNiw, MinnesotaSpec, StdTvpSpec, TvpPrior,
};
use crate::linalg::{chol, std_normal_vector};
use crate::posterior::{regressor, StaticDesign};
use crate::prior::NiwParams;
use crate::sampler::{chain_rng, ChainConfig, MomentsProvider, TcModel};
use crate::{Error, Result};

/// Produces predictive draws from data observed through the last row of `data`.
pub trait Forecaster: Send + Sync {
    fn name(&self) -> String;
    /// `n_draws` paths, each `horizon x N` (row `h − 1` is `y_{T+h}`).
    fn predictive(
        &self,
        data: &DMatrix<f64>,
        horizon: usize,
        n_draws: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<DMatrix<f64>>>;
}

/// Iterate a VAR forward from the end of `data` with coefficients
/// `coef(h)` (`k x N`) and shocks drawn from `N(0, Σ)`.
pub fn simulate_path<R: Rng + ?Sized>(
    data: &DMatrix<f64>,
    p: usize,
    horizon: usize,
    sigma_chol: Option<&DMatrix<f64>>,
    mut coef: impl FnMut(usize) -> DMatrix<f64>,
    rng: &mut R,
) -> DMatrix<f64> {
    let n = data.ncols();
    let rows = data.nrows();
    let mut ext = DMatrix::zeros(rows + horizon, n);
    ext.rows_mut(0, rows).copy_from(data);
    for h in 0..horizon {
        let r = rows + h;
        let x = regressor(&ext, r, p);
        let mut y = coef(h).transpose() * x;
        if let Some(a) = sigma_chol {
            y += a * std_normal_vector(rng, n);
        }
        ext.row_mut(r).copy_from(&y.transpose());
    }
    ext.rows(rows, horizon).into_owned()
}

fn constant_niw_paths(
    post: &ConstantNiw,
    data: &DMatrix<f64>,
    p: usize,
    horizon: usize,
    n_draws: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<DMatrix<f64>>> {
    (0..n_draws)
        .map(|_| {
            let (s, pi) = post.draw(rng)?;
            let a = chol(&s, "Σ draw")?;
            Ok(simulate_path(
                data,
                p,
                horizon,
                Some(&a),
                |_| pi.clone(),
                rng,
            ))
        })
        .collect()
}

pub struct FlatVarForecaster {
    pub p: usize,
    pub presample: usize,
}

impl Forecaster for FlatVarForecaster {
    fn name(&self) -> String {
        "flat-var".into()
    }

    fn predictive(
        &self,
        data: &DMatrix<f64>,
        horizon: usize,
        n_draws: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<DMatrix<f64>>> {
        let post = fit_flat_var(&StaticDesign::new(data, self.p, self.presample)?)?;
        constant_niw_paths(&post, data, self.p, horizon, n_draws, rng)
    }
}

pub struct MinnesotaForecaster {
    pub p: usize,
    pub presample: usize,
    pub spec: MinnesotaSpec,
}

impl Forecaster for MinnesotaForecaster {
    fn name(&self) -> String {
        "minnesota".into()
    }

    fn predictive(
        &self,
        data: &DMatrix<f64>,
        horizon: usize,
        n_draws: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<DMatrix<f64>>> {
        let post = fit_minnesota(
            &StaticDesign::new(data, self.p, self.presample)?,
            &self.spec,
        )?;
        constant_niw_paths(&post, data, self.p, horizon, n_draws, rng)
    }
}

/// Standard TVP-VAR: Gibbs on the origin's data, then coefficients
/// continue as random walks with the drawn state variances.
pub struct StdTvpForecaster {
    pub p: usize,
    pub presample: usize,
    pub spec: StdTvpSpec,
    pub chain: ChainConfig,
    /// Hold coefficients at their last in-sample value.
    pub freeze: bool,
}

impl Forecaster for StdTvpForecaster {
    fn name(&self) -> String {
        "std-tvp-var".into()
    }

    fn predictive(
        &self,
        data: &DMatrix<f64>,
        horizon: usize,
        n_draws: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<DMatrix<f64>>> {
        let design = StaticDesign::new(data, self.p, self.presample)?;
        let prior = TvpPrior::from_design(&design)?;
        let cfg = ChainConfig {
            seed: rng.random(),
            ..self.chain.clone()
        };
        let store = fit_std_tvpvar(&design, &self.spec, &prior, &cfg, 0)?;
        if store.phi.is_empty() {
            return Err(Error::EmptyRun);
        }
        let (t_len, k, n) = store.shape;
        let omegas = &store.extra["omega"];
        (0..n_draws)
            .map(|d| {
                let i = d % store.phi.len();
                let a = chol(&store.sigma[i], "Σ draw")?;
                let mut phi = store.phi_at(i, t_len - 1);
                let sd: Vec<f64> = omegas[i].iter().map(|w| w.sqrt()).collect();
                let freeze = self.freeze;
                let mut noise = Vec::with_capacity(horizon);
                for _ in 0..horizon {
                    noise.push(std_normal_vector(rng, n * k));
                }
                Ok(simulate_path(
                    data,
                    self.p,
                    horizon,
                    Some(&a),
                    |h| {
                        if !freeze {
                            for ii in 0..n {
                                for j in 0..k {
                                    phi[(j, ii)] += sd[ii * k + j] * noise[h][ii * k + j];
                                }
                            }
                        }
                        phi.clone()
                    },
                    rng,
                ))
            })
            .collect()
    }
}

/// How the TC forecaster picks `(λ, γ, θ)` at each origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum TcHyper {
    Fixed {
        lambda: f64,
        gamma: f64,
        theta: Vec<f64>,
    },
    /// Maximise the marginal likelihood over a grid with θ held fixed.
    MlGrid {
        lambdas: Vec<f64>,
        gammas: Vec<f64>,
        theta: Vec<f64>,
    },
    /// Cycle through previously sampled hyper-parameters.
    Draws { draws: Vec<(f64, f64, Vec<f64>)> },
}

/// Maximise the log marginal likelihood over `(λ, γ)`; returns `(λ, γ, log ML)`.
pub fn ml_grid_argmax(
    model: &TcModel,
    lambdas: &[f64],
    gammas: &[f64],
    theta: &[f64],
) -> Result<(f64, f64, f64)> {
    let grid = ml_grid(model, lambdas, gammas, theta)?;
    grid.into_iter()
        .filter(|g| g.2.is_finite())
        .max_by(|a, b| a.2.total_cmp(&b.2))
        .ok_or_else(|| Error::InvalidParameter("no finite marginal likelihood on the grid".into()))
}

/// `(λ, γ, log ML)` over the grid; failed points carry `-∞`.
pub fn ml_grid(
    model: &TcModel,
    lambdas: &[f64],
    gammas: &[f64],
    theta: &[f64],
) -> Result<Vec<(f64, f64, f64)>> {
    let m = model.moments(theta)?;
    let pts: Vec<(f64, f64)> = lambdas
        .iter()
        .flat_map(|&l| gammas.iter().map(move |&g| (l, g)))
        .collect();
    Ok(pts
        .into_par_iter()
        .map(|(l, g)| (l, g, model.log_ml(l, g, &m).unwrap_or(f64::NEG_INFINITY)))
        .collect())
}

/// Theory-coherent TVP-VAR. Future coefficients are drawn from the
/// posterior over `T + H` periods in which the last `H` periods carry no
/// data, so they follow the estimated law of motion including the theory
/// pull; `freeze` keeps `Φ_T` instead.
pub struct TcForecaster {
    pub p: usize,
    pub presample: usize,
    pub provider: Arc<dyn MomentsProvider>,
    pub hyper: TcHyper,
    pub freeze: bool,
}

impl TcForecaster {
    fn model(&self, data: &DMatrix<f64>, horizon: usize) -> Result<(TcModel, TcModel)> {
        let design = StaticDesign::new(data, self.p, self.presample)?;
        let t_len = design.periods();
        let ext_data = data.clone().resize_vertically(data.nrows() + horizon, 0.0);
        let ext = StaticDesign::new(&ext_data, self.p, self.presample)?;
        let mask = (0..t_len + horizon).map(|t| t < t_len).collect();
        let mut fit = TcModel::new(design, self.provider.clone());
        let mut fut = TcModel::new(ext.masked(mask), self.provider.clone());
        // identical prior pieces across the two horizons
        fut.s0 = fit.s0.clone();
        fut.first_block = fit.first_block.clone();
        fit.phi0 = fut.phi0.clone();
        Ok((fit, fut))
    }

    fn hypers(&self, fit: &TcModel) -> Result<Vec<(f64, f64, Vec<f64>)>> {
        Ok(match &self.hyper {
            TcHyper::Fixed {
                lambda,
                gamma,
                theta,
            } => vec![(*lambda, *gamma, theta.clone())],
            TcHyper::MlGrid {
                lambdas,
                gammas,
                theta,
            } => {
                let (l, g, _) = ml_grid_argmax(fit, lambdas, gammas, theta)?;
                vec![(l, g, theta.clone())]
            }
            TcHyper::Draws { draws } => {
                if draws.is_empty() {
                    return Err(Error::EmptyRun);
                }
                draws.clone()
            }
        })
    }
}

impl Forecaster for TcForecaster {
    fn name(&self) -> String {
        "tc-tvp-var".into()
    }

    fn predictive(
        &self,
        data: &DMatrix<f64>,
        horizon: usize,
        n_draws: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<DMatrix<f64>>> {
        let (fit, fut) = self.model(data, horizon)?;
        let hypers = self.hypers(&fit)?;
        let t_len = fit.periods();
        let k = fit.design.k();
        let per = n_draws.div_ceil(hypers.len());
        let mut posts: Vec<NiwParams> = Vec::new();
        let used = hypers.len().min(n_draws);
        for (l, g, th) in hypers.iter().take(used) {
            let m = fut.moments(th)?;
            posts.push(fut.posterior(*l, *g, &m)?);
        }
        let mut out = Vec::with_capacity(n_draws);
        'outer: for post in &posts {
            for _ in 0..per {
                if out.len() == n_draws {
                    break 'outer;
                }
                let (s, phi) = post.draw(rng)?;
                let a = chol(&s, "Σ draw")?;
                let freeze = self.freeze;
                out.push(simulate_path(
                    data,
                    self.p,
                    horizon,
                    Some(&a),
                    |h| {
                        let t = if freeze { t_len - 1 } else { t_len + h };
                        phi.rows(t * k, k).into_owned()
                    },
                    rng,
                ));
            }
        }
        Ok(out)
    }
}

/// How a horizon `h` is scored.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HorizonMode {
    /// Value in quarter `h`.
    #[default]
    Point,
    /// Average over quarters `1..=h`.
    Average,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ForecastRecord {
    pub model: String,
    pub origin: usize,
    pub horizon: usize,
    pub variable: usize,
    pub draws: Vec<f64>,
    /// `NaN` when the realisation lies beyond the data.
    pub realized: f64,
}

impl ForecastRecord {
    pub fn point(&self) -> f64 {
        mean(&self.draws)
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ForecastRun {
    pub variables: Vec<String>,
    pub horizons: Vec<usize>,
    pub origins: Vec<usize>,
    pub records: Vec<ForecastRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoreRow {
    pub model: String,
    pub variable: String,
    pub horizon: usize,
    pub rmse: f64,
    pub crps: f64,
    pub n: usize,
}

/// Fit every model at every origin on rows `0..=origin` and collect
/// predictive draws for the requested horizons.
pub fn recursive_forecast(
    models: &[&dyn Forecaster],
    data: &DMatrix<f64>,
    variables: &[String],
    origins: &[usize],
    horizons: &[usize],
    mode: HorizonMode,
    n_draws: usize,
    seed: u64,
) -> Result<ForecastRun> {
    let h_max = horizons.iter().copied().max().unwrap_or(0);
    if h_max == 0 || origins.is_empty() || models.is_empty() {
        return Err(Error::EmptyRun);
    }
    if let Some(o) = origins.iter().find(|&&o| o >= data.nrows()) {
        return Err(Error::InsufficientData(format!(
            "origin {o} beyond the {} data rows",
            data.nrows()
        )));
    }
    let jobs: Vec<(usize, usize)> = (0..models.len())
        .flat_map(|m| origins.iter().map(move |&o| (m, o)))
        .collect();
    let parts: Vec<Result<Vec<ForecastRecord>>> = jobs
        .par_iter()
        .map(|&(mi, o)| {
            let mut rng = chain_rng(seed, ((mi as u64) << 32) | o as u64);
            let seen = data.rows(0, o + 1).into_owned();
            let paths = models[mi].predictive(&seen, h_max, n_draws, &mut rng)?;
            let mut recs = Vec::new();
            for &h in horizons {
                let first = match mode {
                    HorizonMode::Point => h,
                    HorizonMode::Average => 1,
                };
                let w = (h - first + 1) as f64;
                for v in 0..data.ncols() {
                    let realized = if o + h < data.nrows() {
                        (first..=h).map(|j| data[(o + j, v)]).sum::<f64>() / w
                    } else {
                        f64::NAN
                    };
                    recs.push(ForecastRecord {
                        model: models[mi].name(),
                        origin: o,
                        horizon: h,
                        variable: v,
                        draws: paths
                            .iter()
                            .map(|p| (first..=h).map(|j| p[(j - 1, v)]).sum::<f64>() / w)
                            .collect(),
                        realized,
                    });
                }
            }
            Ok(recs)
        })
        .collect();
    let mut records = Vec::new();
    for p in parts {
        records.extend(p?);
    }
    Ok(ForecastRun {
        variables: variables.to_vec(),
        horizons: horizons.to_vec(),
        origins: origins.to_vec(),
        records,
    })
}

/// RMSE of the predictive mean and average CRPS, per model, variable and horizon.
pub fn score(run: &ForecastRun) -> Result<Vec<ScoreRow>> {
    let mut keys: Vec<(String, usize, usize)> = run
        .records
        .iter()
        .map(|r| (r.model.clone(), r.variable, r.horizon))
        .collect();
    keys.sort();
    keys.dedup();
    let mut rows = Vec::new();
    for (model, v, h) in keys {
        let recs: Vec<&ForecastRecord> = run
            .records
            .iter()
            .filter(|r| {
                r.model == model && r.variable == v && r.horizon == h && r.realized.is_finite()
            })
            .collect();
        if recs.is_empty() {
            continue;
        }
        let errs: Vec<f64> = recs.iter().map(|r| r.point() - r.realized).collect();
        let cr: Vec<f64> = recs.iter().map(|r| crps(&r.draws, r.realized)).collect();
        rows.push(ScoreRow {
            model,
            variable: run
                .variables
                .get(v)
                .cloned()
                .unwrap_or_else(|| format!("y{v}")),
            horizon: h,
            rmse: rmse(&errs)?,
            crps: mean(&cr),
            n: recs.len(),
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyRun);
    }
    Ok(rows)
}

pub fn write_scores(rows: &[ScoreRow], path: &std::path::Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["model", "variable", "horizon", "rmse", "crps", "n"])?;
    for r in rows {
        w.write_record([
            r.model.clone(),
            r.variable.clone(),
            r.horizon.to_string(),
            r.rmse.to_string(),
            r.crps.to_string(),
            r.n.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Known-coefficient AR/VAR forecaster, mainly for checks.
pub struct KnownVar {
    pub p: usize,
    pub coef: DMatrix<f64>,
    pub sigma: Option<DMatrix<f64>>,
}

impl Forecaster for KnownVar {
    fn name(&self) -> String {
        "known".into()
    }

    fn predictive(
        &self,
        data: &DMatrix<f64>,
        horizon: usize,
        n_draws: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<DMatrix<f64>>> {
        let a = self.sigma.as_ref().map(|s| chol(s, "Σ")).transpose()?;
        Ok((0..n_draws)
            .map(|_| {
                simulate_path(
                    data,
                    self.p,
                    horizon,
                    a.as_ref(),
                    |_| self.coef.clone(),
                    rng,
                )
            })
            .collect())
    }
}

/// Predictive mean of `y_{T+h}` under constant coefficients without shocks.
pub fn point_path(
    data: &DMatrix<f64>,
    p: usize,
    coef: &DMatrix<f64>,
    horizon: usize,
) -> DMatrix<f64> {
    let mut rng = chain_rng(0, 0);
    simulate_path(data, p, horizon, None, |_| coef.clone(), &mut rng)
}
