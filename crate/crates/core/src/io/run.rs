//! Subcommand orchestration: every command writes into its own
//! timestamped directory with a `meta.json`.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{emit_csv, ingest, RunConfig, TimeSeriesPanel};
use crate::analysis::{
    irf, recursive_forecast, score, write_scores, FlatVarForecaster, Forecaster,
    MinnesotaForecaster, StdTvpForecaster, TcForecaster, TcHyper,
};
use crate::posterior::{build_design, ml_decomposition, StaticDesign};
use crate::sampler::{chain_rng, run_chains, DrawStore, ModelMoments, MomentsProvider, TcModel};
use crate::theory::{simulate, NkModel, TheoryModel, ZlbEpisode, NK_PARAM_NAMES};
use crate::{Error, Result};

pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

/// Inputs shared by all subcommands.
#[derive(Clone, Debug)]
pub struct RunContext {
    pub config: RunConfig,
    pub data: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    pub chains: usize,
}

impl RunContext {
    pub fn new(config: RunConfig) -> Self {
        let out = config.output.dir.clone();
        let data = config.data.path.clone();
        let seed = config.sampler.seed;
        Self {
            config,
            data,
            out,
            seed,
            chains: 1,
        }
    }

    pub fn config_hash(&self) -> String {
        hex::encode(Sha256::digest(self.config.canonical().as_bytes()))
    }

    pub fn panel(&self) -> Result<TimeSeriesPanel> {
        let path = self
            .data
            .as_ref()
            .ok_or_else(|| Error::Config("no data file given (--data or data.path)".into()))?;
        let mut panel = ingest(path, &self.config.data.transforms)?;
        let n = panel.n_vars();
        if !self.config.data.nonstationary.is_empty() {
            if self.config.data.nonstationary.len() != n {
                return Err(Error::Config(format!(
                    "{} nonstationary flags for {n} series",
                    self.config.data.nonstationary.len()
                )));
            }
            panel.nonstationary = self.config.data.nonstationary.clone();
        }
        panel.presample = self.config.data.presample;
        Ok(panel)
    }

    /// Row of the panel holding the first estimation period.
    pub fn offset(&self) -> usize {
        self.config.data.presample + self.config.var.p
    }

    /// NK model with the configured calendar, expressed in panel rows and
    /// moved to estimation periods.
    pub fn theory(&self) -> NkModel {
        NkModel {
            calendar: estimation_calendar(&self.config.theory.zlb, self.offset()),
            zlb_meas_var: self.config.theory.zlb_meas_var,
        }
    }

    pub fn provider(&self) -> Arc<dyn MomentsProvider> {
        Arc::new(ModelMoments {
            model: Arc::new(self.theory()),
            p: self.config.var.p,
        })
    }

    pub fn tc_model(&self, design: StaticDesign) -> Result<TcModel> {
        let mut m = TcModel::new(design, self.provider());
        if let Some(rows) = &self.config.prior.phi0 {
            let (k, n) = m.phi0.shape();
            if rows.len() != k || rows.iter().any(|r| r.len() != n) {
                return Err(Error::Config(format!(
                    "prior.phi0 must be {k} rows of {n} values"
                )));
            }
            m.phi0 = DMatrix::from_fn(k, n, |i, j| rows[i][j]);
        }
        Ok(m)
    }
}

/// Shift episodes given in data rows to periods counted from `offset`,
/// trimming the part that falls before it.
pub fn estimation_calendar(zlb: &[ZlbEpisode], offset: usize) -> Vec<ZlbEpisode> {
    zlb.iter()
        .filter_map(|e| {
            let end = e.start + e.length;
            (end > offset).then(|| {
                let start = e.start.max(offset);
                ZlbEpisode {
                    start: start - offset,
                    length: end - start,
                    horizon: e.horizon,
                }
            })
        })
        .collect()
}

#[derive(Serialize)]
pub struct RunMeta {
    pub subcommand: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub chains: usize,
    pub started_unix: u64,
    pub wall_clock_seconds: f64,
    pub data: Option<PathBuf>,
    pub config: RunConfig,
    pub details: serde_json::Value,
}

pub struct RunDir {
    pub path: PathBuf,
    started: Instant,
    unix: u64,
}

impl RunDir {
    /// `<base>/<command>-<unix seconds>[-n]`.
    pub fn create(base: &Path, command: &str) -> Result<Self> {
        let unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        std::fs::create_dir_all(base)?;
        let mut path = base.join(format!("{command}-{unix}"));
        let mut i = 1;
        while path.exists() {
            path = base.join(format!("{command}-{unix}-{i}"));
            i += 1;
        }
        std::fs::create_dir_all(&path)?;
        Ok(Self {
            path,
            started: Instant::now(),
            unix,
        })
    }

    pub fn finish(
        &self,
        ctx: &RunContext,
        command: &str,
        details: serde_json::Value,
    ) -> Result<()> {
        let meta = RunMeta {
            subcommand: command.into(),
            version: VERSION.into(),
            config_hash: ctx.config_hash(),
            seed: ctx.seed,
            chains: ctx.chains,
            started_unix: self.unix,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            data: ctx.data.clone(),
            config: ctx.config.clone(),
            details,
        };
        std::fs::write(
            self.path.join("meta.json"),
            serde_json::to_string_pretty(&meta)?,
        )?;
        Ok(())
    }
}

/// Simulate the theory at the configured θ; writes `data.csv`.
pub fn cmd_simulate(ctx: &RunContext) -> Result<PathBuf> {
    let dir = RunDir::create(&ctx.out, "simulate")?;
    let n = ctx.config.simulate.periods;
    let model = NkModel {
        calendar: ctx.config.theory.zlb.clone(),
        zlb_meas_var: ctx.config.theory.zlb_meas_var,
    };
    let sol = model.solve(&ctx.config.theory.theta(), n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let path = simulate(&sol, n, &mut rng)?;
    let panel =
        TimeSeriesPanel::from_matrix(path.obs, vec!["ygr".into(), "infl".into(), "int".into()], 0);
    emit_csv(&panel, std::fs::File::create(dir.path.join("data.csv"))?)?;
    dir.finish(ctx, "simulate", serde_json::json!({ "periods": n }))?;
    Ok(dir.path)
}

/// Full posterior simulation; draws go to `<run>/draws`.
pub fn cmd_estimate(ctx: &RunContext) -> Result<PathBuf> {
    let panel = ctx.panel()?;
    let design = build_design(&panel, ctx.config.var.p)?;
    let model = ctx.tc_model(design)?;
    let priors = ctx.config.hyper_priors();
    let mut init = vec![ctx.config.prior.init_lambda, ctx.config.prior.init_gamma];
    init.extend(ctx.config.theory.theta());
    let cfg = crate::sampler::ChainConfig {
        seed: ctx.seed,
        ..ctx.config.sampler.clone()
    };
    let dir = RunDir::create(&ctx.out, "estimate")?;
    let mut store = run_chains(&model, &priors, &cfg, &init, ctx.chains)?;
    store.theta_names = NK_PARAM_NAMES.iter().map(|s| s.to_string()).collect();
    store.save(&dir.path.join("draws"))?;
    dir.finish(
        ctx,
        "estimate",
        serde_json::json!({
            "draws": store.len(),
            "acceptance": store.acceptance.iter().map(|a| a.map(|x| x.is_finite().then_some(x))).collect::<Vec<_>>(),
            "warnings": store.warnings,
            "rejections": store.rejections,
        }),
    )?;
    Ok(dir.path)
}

fn load_store(run: &Path) -> Result<DrawStore> {
    let d = run.join("draws");
    DrawStore::load(if d.exists() { &d } else { run })
}

/// Hyper-parameter draws thinned to at most `max` evenly spaced entries.
fn hyper_draws(store: &DrawStore, max: usize) -> Vec<(f64, f64, Vec<f64>)> {
    let n = store.lambda.len();
    let step = n.div_ceil(max.max(1)).max(1);
    (0..n)
        .step_by(step)
        .map(|i| (store.lambda[i], store.gamma[i], store.theta[i].clone()))
        .collect()
}

/// Recursive forecasts and their scores.
pub fn cmd_forecast(ctx: &RunContext, from: Option<&Path>) -> Result<PathBuf> {
    let fc = &ctx.config.forecast;
    let panel = ctx.panel()?;
    let p = ctx.config.var.p;
    let presample = ctx.config.data.presample;
    let rows = panel.n_rows();
    let last = fc.last_origin.unwrap_or(rows.saturating_sub(2));
    let first = fc.first_origin.unwrap_or(last.saturating_sub(20));
    if first > last || last >= rows {
        return Err(Error::Config(format!(
            "forecast origins {first}..={last} do not fit {rows} rows"
        )));
    }
    let origins: Vec<usize> = (first..=last).collect();
    let tc_hyper = match (from, &fc.tc) {
        (Some(run), _) => TcHyper::Draws {
            draws: hyper_draws(&load_store(run)?, 50),
        },
        (None, Some(h)) => h.clone(),
        (None, None) => TcHyper::MlGrid {
            lambdas: ctx.config.ml_grid.lambdas.clone(),
            gammas: ctx.config.ml_grid.gammas.clone(),
            theta: ctx.config.theory.theta(),
        },
    };
    let mut models: Vec<Box<dyn Forecaster>> = Vec::new();
    for name in &fc.models {
        models.push(match name.as_str() {
            "tc-tvp-var" => Box::new(TcForecaster {
                p,
                presample,
                provider: ctx.provider(),
                hyper: tc_hyper.clone(),
                freeze: fc.freeze,
            }),
            "std-tvp-var" => Box::new(StdTvpForecaster {
                p,
                presample,
                spec: ctx.config.std_tvp.clone(),
                chain: fc.std_tvp_chain.clone(),
                freeze: fc.freeze,
            }),
            "minnesota" => {
                let mut spec = ctx.config.minnesota.clone();
                if spec.nonstationary.is_empty() {
                    spec.nonstationary = panel.nonstationary.clone();
                }
                Box::new(MinnesotaForecaster { p, presample, spec })
            }
            _ => Box::new(FlatVarForecaster { p, presample }),
        });
    }
    let refs: Vec<&dyn Forecaster> = models.iter().map(|m| m.as_ref()).collect();
    let dir = RunDir::create(&ctx.out, "forecast")?;
    let run = recursive_forecast(
        &refs,
        &panel.values,
        &panel.names,
        &origins,
        &fc.horizons,
        fc.horizon_mode,
        fc.draws,
        ctx.seed,
    )?;
    let rows_out = score(&run)?;
    write_scores(&rows_out, &dir.path.join("scores.csv"))?;
    let mut w = csv::Writer::from_path(dir.path.join("forecasts.csv"))?;
    w.write_record([
        "model", "origin", "horizon", "variable", "mean", "q10", "q90", "realized",
    ])?;
    for r in &run.records {
        w.write_record([
            r.model.clone(),
            panel.dates[r.origin].clone(),
            r.horizon.to_string(),
            panel.names[r.variable].clone(),
            r.point().to_string(),
            crate::sampler::store::quantile(&r.draws, 0.1).to_string(),
            crate::sampler::store::quantile(&r.draws, 0.9).to_string(),
            r.realized.to_string(),
        ])?;
    }
    w.flush()?;
    dir.finish(
        ctx,
        "forecast",
        serde_json::json!({ "origins": origins.len(), "from": from }),
    )?;
    Ok(dir.path)
}

/// Theory-identified impulse responses at the configured reference rows.
pub fn cmd_irf(ctx: &RunContext, from: Option<&Path>) -> Result<PathBuf> {
    let ic = &ctx.config.irf;
    let panel = ctx.panel()?;
    let p = ctx.config.var.p;
    let design = build_design(&panel, p)?;
    let t_len = design.periods();
    let offset = ctx.offset();
    let dates: Vec<usize> = if ic.dates.is_empty() {
        vec![panel.n_rows() - 1]
    } else {
        ic.dates.clone()
    };
    let periods: Vec<usize> = dates
        .iter()
        .map(|&d| {
            d.checked_sub(offset).filter(|t| *t < t_len).ok_or_else(|| {
                Error::Config(format!("irf date row {d} outside the estimation sample"))
            })
        })
        .collect::<Result<_>>()?;
    let store = match from {
        Some(run) => load_store(run)?,
        None => {
            let model = ctx.tc_model(design)?;
            let theta = ctx.config.theory.theta();
            let post = model.posterior(ic.lambda, ic.gamma, &model.moments(&theta)?)?;
            let mut rng = chain_rng(ctx.seed, 0);
            let mut s = DrawStore {
                model: "tc-tvp-var".into(),
                shape: (t_len, model.design.k(), model.design.n_vars()),
                ..Default::default()
            };
            for _ in 0..ic.draws {
                let (sg, ph) = post.draw(&mut rng)?;
                s.sigma.push(sg);
                s.phi.push(ph);
                s.theta.push(theta.clone());
            }
            s
        }
    };
    if store.phi.is_empty() {
        return Err(Error::EmptyRun);
    }
    let theory = ctx.theory();
    let sols: Vec<_> = (0..store.phi.len())
        .into_par_iter()
        .map(|i| {
            let th = store
                .theta
                .get(i)
                .cloned()
                .unwrap_or_else(|| ctx.config.theory.theta());
            theory.solve(&th, t_len)
        })
        .collect::<Result<_>>()?;
    let mut res = irf(
        &store,
        p,
        |i, d| Ok(sols[i].impact(d as isize)),
        &periods,
        ic.horizon,
        &ic.cumulative,
    )?;
    res.variables = panel.names.clone();
    res.shocks = vec!["e_r".into(), "e_g".into(), "e_z".into()];
    let dir = RunDir::create(&ctx.out, "irf")?;
    let labels: Vec<String> = (0..t_len)
        .map(|t| panel.dates[t + offset].clone())
        .collect();
    res.write_csv(&dir.path.join("irf.csv"), &labels)?;
    dir.finish(
        ctx,
        "irf",
        serde_json::json!({ "draws": store.phi.len(), "dates": dates, "from": from }),
    )?;
    Ok(dir.path)
}

/// Marginal likelihood and its decomposition over the configured grid at fixed θ.
pub fn cmd_ml_grid(ctx: &RunContext) -> Result<PathBuf> {
    let panel = ctx.panel()?;
    let model = ctx.tc_model(build_design(&panel, ctx.config.var.p)?)?;
    let rows = ml_grid_table(
        &model,
        &ctx.config.ml_grid.lambdas,
        &ctx.config.ml_grid.gammas,
        &ctx.config.theory.theta(),
    )?;
    let dir = RunDir::create(&ctx.out, "ml-grid")?;
    write_ml_grid(&rows, &dir.path.join("ml_grid.csv"))?;
    dir.finish(ctx, "ml-grid", serde_json::json!({ "points": rows.len() }))?;
    Ok(dir.path)
}

/// One grid point: `(λ, γ, log ML, fit, penalty, constant)`; components
/// are `None` where the decomposition is undefined.
pub type GridRow = (f64, f64, f64, Option<f64>, Option<f64>, Option<f64>);

pub fn ml_grid_table(
    model: &TcModel,
    lambdas: &[f64],
    gammas: &[f64],
    theta: &[f64],
) -> Result<Vec<GridRow>> {
    let m = model.moments(theta)?;
    let pts: Vec<(f64, f64)> = lambdas
        .iter()
        .flat_map(|&l| gammas.iter().map(move |&g| (l, g)))
        .collect();
    pts.into_par_iter()
        .map(|(l, g)| {
            let prior = model.prior(l, g, &m)?;
            let ml = crate::posterior::marginal_likelihood(&model.design, &prior)?.log_ml;
            Ok(match ml_decomposition(&model.design, &prior) {
                Ok(v) => {
                    let d = v.decomposition.expect("decomposition present");
                    (l, g, ml, Some(d.fit), Some(d.penalty), Some(d.constant))
                }
                Err(Error::DofTooSmall { .. }) => (l, g, ml, None, None, None),
                Err(e) => return Err(e),
            })
        })
        .collect()
}

pub fn write_ml_grid(rows: &[GridRow], path: &Path) -> Result<()> {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["lambda", "gamma", "log_ml", "fit", "penalty", "constant"])?;
    for r in rows {
        w.write_record([
            r.0.to_string(),
            r.1.to_string(),
            r.2.to_string(),
            opt(r.3),
            opt(r.4),
            opt(r.5),
        ])?;
    }
    w.flush()?;
    Ok(())
}
