//! Posterior simulation of `(Φ, Σ, λ, γ, θ)`.
//!
//! The hyper-parameters are drawn by a two-block random-walk Metropolis
//! sampler on the closed-form marginal posterior; `(Σ, Φ)` are then drawn
//! exactly from their conjugate posterior.

mod priors;
pub mod store;

pub use priors::{nk_prior_table, Prior, Transform};
pub use store::DrawStore;

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::posterior::{conditional_posterior, marginal_likelihood, StaticDesign};
use crate::prior::{
    ar_residual_variances, presample_first_block, rw_prior, theory_update, LambdaSpec, NiwParams,
};
use crate::theory::{theory_moments, TheoryModel, TheoryMoments};
use crate::{Error, Result};

/// Source of population moments as a function of θ.
pub trait MomentsProvider: Send + Sync {
    fn moments(&self, theta: &[f64], t_len: usize) -> Result<TheoryMoments>;
}

/// Moments that do not depend on θ.
pub struct FixedMoments(pub TheoryMoments);

impl MomentsProvider for FixedMoments {
    fn moments(&self, _theta: &[f64], t_len: usize) -> Result<TheoryMoments> {
        if t_len > self.0.len() {
            return Err(Error::Dimension(format!(
                "{} fixed moment periods, {t_len} requested",
                self.0.len()
            )));
        }
        let mut m = self.0.clone();
        m.gxx.truncate(t_len);
        m.gxy.truncate(t_len);
        m.gyy.truncate(t_len);
        m.mean_y.truncate(t_len);
        Ok(m)
    }
}

/// Moments from solving a theory at θ.
pub struct ModelMoments {
    pub model: Arc<dyn TheoryModel>,
    pub p: usize,
}

impl MomentsProvider for ModelMoments {
    fn moments(&self, theta: &[f64], t_len: usize) -> Result<TheoryMoments> {
        let sol = self.model.solve(theta, t_len)?;
        theory_moments(&sol, self.p, t_len)
    }
}

/// Everything needed to evaluate `p(Y | λ, γ, θ)` and the conditional posterior.
#[derive(Clone)]
pub struct TcModel {
    pub design: StaticDesign,
    pub phi0: DMatrix<f64>,
    pub s0: DMatrix<f64>,
    pub nu0: f64,
    pub first_block: Option<DMatrix<f64>>,
    pub provider: Arc<dyn MomentsProvider>,
}

impl TcModel {
    /// Defaults: `Φ₀ = 0`, `S̲` from pre-sample AR(4) residual variances,
    /// `ν̲ = N + 2`, first-period precision from the pre-sample regressors.
    pub fn new(design: StaticDesign, provider: Arc<dyn MomentsProvider>) -> Self {
        let n = design.n_vars();
        let k = design.k();
        let s0 = DMatrix::from_diagonal(&presample_variances(&design));
        let first_block = presample_first_block(&design.presample_x);
        if first_block.is_none() {
            log::warn!("pre-sample shorter than k = {k}; first-period precision falls back to λ²I");
        }
        Self {
            phi0: DMatrix::zeros(k, n),
            s0,
            nu0: n as f64 + 2.0,
            first_block,
            design,
            provider,
        }
    }

    pub fn periods(&self) -> usize {
        self.design.periods()
    }

    pub fn lambda_spec(&self, lambda: f64) -> LambdaSpec {
        LambdaSpec {
            lambda: crate::prior::Lambda::Scalar(lambda),
            first_block: self.first_block.clone(),
        }
    }

    pub fn moments(&self, theta: &[f64]) -> Result<TheoryMoments> {
        self.provider.moments(theta, self.periods())
    }

    pub fn prior(&self, lambda: f64, gamma: f64, moments: &TheoryMoments) -> Result<NiwParams> {
        let rw = rw_prior(
            &self.lambda_spec(lambda),
            &self.phi0,
            &self.s0,
            self.nu0,
            self.periods(),
        )?;
        theory_update(&rw, moments, gamma)
    }

    pub fn log_ml(&self, lambda: f64, gamma: f64, moments: &TheoryMoments) -> Result<f64> {
        let pr = self.prior(lambda, gamma, moments)?;
        Ok(marginal_likelihood(&self.design, &pr)?.log_ml)
    }

    pub fn posterior(&self, lambda: f64, gamma: f64, moments: &TheoryMoments) -> Result<NiwParams> {
        conditional_posterior(&self.design, &self.prior(lambda, gamma, moments)?)
    }
}

/// Pre-sample AR(4) residual variances; without a usable pre-sample the
/// estimation sample is used instead.
pub fn presample_variances(design: &StaticDesign) -> nalgebra::DVector<f64> {
    const LAGS: usize = 4;
    if design.presample_y.nrows() >= 2 * LAGS + 2 {
        ar_residual_variances(&design.presample_y, LAGS)
    } else {
        log::warn!("pre-sample too short for AR({LAGS}) variances; using the estimation sample");
        ar_residual_variances(&design.y, LAGS)
    }
}

/// Priors for the hyper-parameters and the deep parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperPriors {
    pub lambda: Prior,
    pub gamma: Prior,
    pub theta: Vec<Prior>,
}

impl HyperPriors {
    /// Flat priors on `(0, 1e10)` for λ and γ.
    pub fn flat(theta: Vec<Prior>) -> Self {
        let u = Prior::Uniform { lo: 0.0, hi: 1e10 };
        Self {
            lambda: u,
            gamma: u,
            theta,
        }
    }

    fn all(&self) -> Vec<Prior> {
        let mut v = vec![self.lambda, self.gamma];
        v.extend(self.theta.iter().cloned());
        v
    }

    pub fn ln_pdf(&self, x: &[f64]) -> f64 {
        self.all().iter().zip(x).map(|(p, v)| p.ln_pdf(*v)).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChainConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Initial proposal scale (transformed units) for the (λ, γ) block.
    pub scale_hyper: f64,
    /// Initial proposal scale for the θ block.
    pub scale_theta: f64,
    pub adapt: bool,
    pub target_accept: f64,
    /// Draw and keep (Σ, Φ) at every saved iteration.
    pub store_draws: bool,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            iterations: 20_000,
            burn_in: 10_000,
            thin: 10,
            seed: 0,
            scale_hyper: 0.5,
            scale_theta: 0.05,
            adapt: true,
            target_accept: 0.25,
            store_draws: true,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.iterations
            || self.thin == 0
            || self.scale_hyper <= 0.0
            || self.scale_theta <= 0.0
        {
            return Err(Error::Config(
                "chain needs burn_in < iterations, thin ≥ 1 and positive scales".into(),
            ));
        }
        Ok(())
    }

    pub fn n_saved(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }
}

/// Metropolis log acceptance ratio for a symmetric proposal.
pub fn log_accept_ratio(current: f64, proposed: f64) -> f64 {
    if proposed.is_nan() || proposed == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    proposed - current
}

fn theta_key(theta: &[f64]) -> Vec<u64> {
    theta.iter().map(|v| v.to_bits()).collect()
}

/// Chain state evaluator with a θ-keyed moment cache.
struct Evaluator<'a> {
    model: &'a TcModel,
    priors: &'a HyperPriors,
    cache: HashMap<Vec<u64>, Arc<TheoryMoments>>,
    rejections: usize,
}

impl<'a> Evaluator<'a> {
    fn moments(&mut self, theta: &[f64]) -> Result<Arc<TheoryMoments>> {
        let key = theta_key(theta);
        if let Some(m) = self.cache.get(&key) {
            return Ok(m.clone());
        }
        let m = Arc::new(self.model.moments(theta)?);
        if self.cache.len() >= 64 {
            self.cache.clear();
        }
        self.cache.insert(key, m.clone());
        Ok(m)
    }

    /// (log posterior kernel, log ML); −∞ outside the support or on theory failure.
    fn log_post(&mut self, x: &[f64]) -> (f64, f64) {
        let lp = self.priors.ln_pdf(x);
        if !lp.is_finite() {
            return (f64::NEG_INFINITY, f64::NAN);
        }
        let res = self
            .moments(&x[2..])
            .and_then(|m| self.model.log_ml(x[0], x[1], &m));
        match res {
            Ok(ml) if ml.is_finite() => (ml + lp, ml),
            Ok(_) | Err(_) => {
                if let Err(e) = res {
                    log::debug!("proposal rejected: {e}");
                }
                self.rejections += 1;
                (f64::NEG_INFINITY, f64::NAN)
            }
        }
    }
}

struct Block {
    idx: Vec<usize>,
    log_scale: f64,
    base: Vec<f64>,
    accepted: usize,
    tried: usize,
    accepted_post: usize,
    tried_post: usize,
}

impl Block {
    fn new(idx: Vec<usize>, scale: f64, base: Vec<f64>) -> Self {
        Self {
            idx,
            log_scale: scale.ln(),
            base,
            accepted: 0,
            tried: 0,
            accepted_post: 0,
            tried_post: 0,
        }
    }

    fn rate(&self) -> f64 {
        if self.tried_post == 0 {
            f64::NAN
        } else {
            self.accepted_post as f64 / self.tried_post as f64
        }
    }
}

/// Output of the hyper-parameter sampler before (Σ, Φ) draws.
struct HyperRun {
    saved: Vec<(Vec<f64>, f64)>,
    blocks: [f64; 2],
    rejections: usize,
}

fn sample_hyper_inner(
    model: &TcModel,
    priors: &HyperPriors,
    cfg: &ChainConfig,
    init: &[f64],
    rng: &mut ChaCha8Rng,
    mut on_save: impl FnMut(&[f64], f64, &mut ChaCha8Rng) -> Result<()>,
) -> Result<HyperRun> {
    cfg.validate()?;
    let all = priors.all();
    if init.len() != all.len() {
        return Err(Error::Dimension(format!(
            "initial point has {} entries, priors {}",
            init.len(),
            all.len()
        )));
    }
    let tr: Vec<Transform> = all.iter().map(|p| p.transform()).collect();
    let mut ev = Evaluator {
        model,
        priors,
        cache: HashMap::new(),
        rejections: 0,
    };
    let mut x = init.to_vec();
    for (i, p) in all.iter().enumerate() {
        if let Prior::Fixed { value } = p {
            x[i] = *value;
        }
    }
    let (mut lp, mut ml) = ev.log_post(&x);
    if !lp.is_finite() {
        return Err(Error::InvalidParameter(
            "initial hyper-parameters have zero posterior density".into(),
        ));
    }
    let jac = |x: &[f64], idx: &[usize]| -> f64 {
        idx.iter()
            .map(|&i| tr[i].log_jacobian(tr[i].forward(x[i])))
            .sum()
    };
    let free =
        |r: std::ops::Range<usize>| -> Vec<usize> { r.filter(|&i| !all[i].is_fixed()).collect() };
    let mut blocks = [
        Block::new(free(0..2), cfg.scale_hyper, vec![1.0; 2]),
        Block::new(free(2..all.len()), cfg.scale_theta, vec![1.0; all.len()]),
    ];
    let mut saved = Vec::with_capacity(cfg.n_saved());
    for it in 0..cfg.iterations {
        for b in blocks.iter_mut() {
            if b.idx.is_empty() {
                continue;
            }
            let scale = b.log_scale.exp();
            let mut prop = x.clone();
            for &i in &b.idx {
                let u =
                    tr[i].forward(x[i]) + scale * b.base[i] * rng.sample::<f64, _>(StandardNormal);
                prop[i] = tr[i].inverse(u);
            }
            let (lp_new, ml_new) = ev.log_post(&prop);
            let log_a = log_accept_ratio(lp + jac(&x, &b.idx), lp_new + jac(&prop, &b.idx));
            let accept = log_a >= 0.0 || rng.random::<f64>().ln() < log_a;
            if accept {
                x = prop;
                lp = lp_new;
                ml = ml_new;
            }
            if it < cfg.burn_in {
                b.tried += 1;
                b.accepted += accept as usize;
                if cfg.adapt {
                    let step = (it as f64 + 1.0).powf(-0.6);
                    b.log_scale += step * (accept as u8 as f64 - cfg.target_accept);
                }
            } else {
                b.tried_post += 1;
                b.accepted_post += accept as usize;
            }
        }
        if it >= cfg.burn_in && (it - cfg.burn_in + 1).is_multiple_of(cfg.thin) {
            on_save(&x, ml, rng)?;
            saved.push((x.clone(), ml));
        }
    }
    Ok(HyperRun {
        saved,
        blocks: [blocks[0].rate(), blocks[1].rate()],
        rejections: ev.rejections,
    })
}

/// Hyper-parameter chain: returns the saved `(λ, γ, θ…)` vectors with their log ML.
pub fn sample_hyper(
    model: &TcModel,
    priors: &HyperPriors,
    cfg: &ChainConfig,
    init: &[f64],
) -> Result<Vec<(Vec<f64>, f64)>> {
    let mut rng = chain_rng(cfg.seed, 0);
    Ok(sample_hyper_inner(model, priors, cfg, init, &mut rng, |_, _, _| Ok(()))?.saved)
}

/// One exact draw of `(Σ, Φ)` from a conjugate posterior.
pub fn draw_sigma_phi<R: Rng + ?Sized>(
    posterior: &NiwParams,
    rng: &mut R,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    posterior.draw(rng)
}

/// Independent stream `chain` of the generator seeded with `seed`.
pub fn chain_rng(seed: u64, chain: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(chain);
    r
}

/// Run one chain and collect its draws.
pub fn run_chain(
    model: &TcModel,
    priors: &HyperPriors,
    cfg: &ChainConfig,
    init: &[f64],
    chain: usize,
) -> Result<DrawStore> {
    let mut rng = chain_rng(cfg.seed, chain as u64);
    let mut store = DrawStore::new("tc-tvp-var", cfg);
    let t = model.periods();
    let k = model.design.k();
    let n = model.design.n_vars();
    store.shape = (t, k, n);
    let mut phis = Vec::new();
    let mut sigmas = Vec::new();
    let run = sample_hyper_inner(model, priors, cfg, init, &mut rng, |x, _, rng| {
        if cfg.store_draws {
            let m = model.moments(&x[2..])?;
            let post = model.posterior(x[0], x[1], &m)?;
            let (s, p) = draw_sigma_phi(&post, rng)?;
            sigmas.push(s);
            phis.push(p);
        }
        Ok(())
    })?;
    for (x, ml) in run.saved {
        store.lambda.push(x[0]);
        store.gamma.push(x[1]);
        store.theta.push(x[2..].to_vec());
        store.log_ml.push(ml);
        store.chain.push(chain);
    }
    store.phi = phis;
    store.sigma = sigmas;
    store.acceptance.push(run.blocks);
    store.rejections += run.rejections;
    for (name, r) in ["lambda-gamma", "theta"].iter().zip(run.blocks) {
        if r.is_finite() && !(0.1..=0.5).contains(&r) {
            let msg = format!("chain {chain}: {name} block acceptance {r:.3} outside [0.1, 0.5]");
            log::warn!("{msg}");
            store.warnings.push(msg);
        }
    }
    Ok(store)
}

/// Run `n_chains` chains in parallel with independent streams and merge them.
pub fn run_chains(
    model: &TcModel,
    priors: &HyperPriors,
    cfg: &ChainConfig,
    init: &[f64],
    n_chains: usize,
) -> Result<DrawStore> {
    use rayon::prelude::*;
    let stores: Vec<Result<DrawStore>> = (0..n_chains.max(1))
        .into_par_iter()
        .map(|c| run_chain(model, priors, cfg, init, c))
        .collect();
    let mut it = stores.into_iter();
    let mut merged = it.next().unwrap()?;
    for s in it {
        merged.merge(s?);
    }
    Ok(merged)
}
