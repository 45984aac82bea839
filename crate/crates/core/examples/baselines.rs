//! The three comparison models fitted to the same simulated sample.

use rand::SeedableRng;
use tctvp::baselines::{
    fit_flat_var, fit_minnesota, fit_std_tvpvar, MinnesotaSpec, StdTvpSpec, TvpPrior,
};
use tctvp::posterior::StaticDesign;
use tctvp::sampler::ChainConfig;
use tctvp::theory::{simulate, NkModel, NkTheta};

fn main() -> tctvp::Result<()> {
    let (pre, p, t) = (20, 2, 100);
    let sol = NkModel::new(vec![]).solve_theta(&NkTheta::reference(), pre + p + t)?;
    let data = simulate(
        &sol,
        pre + p + t,
        &mut rand_chacha::ChaCha8Rng::seed_from_u64(6),
    )?
    .obs;
    let design = StaticDesign::new(&data, p, pre)?;

    let flat = fit_flat_var(&design)?;
    println!("flat VAR posterior mean:\n{:.3}", flat.mean);
    let minn = fit_minnesota(&design, &MinnesotaSpec::default())?;
    println!("Minnesota posterior mean:\n{:.3}", minn.mean);

    let cfg = ChainConfig {
        iterations: 1500,
        burn_in: 500,
        thin: 5,
        seed: 3,
        ..Default::default()
    };
    let store = fit_std_tvpvar(
        &design,
        &StdTvpSpec::default(),
        &TvpPrior::from_design(&design)?,
        &cfg,
        0,
    )?;
    let k = design.k();
    let own: Vec<f64> = (0..store.len())
        .map(|i| store.phi_at(i, t - 1)[(1, 0)])
        .collect();
    let mean = own.iter().sum::<f64>() / own.len() as f64;
    let omega = &store.extra["omega"];
    let om = omega
        .iter()
        .map(|v| v.iter().sum::<f64>() / v.len() as f64)
        .sum::<f64>()
        / omega.len() as f64;
    println!("standard TVP-VAR: {} draws, k = {k}, final own-lag output coefficient {mean:.3}, mean state variance {om:.2e}", store.len());
    Ok(())
}
