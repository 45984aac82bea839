//! Posterior sampling of (λ, γ) with θ held at the reference calibration,
//! followed by conjugate draws of (Σ, Φ).

use std::sync::Arc;

use rand::SeedableRng;
use tctvp::posterior::StaticDesign;
use tctvp::sampler::{run_chains, ChainConfig, HyperPriors, ModelMoments, Prior, TcModel};
use tctvp::theory::{simulate, NkModel, NkTheta, NK_PARAM_NAMES};

fn main() -> tctvp::Result<()> {
    let (pre, p, t) = (20, 2, 80);
    let model = NkModel::new(vec![]);
    let th = NkTheta::reference().to_vec();
    let sol = model.solve_theta(&NkTheta::reference(), pre + p + t)?;
    let data = simulate(
        &sol,
        pre + p + t,
        &mut rand_chacha::ChaCha8Rng::seed_from_u64(8),
    )?
    .obs;
    let tc = TcModel::new(
        StaticDesign::new(&data, p, pre)?,
        Arc::new(ModelMoments {
            model: Arc::new(model),
            p,
        }),
    );
    let fixed: Vec<Prior> = th.iter().map(|&value| Prior::Fixed { value }).collect();
    let priors = HyperPriors {
        lambda: Prior::Gamma { mean: 5.0, sd: 5.0 },
        gamma: Prior::Gamma { mean: 2.0, sd: 2.0 },
        theta: fixed,
    };
    let cfg = ChainConfig {
        iterations: 4000,
        burn_in: 1000,
        thin: 5,
        seed: 1,
        ..Default::default()
    };
    let mut init = vec![5.0, 1.0];
    init.extend(&th);
    let mut store = run_chains(&tc, &priors, &cfg, &init, 2)?;
    store.theta_names = NK_PARAM_NAMES.iter().map(|s| s.to_string()).collect();
    println!("{} draws, acceptance {:?}", store.len(), store.acceptance);
    for (name, med, lo, hi) in store.summary().into_iter().take(2) {
        println!("{name:>8}: median {med:.3}  [{lo:.3}, {hi:.3}]");
    }
    let last = store.phi_at(store.len() - 1, t - 1);
    println!("last draw of Φ_T:\n{last:.3}");
    Ok(())
}
