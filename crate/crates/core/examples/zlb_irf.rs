//! Theory-identified responses to a demand shock before and during a
//! ZLB episode, from TC-TVP-VAR posterior draws at the ML-optimal λ.

use std::sync::Arc;

use rand::SeedableRng;
use tctvp::analysis::irf;
use tctvp::posterior::StaticDesign;
use tctvp::sampler::{chain_rng, DrawStore, ModelMoments, TcModel};
use tctvp::theory::{simulate, NkModel, NkTheta, ZlbEpisode};

fn main() -> tctvp::Result<()> {
    let (pre, p, t) = (20, 2, 139);
    let model = NkModel::new(vec![ZlbEpisode {
        start: 96,
        length: 28,
        horizon: 4,
    }]);
    let th = NkTheta::reference();
    let sol = model.solve_theta(&th, t)?;
    let data = simulate(
        &model.shifted(pre + p).solve_theta(&th, pre + p + t)?,
        pre + p + t,
        &mut rand_chacha::ChaCha8Rng::seed_from_u64(4),
    )?
    .obs;
    let design = StaticDesign::new(&data, p, pre)?;
    let tc = TcModel::new(
        design.clone(),
        Arc::new(ModelMoments {
            model: Arc::new(model),
            p,
        }),
    );
    let mom = tc.moments(&th.to_vec())?;
    let gamma = 100.0;
    let lambda = [0.1, 0.3, 1.0, 3.0, 10.0]
        .into_iter()
        .max_by(|a, b| {
            tc.log_ml(*a, gamma, &mom)
                .unwrap_or(f64::MIN)
                .total_cmp(&tc.log_ml(*b, gamma, &mom).unwrap_or(f64::MIN))
        })
        .unwrap();
    let post = tc.posterior(lambda, gamma, &mom)?;
    let mut rng = chain_rng(2, 0);
    let mut store = DrawStore {
        shape: (t, design.k(), design.n_vars()),
        ..Default::default()
    };
    for _ in 0..300 {
        let (s, f) = post.draw(&mut rng)?;
        store.sigma.push(s);
        store.phi.push(f);
    }
    let dates = [60, 110];
    let res = irf(
        &store,
        p,
        |_, d| Ok(sol.impact(d as isize)),
        &dates,
        8,
        &[true, false, false],
    )?;
    println!("cumulative output response to e_g, gamma {gamma}, lambda {lambda}");
    println!(
        "{:>2} {:>26} {:>26}",
        "h", "period 60 (q10 q50 q90)", "period 110 (in ZLB)"
    );
    for h in 0..=8 {
        let (a, b) = (res.band(0, 0, 1, h), res.band(1, 0, 1, h));
        println!(
            "{h:>2} {:>8.3}{:>9.3}{:>9.3} {:>8.3}{:>9.3}{:>9.3}",
            a.0, a.1, a.2, b.0, b.1, b.2
        );
    }
    Ok(())
}
