//! Marginal likelihood over a (λ, γ) grid with its fit / penalty split,
//! on data simulated from the NK model.

use std::sync::Arc;

use rand::SeedableRng;
use tctvp::io::run::ml_grid_table;
use tctvp::posterior::StaticDesign;
use tctvp::sampler::{ModelMoments, TcModel};
use tctvp::theory::{simulate, NkModel, NkTheta};

fn main() -> tctvp::Result<()> {
    let (pre, p, t) = (20, 2, 100);
    let model = NkModel::new(vec![]);
    let th = NkTheta::reference();
    let sol = model.solve_theta(&th, pre + p + t)?;
    let data = simulate(
        &sol,
        pre + p + t,
        &mut rand_chacha::ChaCha8Rng::seed_from_u64(3),
    )?
    .obs;
    let design = StaticDesign::new(&data, p, pre)?;
    let tc = TcModel::new(
        design,
        Arc::new(ModelMoments {
            model: Arc::new(model),
            p,
        }),
    );
    let lambdas = [0.3, 1.0, 3.0, 10.0, 30.0];
    let gammas = [0.0, 0.3, 1.0, 3.0, 10.0];
    let rows = ml_grid_table(&tc, &lambdas, &gammas, &th.to_vec())?;
    println!(
        "{:>6} {:>6} {:>10} {:>10} {:>10}",
        "lambda", "gamma", "log ML", "fit", "penalty"
    );
    for r in &rows {
        let o = |v: Option<f64>| v.map_or("-".into(), |x| format!("{x:.2}"));
        println!(
            "{:>6} {:>6} {:>10.2} {:>10} {:>10}",
            r.0,
            r.1,
            r.2,
            o(r.3),
            o(r.4)
        );
    }
    let best = rows.iter().max_by(|a, b| a.2.total_cmp(&b.2)).unwrap();
    println!(
        "best: lambda {} gamma {} (log ML {:.2})",
        best.0, best.1, best.2
    );
    Ok(())
}
