//! Draws from the theory-coherent prior for a few (λ, γ) settings: small λ
//! lets coefficients wander, large γ pins them to the theory.

use nalgebra::DMatrix;
use rand::SeedableRng;
use tctvp::prior::{rw_prior, theory_update, LambdaSpec};
use tctvp::theory::{theory_moments, NkModel, NkTheta};

fn main() -> tctvp::Result<()> {
    let (p, t) = (1, 60);
    let sol = NkModel::new(vec![]).solve_theta(&NkTheta::reference(), t)?;
    let m = theory_moments(&sol, p, t)?;
    let k = 1 + 3 * p;
    let target = m.restriction_path()?[(1, 0)];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    println!("own-lag coefficient of output growth, theory value {target:.3}");
    println!(
        "{:>8} {:>8} {:>10} {:>10} {:>10}",
        "lambda", "gamma", "mean", "sd(t)", "|Δ| mean"
    );
    for (lam, gam) in [
        (1.0, 0.0),
        (10.0, 0.0),
        (1.0, 1.0),
        (10.0, 10.0),
        (0.0, 10.0),
    ] {
        let rw = rw_prior(
            &LambdaSpec::scalar(lam),
            &DMatrix::zeros(k, 3),
            &DMatrix::identity(3, 3),
            5.0,
            t,
        )?;
        let prior = theory_update(&rw, &m, gam)?;
        let (_, phi) = prior.draw(&mut rng)?;
        let path: Vec<f64> = (0..t).map(|s| phi[(s * k + 1, 0)]).collect();
        let mean = path.iter().sum::<f64>() / t as f64;
        let sd = (path.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / t as f64).sqrt();
        let inc = path.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() / (t - 1) as f64;
        println!("{lam:>8} {gam:>8} {mean:>10.3} {sd:>10.3} {inc:>10.3}");
    }
    Ok(())
}
