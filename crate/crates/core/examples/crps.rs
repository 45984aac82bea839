//! CRPS of a Gaussian forecast by the draw-based estimator against the
//! closed form, and the point-mass case.

use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use tctvp::analysis::crps;

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    let (mu, sd, y): (f64, f64, f64) = (0.5, 1.3, 1.7);
    let z = (y - mu) / sd;
    let pdf = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let cdf = 0.5 * (1.0 + libm::erf(z / std::f64::consts::SQRT_2));
    let exact = sd * (z * (2.0 * cdf - 1.0) + 2.0 * pdf - 1.0 / std::f64::consts::PI.sqrt());
    for m in [100, 1_000, 10_000, 100_000] {
        let draws: Vec<f64> = Normal::new(mu, sd)
            .unwrap()
            .sample_iter(&mut rng)
            .take(m)
            .collect();
        println!(
            "{m:>7} draws: {:.5} (closed form {exact:.5})",
            crps(&draws, y)
        );
    }
    println!("point mass at 2.0, y = 1.7: {:.5}", crps(&[2.0; 10], y));
}
