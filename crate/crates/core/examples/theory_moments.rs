//! Population moments of the VAR(p) regressors implied by the NK model,
//! and the restriction function they induce inside and outside a peg.

use tctvp::theory::{theory_moments, NkModel, NkTheta, ZlbEpisode};

fn main() -> tctvp::Result<()> {
    let p = 2;
    let model = NkModel::new(vec![ZlbEpisode {
        start: 20,
        length: 8,
        horizon: 4,
    }]);
    let sol = model.solve_theta(&NkTheta::reference(), 40)?;
    let m = theory_moments(&sol, p, 40)?;
    let phi = m.restriction_path()?;
    let k = 1 + 3 * p;
    for t in [10usize, 24] {
        let tag = if model.in_zlb(t) { "in peg" } else { "no peg" };
        println!(
            "period {t} ({tag}): restriction function, rows = regressors, cols = (ygr, infl, int)"
        );
        println!("{:.3}", phi.rows(t * k, k));
        println!("mean of y: {:.3}", m.mean_y[t].transpose());
    }
    Ok(())
}
