//! Solve the small NK model at the reference calibration and compare
//! responses to a demand shock with and without an announced 4-quarter peg.

use tctvp::theory::{build_nk_system, solve_re, NkModel, NkTheta, ZlbEpisode};

fn main() -> tctvp::Result<()> {
    let th = NkTheta::reference();
    let base = solve_re(&build_nk_system(&th))?;
    let radius = base
        .t
        .clone()
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    println!("baseline spectral radius {radius:.4}");

    let free = NkModel::new(vec![]).solve_theta(&th, 12)?;
    let pegged = NkModel::new(vec![ZlbEpisode {
        start: 0,
        length: 4,
        horizon: 4,
    }])
    .solve_theta(&th, 12)?;
    println!("response to e_g (states y, pi, R)");
    println!("{:>3} {:>27} {:>27}", "h", "no peg", "4-quarter peg");
    let (mut a, mut b) = (
        free.at(0).r.column(1).into_owned(),
        pegged.at(0).r.column(1).into_owned(),
    );
    for h in 0..8 {
        if h > 0 {
            a = &free.at(h).t * &a;
            b = &pegged.at(h).t * &b;
        }
        let fmt = |v: &nalgebra::DVector<f64>| {
            (0..3)
                .map(|i| format!("{:>8.3}", v[i]))
                .collect::<Vec<_>>()
                .join(" ")
        };
        println!("{h:>3} {} {}", fmt(&a), fmt(&b));
    }
    Ok(())
}
