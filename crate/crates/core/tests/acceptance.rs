//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the lines appear in order.
//! Exit status is non-zero if any criterion fails.

mod common;

use std::sync::Arc;
use std::time::Instant;

use common::*;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use tctvp::analysis::{
    crps, irf, recursive_forecast, score, Forecaster, HorizonMode, StdTvpForecaster, TcForecaster,
    TcHyper,
};
use tctvp::baselines::{fit_std_tvpvar, StdTvpSpec, TvpPrior};
use tctvp::posterior::{conditional_posterior, marginal_likelihood, StaticDesign};
use tctvp::prior::{integrating_constant, rw_prior, theory_update, Lambda, LambdaSpec, NiwParams};
use tctvp::sampler::{
    chain_rng, run_chains, ChainConfig, DrawStore, FixedMoments, HyperPriors, ModelMoments, Prior,
    TcModel,
};
use tctvp::theory::{
    build_nk_system, build_peg_system, simulate, solve_anticipated, solve_re, theory_moments,
    NkModel, NkTheta, ReSystem, StateSpaceSolution, TheoryMoments, ZlbEpisode,
};

struct Line {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn line(id: &'static str, pass: bool, detail: String) -> Line {
    Line { id, pass, detail }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

fn nk_data(model: &NkModel, lead: usize, t: usize, seed: u64) -> DMatrix<f64> {
    let sol = model
        .shifted(lead)
        .solve_theta(&NkTheta::reference(), lead + t)
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate(&sol, lead + t, &mut rng).unwrap().obs
}

// ---------------------------------------------------------------- 1

fn a1() -> Vec<Line> {
    let start = Instant::now();
    let mut worst_kf = 0.0f64;
    let mut worst_ml = 0.0f64;
    let mut worst_nu = 0.0f64;
    for inst in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + inst);
        let n = rng.random_range(1..=3usize);
        let p = if n == 1 {
            rng.random_range(1..=3usize)
        } else {
            1
        };
        let k = 1 + n * p;
        let t = rng.random_range(1..=10usize);
        let data = normal_matrix(&mut rng, t + p, n);
        let mut design = StaticDesign::new(&data, p, 0).unwrap();
        if rng.random::<f64>() < 0.3 {
            let mask: Vec<bool> = (0..t).map(|_| rng.random::<f64>() > 0.25).collect();
            design = design.masked(mask);
        }
        let lam: Vec<f64> = (0..k).map(|_| rng.random_range(0.3..3.0)).collect();
        let mut spec = if rng.random::<bool>() {
            LambdaSpec::scalar(lam[0])
        } else {
            LambdaSpec {
                lambda: Lambda::PerRegressor(lam.clone()),
                first_block: None,
            }
        };
        if rng.random::<bool>() {
            spec = spec.with_first_block(random_spd(&mut rng, k, 0.5));
        }
        let step_prec = spec.gram(k).unwrap();
        let first_prec = spec.first(k).unwrap();
        let phi0 = normal_matrix(&mut rng, k, n) * 0.3;
        let s = random_spd(&mut rng, n, 1.0);
        let nu = n as f64 + 1.0 + rng.random_range(0.5..4.0);
        let gamma = if rng.random::<f64>() < 0.3 {
            0.0
        } else {
            rng.random_range(0.1..3.0)
        };
        let moments = random_moments(&mut rng, t, k, n);

        let rw = rw_prior(&spec, &phi0, &s, nu, t).unwrap();
        let tc = theory_update(&rw, &moments, gamma).unwrap();
        let post = conditional_posterior(&design, &tc).unwrap();
        let ml = marginal_likelihood(&design, &tc).unwrap().log_ml;

        let pseudo = pseudo_rows(&moments, gamma);
        let kf = kalman_smoother(
            &design,
            &pseudo,
            &phi0,
            &first_prec.clone().try_inverse().unwrap(),
            &step_prec.clone().try_inverse().unwrap(),
            &s,
        );
        let sel = post.factor().unwrap().selected_inverse();
        for b in 0..t {
            worst_kf = worst_kf.max(rel_err(&post.block(b), &kf.mean[b]));
            worst_kf = worst_kf.max(rel_err(&sel.diag[b], &kf.cov[b]));
        }
        worst_kf = worst_kf.max(rel_err(&post.s, &kf.s));
        let nu_expect = nu + gamma * t as f64 + design.n_obs() as f64;
        worst_nu = worst_nu.max((post.nu - nu_expect).abs());

        let dense = DenseNiw::random_walk(&phi0, &first_prec, &step_prec, &s, nu, t);
        let dense = dense_theory_update(&dense, &pseudo, gamma);
        let seq = sequential_log_ml(&design, &dense);
        worst_ml = worst_ml.max((seq - ml).abs() / (1.0 + ml.abs()));
    }
    let secs = start.elapsed().as_secs_f64();
    vec![
        line(
            "A1.kalman",
            worst_kf < 1e-8 && worst_nu < 1e-12,
            format!(
                "max rel err vs Kalman smoother {worst_kf:.2e} (tol 1e-8), dof err {worst_nu:.1e}"
            ),
        ),
        line(
            "A1.sequential",
            worst_ml < 1e-6,
            format!("max rel err vs sequential predictive {worst_ml:.2e} (tol 1e-6)"),
        ),
        line("A1.runtime", secs < 60.0, format!("{secs:.1}s (limit 60s)")),
    ]
}

// ---------------------------------------------------------------- 2

fn a2() -> Vec<Line> {
    let start = Instant::now();
    let p = 2;
    let t = 100;
    let model = NkModel::new(vec![ZlbEpisode {
        start: 60,
        length: 12,
        horizon: 4,
    }]);
    let data = nk_data(&model, p, t, 7);
    let design = StaticDesign::new(&data, p, 0).unwrap();
    let sol = model.solve_theta(&NkTheta::reference(), t).unwrap();
    let moments = theory_moments(&sol, p, t).unwrap();
    let target = moments.restriction_path().unwrap();
    let k = design.k();
    let n = design.n_vars();
    let s0 = DMatrix::identity(n, n);
    let rw = rw_prior(
        &LambdaSpec::scalar(1.0),
        &DMatrix::zeros(k, n),
        &s0,
        n as f64 + 2.0,
        t,
    )
    .unwrap();
    let post = conditional_posterior(&design, &theory_update(&rw, &moments, 1e8).unwrap()).unwrap();
    let dev = max_abs(&(&post.m - &target)) / max_abs(&target);

    let spec = LambdaSpec::scalar(1e6).with_first_block(DMatrix::identity(k, k) * 1e-8);
    let rw = rw_prior(&spec, &DMatrix::zeros(k, n), &s0, n as f64 + 2.0, t).unwrap();
    let post = conditional_posterior(&design, &rw).unwrap();
    let mut inc = 0.0f64;
    for b in 1..t {
        inc = inc.max(max_abs(&(post.block(b) - post.block(b - 1))));
    }
    let ols = (design.x.transpose() * &design.x).try_inverse().unwrap()
        * design.x.transpose()
        * &design.y;
    let mut ols_dev = 0.0f64;
    for b in 0..t {
        ols_dev = ols_dev.max(max_abs(&(post.block(b) - &ols)));
    }
    let ols_rel = ols_dev / (1.0 + max_abs(&ols));
    let secs = start.elapsed().as_secs_f64();
    vec![
        line("A2.gamma-limit", dev < 1e-3, format!("‖Φ̃ − Φ*‖∞/‖Φ*‖∞ = {dev:.2e} at γ = 1e8 (tol 1e-3)")),
        line("A2.lambda-limit", inc < 1e-6 && ols_rel < 1e-4, format!("max increment {inc:.2e} (tol 1e-6), distance to pooled OLS {ols_rel:.2e} (tol 1e-4)")),
        line("A2.runtime", secs < 60.0, format!("{secs:.1}s (limit 60s)")),
    ]
}

// ---------------------------------------------------------------- 3

fn a3() -> Vec<Line> {
    let cases = [
        (0.0, 1.5, 1.2, 3.5, 0.5),
        (0.3, 0.7, 0.4, 5.0, 2.0),
        (-0.2, 2.0, 2.5, 4.2, 7.3),
        (0.5, 1.0, 1.0, 3.0, 0.05),
    ];
    let mut worst = 0.0f64;
    for (i, &(phi0, lam, s, nu, gamma)) in cases.iter().enumerate() {
        let gxx = 1.0 + 0.3 * i as f64;
        let gxy = 0.6 - 0.2 * i as f64;
        let gyy = gxy * gxy / gxx + 0.4 + 0.1 * i as f64;
        let m = TheoryMoments {
            gxx: vec![DMatrix::from_element(1, 1, gxx)],
            gxy: vec![DMatrix::from_element(1, 1, gxy)],
            gyy: vec![DMatrix::from_element(1, 1, gyy)],
            mean_y: vec![DVector::zeros(1)],
        };
        let rw = rw_prior(
            &LambdaSpec::scalar(lam),
            &DMatrix::from_element(1, 1, phi0),
            &DMatrix::from_element(1, 1, s),
            nu,
            1,
        )
        .unwrap();
        let tc = theory_update(&rw, &m, gamma).unwrap();
        let lib = integrating_constant(&rw, &tc, gamma, 1, 1).unwrap();
        let quad = scalar_constant_quadrature(phi0, lam * lam, s, nu, gxx, gxy, gyy, gamma);
        worst = worst.max(((lib - quad).exp() - 1.0).abs());
    }
    vec![line(
        "A3.integrating-constant",
        worst < 1e-5,
        format!("max relative error vs 2-D quadrature {worst:.2e} (tol 1e-5)"),
    )]
}

// ---------------------------------------------------------------- 4

fn a4() -> Vec<Line> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let n = 4;
    let g0 = random_spd(&mut rng, n, 2.0);
    let g1 = normal_matrix(&mut rng, n, n) * 0.2;
    let gc = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let psi = normal_matrix(&mut rng, n, 2);
    let sol = solve_re(&ReSystem::backward(
        g0.clone(),
        g1.clone(),
        gc.clone(),
        psi.clone(),
    ))
    .unwrap();
    let lu = g0.clone().lu();
    let err = max_abs(&(&sol.t - lu.solve(&g1).unwrap()))
        .max(max_abs(&(&sol.r - lu.solve(&psi).unwrap())))
        .max((&sol.c - lu.solve(&gc).unwrap()).amax());
    out.push(line(
        "A4.backward-identity",
        err < 1e-12,
        format!("max deviation from Γ0⁻¹(Γ1, Ψ, Γc) {err:.1e}"),
    ));

    let th = NkTheta::reference();
    let base_sys = build_nk_system(&th);
    let det = solve_re(&base_sys);
    let msg = match &det {
        Ok(_) => "unique stable solution".to_string(),
        Err(e) => e.to_string(),
    };
    out.push(line(
        "A4.nk-determinacy",
        det.is_ok(),
        format!("NK model at the reference θ: {msg}"),
    ));
    let Ok(base) = det else { return out };

    let len = 400;
    let mut worst = 0.0f64;
    for shock in 0..3 {
        let mut e = vec![DVector::zeros(3); len];
        e[0][shock] = 1.0;
        let pf = perfect_foresight(
            &vec![base_sys.clone(); len],
            &DVector::zeros(6),
            &e,
            &DVector::zeros(6),
        );
        let mut s = base.r.column(shock).into_owned();
        for pf_h in pf.iter().take(41) {
            worst = worst.max((&s - pf_h).amax());
            s = &base.t * s;
        }
    }
    out.push(line(
        "A4.irf-oracle",
        worst < 1e-6,
        format!(
            "max |IRF − stacked perfect-foresight path| over 40 horizons {worst:.1e} (tol 1e-6)"
        ),
    ));

    // fully anticipated 4-quarter peg from period 0
    let model = NkModel::new(vec![ZlbEpisode {
        start: 0,
        length: 4,
        horizon: 4,
    }]);
    let ss = model.solve_theta(&th, 40).unwrap();
    let peg = build_peg_system(&th);
    let mut systems = vec![peg.clone(); 4];
    systems.extend(vec![base_sys.clone(); len - 4]);
    let pf = perfect_foresight(
        &systems,
        &DVector::zeros(6),
        &vec![DVector::zeros(3); len],
        &DVector::zeros(6),
    );
    let mut s = DVector::zeros(6);
    let mut path_err = 0.0f64;
    let mut rate_err = 0.0f64;
    for j in 0..40 {
        let law = ss.at(j as isize);
        s = &law.c + &law.t * &s;
        path_err = path_err.max((&s - &pf[j]).amax());
        if j < 4 {
            rate_err = rate_err.max((ss.d[2] + (&ss.b * &s)[2]).abs());
        }
    }
    // rolling peg with shocks: the pegged observable stays at zero
    let rolling = NkModel::new(vec![ZlbEpisode {
        start: 5,
        length: 10,
        horizon: 4,
    }]);
    let rs = rolling.solve_theta(&th, 30).unwrap();
    let mut st = DVector::zeros(6);
    for j in 0..30 {
        let law = rs.at(j as isize);
        let e = DVector::from_fn(3, |_, _| rng.sample::<f64, _>(StandardNormal))
            .component_mul(&rs.omega.map(f64::sqrt));
        st = &law.c + &law.t * &st + &law.r * e;
        if rolling.in_zlb(j) {
            rate_err = rate_err.max((rs.d[2] + (&rs.b * &st)[2]).abs());
        }
    }
    out.push(line("A4.peg", rate_err < 1e-8 && path_err < 1e-8, format!("pegged rate error {rate_err:.1e}, anticipated path vs perfect foresight {path_err:.1e} (tol 1e-8)")));

    let zero = solve_anticipated(&[base_sys.clone()], &base).unwrap();
    let d0 = max_abs(&(&zero[0].t - &base.t))
        .max(max_abs(&(&zero[0].r - &base.r)))
        .max(zero[0].c.amax());
    out.push(line(
        "A4.zero-horizon",
        d0 < 1e-10,
        format!("H̄ = 0 baseline path vs terminal solution {d0:.1e} (tol 1e-10)"),
    ));

    out
}

// ---------------------------------------------------------------- 5

fn multiple_comparison(z: &[f64]) -> (bool, usize, f64) {
    let over = z.iter().filter(|v| **v > 3.0).count();
    let max = z.iter().cloned().fold(0.0f64, f64::max);
    let allowed = (z.len() as f64 * 0.01).ceil() as usize + 1;
    (over <= allowed && max < 5.0, over, max)
}

fn a5() -> Vec<Line> {
    let start = Instant::now();
    let p = 2;
    let t = 16;
    let model = NkModel::new(vec![ZlbEpisode {
        start: 6,
        length: 6,
        horizon: 4,
    }]);
    let sol = model.solve_theta(&NkTheta::reference(), t).unwrap();
    let mom = theory_moments(&sol, p, t).unwrap();
    let n = 3;
    let k = 1 + n * p;
    let paths = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let w = k + n;
    let mut sum = vec![DMatrix::<f64>::zeros(w, w); t];
    let mut sq = vec![DMatrix::<f64>::zeros(w, w); t];
    for _ in 0..paths {
        let obs = simulate(&sol, t, &mut rng).unwrap().obs;
        for j in p..t {
            let mut z = DVector::zeros(w);
            z[0] = 1.0;
            for l in 1..=p {
                for i in 0..n {
                    z[1 + (l - 1) * n + i] = obs[(j - l, i)];
                }
            }
            for i in 0..n {
                z[k + i] = obs[(j, i)];
            }
            let o = &z * z.transpose();
            sq[j] += o.component_mul(&o);
            sum[j] += o;
        }
    }
    let m = paths as f64;
    let mut z = Vec::new();
    let mut exact_err = 0.0f64;
    for j in p..t {
        let mut g = DMatrix::zeros(w, w);
        g.view_mut((0, 0), (k, k)).copy_from(&mom.gxx[j]);
        g.view_mut((0, k), (k, n)).copy_from(&mom.gxy[j]);
        g.view_mut((k, 0), (n, k))
            .copy_from(&mom.gxy[j].transpose());
        g.view_mut((k, k), (n, n)).copy_from(&mom.gyy[j]);
        for a in 0..w {
            for b in a..w {
                let mean = sum[j][(a, b)] / m;
                let var = (sq[j][(a, b)] / m - mean * mean) * m / (m - 1.0);
                let se = (var.max(0.0) / m).sqrt();
                if se < 1e-12 * (1.0 + mean.abs()) {
                    exact_err = exact_err.max((mean - g[(a, b)]).abs());
                } else {
                    z.push((mean - g[(a, b)]).abs() / se);
                }
            }
        }
    }
    let (ok, over, zmax) = multiple_comparison(&z);
    let min_eig = (0..t)
        .map(|j| mom.gxx[j].clone().symmetric_eigen().eigenvalues.min())
        .fold(f64::INFINITY, f64::min);
    let secs = start.elapsed().as_secs_f64();
    vec![
        line(
            "A5.moments",
            ok && exact_err < 1e-10,
            format!("{} entries through a ZLB window: {over} beyond 3 SE (allowed 1% + 1), max |z| {zmax:.2} (< 5)", z.len()),
        ),
        line("A5.gxx-pd", min_eig > 0.0, format!("min eigenvalue of Γxx,t over the window {min_eig:.2e}")),
        line("A5.runtime", secs < 300.0, format!("{secs:.1}s (limit 300s)")),
    ]
}

// ---------------------------------------------------------------- 6

fn toy_model() -> TcModel {
    let t = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let rho = 0.6;
    let mut y = DMatrix::zeros(t + 1 + 12, 1);
    for r in 1..y.nrows() {
        y[(r, 0)] = 0.5 + rho * y[(r - 1, 0)] + rng.sample::<f64, _>(StandardNormal);
    }
    let design = StaticDesign::new(&y, 1, 12).unwrap();
    // theory: AR(1) with mean 1.25, persistence 0.5, unit innovations
    let (mu, phi) = (1.25, 0.5);
    let v = 1.0 / (1.0 - phi * phi);
    let gxx = DMatrix::from_row_slice(2, 2, &[1.0, mu, mu, v + mu * mu]);
    let gxy = DMatrix::from_row_slice(2, 1, &[mu, phi * v + mu * mu]);
    let gyy = DMatrix::from_element(1, 1, v + mu * mu);
    let m = TheoryMoments {
        gxx: vec![gxx; t],
        gxy: vec![gxy; t],
        gyy: vec![gyy; t],
        mean_y: vec![DVector::from_element(1, mu); t],
    };
    TcModel::new(design, Arc::new(FixedMoments(m)))
}

fn toy_priors() -> HyperPriors {
    HyperPriors {
        lambda: Prior::Gamma { mean: 2.0, sd: 2.0 },
        gamma: Prior::Gamma { mean: 1.0, sd: 1.0 },
        theta: vec![],
    }
}

fn a6() -> Vec<Line> {
    let mut out = Vec::new();
    let model = toy_model();
    let priors = toy_priors();
    let m = model.moments(&[]).unwrap();

    // grid oracle on (ln λ, ln γ)
    let g = 300;
    let (u_lo, u_hi, v_lo, v_hi) = (-6.0, 5.0, -9.0, 5.0);
    let du = (u_hi - u_lo) / g as f64;
    let dv = (v_hi - v_lo) / g as f64;
    let mut logp = vec![0.0; g * g];
    for i in 0..g {
        let u = u_lo + (i as f64 + 0.5) * du;
        for j in 0..g {
            let v = v_lo + (j as f64 + 0.5) * dv;
            let (l, gm) = (u.exp(), v.exp());
            logp[i * g + j] = model.log_ml(l, gm, &m).unwrap()
                + priors.lambda.ln_pdf(l)
                + priors.gamma.ln_pdf(gm)
                + u
                + v;
        }
    }
    let mx = logp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut dens: Vec<f64> = logp.iter().map(|x| (x - mx).exp()).collect();
    let tot: f64 = dens.iter().sum();
    dens.iter_mut().for_each(|x| *x /= tot);
    let edge_mass: f64 = (0..g)
        .map(|i| dens[i * g] + dens[i * g + g - 1] + dens[i] + dens[(g - 1) * g + i])
        .sum();
    let marg = |axis: usize| -> Vec<f64> {
        (0..g)
            .map(|a| {
                (0..g)
                    .map(|b| {
                        if axis == 0 {
                            dens[a * g + b]
                        } else {
                            dens[b * g + a]
                        }
                    })
                    .sum()
            })
            .collect()
    };
    let cuts = |mg: Vec<f64>, lo: f64, d: f64| -> Vec<f64> {
        let mut c = Vec::new();
        let mut acc = 0.0;
        let mut next = 1;
        for (i, w) in mg.iter().enumerate() {
            acc += w;
            while next < 8 && acc >= next as f64 / 8.0 {
                c.push(lo + (i as f64 + 1.0) * d);
                next += 1;
            }
        }
        c
    };
    let cu = cuts(marg(0), u_lo, du);
    let cv = cuts(marg(1), v_lo, dv);
    let bin = |c: &[f64], x: f64| c.iter().filter(|b| x >= **b).count();
    let mut oracle = [[0.0; 8]; 8];
    for i in 0..g {
        for j in 0..g {
            let u = u_lo + (i as f64 + 0.5) * du;
            let v = v_lo + (j as f64 + 0.5) * dv;
            oracle[bin(&cu, u)][bin(&cv, v)] += dens[i * g + j];
        }
    }

    let cfg = ChainConfig {
        iterations: 135_000,
        burn_in: 10_000,
        thin: 10,
        seed: 6,
        store_draws: false,
        ..Default::default()
    };
    let start = Instant::now();
    let store = run_chains(&model, &priors, &cfg, &[1.0, 1.0], 4).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let mut hist = [[0.0; 8]; 8];
    for (l, gm) in store.lambda.iter().zip(&store.gamma) {
        hist[bin(&cu, l.ln())][bin(&cv, gm.ln())] += 1.0;
    }
    let ns = store.lambda.len() as f64;
    let mut tv = 0.0;
    for a in 0..8 {
        for b in 0..8 {
            tv += (hist[a][b] / ns - oracle[a][b]).abs();
        }
    }
    tv *= 0.5;
    out.push(line(
        "A6.grid-tv",
        tv < 0.05 && store.lambda.len() >= 50_000,
        format!("total variation {tv:.4} over 8x8 bins, {} draws in {secs:.0}s (tol 0.05; oracle edge mass {edge_mass:.1e})", store.lambda.len()),
    ));

    // IW and Φ draw moments
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let (t, k, n) = (3, 2, 2);
    let rw = rw_prior(
        &LambdaSpec::scalar(0.8),
        &(normal_matrix(&mut rng, k, n) * 0.5),
        &random_spd(&mut rng, n, 1.0),
        7.5,
        t,
    )
    .unwrap();
    let prior: NiwParams = rw;
    let draws = 40_000;
    let mut sig_s = Vec::with_capacity(draws);
    let mut prod_s = Vec::with_capacity(draws);
    for _ in 0..draws {
        let (s, phi) = prior.draw(&mut rng).unwrap();
        let d = &phi - &prior.m;
        let v = DVector::from_column_slice(d.as_slice());
        prod_s.push(&v * v.transpose());
        sig_s.push(s);
    }
    let e_sig = &prior.s / (prior.nu - n as f64 - 1.0);
    let kinv = prior.k.to_dense().try_inverse().unwrap();
    let cov_phi = e_sig.kronecker(&kinv);
    let (ms, ses) = mean_se(&sig_s);
    let (mp, sep) = mean_se(&prod_s);
    let mut z = Vec::new();
    for a in 0..n {
        for b in a..n {
            z.push((ms[(a, b)] - e_sig[(a, b)]).abs() / ses[(a, b)]);
        }
    }
    for a in 0..mp.nrows() {
        for b in a..mp.ncols() {
            z.push((mp[(a, b)] - cov_phi[(a, b)]).abs() / sep[(a, b)]);
        }
    }
    let (ok, over, zmax) = multiple_comparison(&z);
    out.push(line(
        "A6.niw-moments",
        ok,
        format!(
            "{} IW-mean and Φ-covariance entries: {over} beyond 3 SE, max |z| {zmax:.2}",
            z.len()
        ),
    ));

    let cfg = ChainConfig {
        iterations: 400,
        burn_in: 200,
        thin: 5,
        seed: 99,
        ..Default::default()
    };
    let a = run_chains(&model, &priors, &cfg, &[1.0, 1.0], 2).unwrap();
    let b = run_chains(&model, &priors, &cfg, &[1.0, 1.0], 2).unwrap();
    let same = a.lambda == b.lambda
        && a.gamma == b.gamma
        && a.phi == b.phi
        && a.sigma == b.sigma
        && a.log_ml == b.log_ml;
    out.push(line(
        "A6.reproducible",
        same && !a.phi.is_empty(),
        format!(
            "two runs with seed 99: {}",
            if same { "bit-identical" } else { "differ" }
        ),
    ));
    out
}

// ---------------------------------------------------------------- 7

struct IrfBands {
    label: String,
    // per date: q10, q90, median at each horizon
    q10: Vec<Vec<f64>>,
    q90: Vec<Vec<f64>>,
    med: Vec<Vec<f64>>,
}

fn bands(
    label: &str,
    store: &DrawStore,
    sol: &StateSpaceSolution,
    dates: &[usize],
    horizon: usize,
) -> IrfBands {
    let res = irf(
        store,
        2,
        |_, d| Ok(sol.impact(d as isize)),
        dates,
        horizon,
        &[true, false, false],
    )
    .unwrap();
    let mut b = IrfBands {
        label: label.into(),
        q10: vec![],
        q90: vec![],
        med: vec![],
    };
    for d in 0..dates.len() {
        let (mut lo, mut hi, mut md) = (vec![], vec![], vec![]);
        for h in 0..=horizon {
            let (a, m, c) = res.band(d, 0, 1, h);
            lo.push(a);
            md.push(m);
            hi.push(c);
        }
        b.q10.push(lo);
        b.q90.push(hi);
        b.med.push(md);
    }
    b
}

fn a7() -> Vec<Line> {
    let start = Instant::now();
    let (pre, p, t) = (20, 2, 139);
    let model = NkModel::new(vec![ZlbEpisode {
        start: 96,
        length: 28,
        horizon: 4,
    }]);
    let th = NkTheta::reference().to_vec();
    let data = nk_data(&model, pre + p, t, 2024);
    let design = StaticDesign::new(&data, p, pre).unwrap();
    let tc = TcModel::new(
        design.clone(),
        Arc::new(ModelMoments {
            model: Arc::new(model.clone()),
            p,
        }),
    );
    let mom = tc.moments(&th).unwrap();
    let sol = model.solve_theta(&NkTheta::reference(), t).unwrap();
    let dates = [60usize, 110];
    let horizon = 12;
    let draws = 500;
    let lambdas: Vec<f64> = (0..=16)
        .map(|i| 10f64.powf(-1.0 + 0.25 * i as f64))
        .collect();

    let mut all = Vec::new();
    let mut chosen = Vec::new();
    for (gi, gamma) in [10.0, 100.0, 300.0].iter().enumerate() {
        let best = lambdas
            .iter()
            .map(|&l| (l, tc.log_ml(l, *gamma, &mom).unwrap_or(f64::NEG_INFINITY)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        chosen.push(format!("γ={gamma}: λ={:.3}", best.0));
        let post = tc.posterior(best.0, *gamma, &mom).unwrap();
        let mut rng = chain_rng(70, gi as u64);
        let mut store = DrawStore {
            shape: (t, design.k(), design.n_vars()),
            ..Default::default()
        };
        for _ in 0..draws {
            let (s, phi) = post.draw(&mut rng).unwrap();
            store.sigma.push(s);
            store.phi.push(phi);
        }
        all.push(bands(&format!("γ={gamma}"), &store, &sol, &dates, horizon));
    }
    let restricted = DrawStore {
        shape: (t, design.k(), design.n_vars()),
        phi: vec![mom.restriction_path().unwrap()],
        ..Default::default()
    };
    all.push(bands("γ=∞", &restricted, &sol, &dates, horizon));

    let cfg = ChainConfig {
        iterations: 3000,
        burn_in: 1000,
        thin: 4,
        seed: 71,
        ..Default::default()
    };
    let std_store = fit_std_tvpvar(
        &design,
        &StdTvpSpec::default(),
        &TvpPrior::from_design(&design).unwrap(),
        &cfg,
        0,
    )
    .unwrap();
    let std_b = bands("std", &std_store, &sol, &dates, horizon);

    // peak horizon of the in-ZLB theory-restricted response
    let inf = &all[3];
    let peak = (1..=horizon)
        .max_by(|a, b| inf.med[1][*a].abs().total_cmp(&inf.med[1][*b].abs()))
        .unwrap();
    let width = |b: &IrfBands, d: usize| b.q90[d][peak] - b.q10[d][peak];
    let disjoint =
        |b: &IrfBands| b.q90[0][peak] < b.q10[1][peak] || b.q90[1][peak] < b.q10[0][peak];

    let mut mono = true;
    let mut widths = Vec::new();
    for d in 0..2 {
        let w: Vec<f64> = all.iter().map(|b| width(b, d)).collect();
        mono &= w.windows(2).all(|x| x[1] < x[0]);
        widths.push(
            w.iter()
                .map(|v| format!("{v:.3}"))
                .collect::<Vec<_>>()
                .join(" > "),
        );
    }
    let sep_300 = disjoint(&all[2]) && disjoint(&all[3]);
    let std_overlap = !disjoint(&std_b);
    let secs = start.elapsed().as_secs_f64();
    let fmt_band =
        |b: &IrfBands, d: usize| format!("[{:.3}, {:.3}]", b.q10[d][peak], b.q90[d][peak]);
    vec![
        line(
            "A7.bands-shrink",
            mono,
            format!(
                "peak h = {peak}; widths out-of-ZLB {} ; in-ZLB {} ({})",
                widths[0],
                widths[1],
                chosen.join(", ")
            ),
        ),
        line(
            "A7.zlb-separates",
            sep_300,
            format!(
                "{} out {} vs in {}; γ=∞ out {} vs in {}",
                all[2].label,
                fmt_band(&all[2], 0),
                fmt_band(&all[2], 1),
                fmt_band(&all[3], 0),
                fmt_band(&all[3], 1)
            ),
        ),
        line(
            "A7.std-overlaps",
            std_overlap,
            format!(
                "standard TVP-VAR out {} vs in {}",
                fmt_band(&std_b, 0),
                fmt_band(&std_b, 1)
            ),
        ),
        line(
            "A7.runtime",
            secs < 1800.0,
            format!("{secs:.0}s (limit 1800s)"),
        ),
    ]
}

// ---------------------------------------------------------------- 8

fn a8() -> Vec<Line> {
    let start = Instant::now();
    let (pre, p, t0, n_orig) = (20, 2, 80, 8);
    let model = NkModel::new(vec![]);
    let th = NkTheta::reference().to_vec();
    let provider = Arc::new(ModelMoments {
        model: Arc::new(model.clone()),
        p,
    });
    let tc = TcForecaster {
        p,
        presample: pre,
        provider,
        hyper: TcHyper::MlGrid {
            lambdas: (0..=8)
                .map(|i| 10f64.powf(-0.5 + 0.375 * i as f64))
                .collect(),
            gammas: vec![0.0, 0.3, 1.0, 3.0, 10.0, 30.0],
            theta: th,
        },
        freeze: false,
    };
    let std = StdTvpForecaster {
        p,
        presample: pre,
        spec: StdTvpSpec::default(),
        chain: ChainConfig {
            iterations: 300,
            burn_in: 150,
            thin: 3,
            ..Default::default()
        },
        freeze: false,
    };
    let models: [&dyn Forecaster; 2] = [&tc, &std];
    let mut wins = 0;
    let mut diffs = Vec::new();
    let datasets = 50;
    for ds in 0..datasets {
        let rows = pre + p + t0 + n_orig + 1;
        let data = nk_data(&model, 0, rows, 800 + ds);
        let origins: Vec<usize> = (0..n_orig).map(|i| pre + p + t0 - 1 + i).collect();
        let names = vec!["ygr".to_string(), "infl".into(), "int".into()];
        let run = recursive_forecast(
            &models,
            &data,
            &names,
            &origins,
            &[1],
            HorizonMode::Point,
            200,
            ds,
        )
        .unwrap();
        let rows = score(&run).unwrap();
        let get = |m: &str| {
            rows.iter()
                .find(|r| r.model == m && r.variable == "ygr" && r.horizon == 1)
                .unwrap()
                .rmse
        };
        let (a, b) = (get("tc-tvp-var"), get("std-tvp-var"));
        if a < b {
            wins += 1;
        }
        diffs.push(b - a);
    }
    // one-sided sign test
    let pval: f64 = (wins..=datasets as usize)
        .map(|k| binom(datasets as usize, k))
        .sum::<f64>()
        / 2f64.powi(datasets as i32);
    let mean_gain = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let secs = start.elapsed().as_secs_f64();
    vec![
        line(
            "A8.forecast",
            pval < 0.05,
            format!("TC h=1 output RMSE below standard TVP-VAR in {wins}/{datasets} datasets (sign test p = {pval:.4}), mean RMSE gain {mean_gain:.3}"),
        ),
        line("A8.runtime", secs < 3600.0, format!("{secs:.0}s (limit 3600s)")),
    ]
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

// ---------------------------------------------------------------- 9

fn a9() -> Vec<Line> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mu, sd, y) = (0.4, 1.7, 1.3);
    let draws: Vec<f64> = (0..100_000)
        .map(|_| mu + sd * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let z = (y - mu) / sd;
    let cdf = 0.5 * libm::erfc(-z / std::f64::consts::SQRT_2);
    let pdf = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let exact = sd * (z * (2.0 * cdf - 1.0) + 2.0 * pdf - 1.0 / std::f64::consts::PI.sqrt());
    let est = crps(&draws, y);
    let rel = (est - exact).abs() / exact;
    let c = [2.5; 7];
    let degenerate = crps(&c, 2.5) == 0.0 && crps(&c, 1.0) == 1.5;
    vec![
        line(
            "A9.gaussian",
            rel < 0.01,
            format!("CRPS {est:.5} vs closed form {exact:.5}, rel err {rel:.2e} (tol 1%)"),
        ),
        line(
            "A9.degenerate",
            degenerate,
            "point-mass forecast: 0 at the realisation, |c − y| elsewhere".into(),
        ),
    ]
}

fn main() {
    let wanted: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| a.starts_with('A'))
        .collect();
    let suites: [(&str, fn() -> Vec<Line>); 9] = [
        ("A1", a1),
        ("A2", a2),
        ("A3", a3),
        ("A4", a4),
        ("A5", a5),
        ("A6", a6),
        ("A7", a7),
        ("A8", a8),
        ("A9", a9),
    ];
    let mut failed = 0;
    for (id, f) in suites {
        if !wanted.is_empty() && !wanted.iter().any(|w| w == id) {
            continue;
        }
        for l in f() {
            if !l.pass {
                failed += 1;
            }
            println!(
                "{} {:<22} {}",
                if l.pass { "PASS" } else { "FAIL" },
                l.id,
                l.detail
            );
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance check(s) failed");
        std::process::exit(1);
    }
}
