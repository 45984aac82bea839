use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{stationary_moments, StateSpaceSolution};
use crate::linalg::{chol, std_normal_vector};
use crate::Result;

/// Simulated states and observables, one row per period.
#[derive(Clone, Debug)]
pub struct SimulatedPath {
    pub states: DMatrix<f64>,
    pub obs: DMatrix<f64>,
    pub shocks: DMatrix<f64>,
}

/// Simulate `n` periods of `sol`, drawing the initial state from the
/// stationary baseline distribution.
pub fn simulate<R: Rng + ?Sized>(
    sol: &StateSpaceSolution,
    n: usize,
    rng: &mut R,
) -> Result<SimulatedPath> {
    let ns = sol.n_states();
    let ne = sol.omega.len();
    let nobs = sol.n_obs();
    let (sig, mean) = stationary_moments(&sol.baseline, &sol.omega)?;
    // stationary covariance may be singular (identities); jitter the factor only
    let l = chol(
        &(&sig + DMatrix::identity(ns, ns) * 1e-12),
        "stationary covariance",
    )?;
    let mut s: DVector<f64> = &mean + &l * std_normal_vector(rng, ns);
    let sd = sol.omega.map(f64::sqrt);
    let mut out = SimulatedPath {
        states: DMatrix::zeros(n, ns),
        obs: DMatrix::zeros(n, nobs),
        shocks: DMatrix::zeros(n, ne),
    };
    for j in 0..n {
        let law = sol.at(j as isize);
        let e = std_normal_vector(rng, ne).component_mul(&sd);
        s = &law.c + &law.t * &s + &law.r * &e;
        let mv = sol.meas_at(j as isize);
        let me = std_normal_vector(rng, nobs).component_mul(&mv.map(f64::sqrt));
        let y = &sol.d + &sol.b * &s + me;
        out.states.row_mut(j).copy_from(&s.transpose());
        out.obs.row_mut(j).copy_from(&y.transpose());
        out.shocks.row_mut(j).copy_from(&e.transpose());
    }
    Ok(out)
}
