use nalgebra::{DMatrix, DVector};

use super::qz::ordered_qz;
use super::{ReSolution, ReSystem};
use crate::{Error, Result};

/// Reciprocal condition threshold below which a square solve is treated as singular.
const RCOND_TOL: f64 = 1e-13;

fn rcond(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    if max == 0.0 {
        0.0
    } else {
        sv.min() / max
    }
}

fn solve_square(m: &DMatrix<f64>, rhs: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if rcond(m) < RCOND_TOL {
        return None;
    }
    m.clone().lu().solve(rhs)
}

/// Solve a structural RE system for its unique stable law of motion.
///
/// Forward-looking states are augmented with their one-step expectations and
/// the resulting pencil is split with an ordered QZ at modulus `1 + 1e-6`.
pub fn solve_re(sys: &ReSystem) -> Result<ReSolution> {
    sys.check()?;
    let n = sys.n_states();
    let fwd = sys.forward_columns();
    let m = fwd.len();
    if m == 0 {
        let t = if sys.gamma0 == DMatrix::identity(n, n) {
            sys.gamma1.clone()
        } else {
            solve_square(&sys.gamma0, &sys.gamma1)
                .ok_or_else(|| Error::NoStableSolution("Γ0 is singular".into()))?
        };
        let r = solve_square(&sys.gamma0, &sys.psi).unwrap_or_else(|| sys.psi.clone());
        let c = steady_constant(sys, &t)?;
        return Ok(ReSolution { c, t, r });
    }

    let g2f = sys.gamma2.select_columns(&fwd);
    let nm = n + m;
    // A z_t = B z_{t-1} + Ψ ε_t + Π η_t with z = (s, ξ)
    let mut a = DMatrix::zeros(nm, nm);
    a.view_mut((0, 0), (n, n)).copy_from(&sys.gamma0);
    a.view_mut((0, n), (n, m)).copy_from(&g2f);
    for (i, &f) in fwd.iter().enumerate() {
        a[(n + i, f)] = 1.0;
    }
    let mut b = DMatrix::zeros(nm, nm);
    b.view_mut((0, 0), (n, n)).copy_from(&sys.gamma1);
    for i in 0..m {
        b[(n + i, n + i)] = 1.0;
    }

    // roots λ of B v = λ A v, i.e. growth factors of z_t = λ z_{t-1}
    let qz = ordered_qz(&b, &a)?;
    let n_unstable = nm - qz.n_stable;
    if n_unstable > m {
        return Err(Error::NoStableSolution(format!(
            "{n_unstable} unstable roots exceed {m} forward-looking variables"
        )));
    }
    if n_unstable < m {
        return Err(Error::Indeterminacy {
            unstable: n_unstable,
            forward: m,
        });
    }
    let zu = qz.z.columns(qz.n_stable, m).transpose();
    let zus = zu.columns(0, n).into_owned();
    let zux = zu.columns(n, m).into_owned();
    let f = solve_square(&zux, &(-zus)).ok_or_else(|| {
        Error::NoStableSolution("unstable block not invertible in expectations".into())
    })?;

    let a0 = &sys.gamma0 + &g2f * &f;
    let t = solve_square(&a0, &sys.gamma1)
        .ok_or_else(|| Error::NoStableSolution("impact matrix singular".into()))?;
    let r = solve_square(&a0, &sys.psi)
        .ok_or_else(|| Error::NoStableSolution("impact matrix singular".into()))?;
    let c = steady_constant(sys, &t)?;
    Ok(ReSolution { c, t, r })
}

/// Intercept `c` with `(Γ2 T + Γ0 + Γ2) c = Γc`.
fn steady_constant(sys: &ReSystem, t: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = sys.n_states();
    if sys.gammac.iter().all(|v| *v == 0.0) {
        return Ok(DVector::zeros(n));
    }
    let g = &sys.gamma2 * t + &sys.gamma0 + &sys.gamma2;
    let rhs = DMatrix::from_column_slice(n, 1, sys.gammac.as_slice());
    solve_square(&g, &rhs)
        .map(|c| c.column(0).into_owned())
        .ok_or_else(|| Error::NoStableSolution("steady state not defined".into()))
}

/// Backward recursion for a finite sequence of anticipated structural
/// changes. `path[0]` is the system in force at the current period and
/// `path.last()` the one just before the economy returns to `terminal`.
/// Returns one law of motion per element of `path`.
pub fn solve_anticipated(path: &[ReSystem], terminal: &ReSolution) -> Result<Vec<ReSolution>> {
    let mut out = vec![terminal.clone(); path.len()];
    let mut t_next = terminal.t.clone();
    let mut c_next = terminal.c.clone();
    for (tau, sys) in path.iter().enumerate().rev() {
        sys.check()?;
        let n = sys.n_states();
        let g = &sys.gamma2 * &t_next + &sys.gamma0;
        let rhs_c = &sys.gammac - &sys.gamma2 * &c_next;
        let mut rhs = DMatrix::zeros(n, 1 + n + sys.n_shocks());
        rhs.column_mut(0).copy_from(&rhs_c);
        rhs.columns_mut(1, n).copy_from(&sys.gamma1);
        rhs.columns_mut(1 + n, sys.n_shocks()).copy_from(&sys.psi);
        let sol = solve_square(&g, &rhs).ok_or(Error::SingularRecursion(tau))?;
        let c = sol.column(0).into_owned();
        let t = sol.columns(1, n).into_owned();
        let r = sol.columns(1 + n, sys.n_shocks()).into_owned();
        t_next = t.clone();
        c_next = c.clone();
        out[tau] = ReSolution { c, t, r };
    }
    Ok(out)
}
