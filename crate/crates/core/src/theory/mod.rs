//! Linear rational-expectations models and their population moments.
//!
//! Models are written in structural form
//!
//! ```text
//! Γ2 E_t s_{t+1} + Γ0 s_t = Γc + Γ1 s_{t-1} + Ψ ε_t
//! ```
//!
//! and solved into `s_t = C + T s_{t-1} + R ε_t`. Anticipated regime changes
//! (an interest-rate peg, say) yield period-specific `(C_t, T_t, R_t)`.

mod moments;
mod nk;
mod qz;
mod simulate;
mod solve;

pub use moments::{stationary_moments, theory_moments, TheoryMoments};
pub use nk::{build_nk_system, build_peg_system, NkModel, NkTheta, ZlbEpisode, NK_PARAM_NAMES};
pub use simulate::{simulate, SimulatedPath};
pub use solve::{solve_anticipated, solve_re};

use nalgebra::{DMatrix, DVector};

use crate::Result;

/// Structural-form linear RE system.
#[derive(Clone, Debug)]
pub struct ReSystem {
    pub gamma0: DMatrix<f64>,
    pub gamma1: DMatrix<f64>,
    pub gamma2: DMatrix<f64>,
    pub gammac: DVector<f64>,
    pub psi: DMatrix<f64>,
}

impl ReSystem {
    /// Purely backward system `Γ0 s_t = Γc + Γ1 s_{t-1} + Ψ ε_t`.
    pub fn backward(
        gamma0: DMatrix<f64>,
        gamma1: DMatrix<f64>,
        gammac: DVector<f64>,
        psi: DMatrix<f64>,
    ) -> Self {
        let n = gamma0.nrows();
        Self {
            gamma0,
            gamma1,
            gamma2: DMatrix::zeros(n, n),
            gammac,
            psi,
        }
    }

    pub fn n_states(&self) -> usize {
        self.gamma0.nrows()
    }

    pub fn n_shocks(&self) -> usize {
        self.psi.ncols()
    }

    /// Columns of Γ2 that are not identically zero: the forward-looking states.
    pub fn forward_columns(&self) -> Vec<usize> {
        (0..self.n_states())
            .filter(|&j| self.gamma2.column(j).iter().any(|v| *v != 0.0))
            .collect()
    }

    /// Expectational-error loading of the canonical form obtained by
    /// appending `ξ_t = E_t s^f_{t+1}` for each forward column. It is
    /// `[0; I_m]` and therefore always has full column rank.
    pub fn pi_loading(&self) -> DMatrix<f64> {
        let (n, m) = (self.n_states(), self.forward_columns().len());
        let mut pi = DMatrix::zeros(n + m, m);
        for i in 0..m {
            pi[(n + i, i)] = 1.0;
        }
        pi
    }

    pub fn check(&self) -> Result<()> {
        let n = self.n_states();
        let ok = self.gamma0.ncols() == n
            && self.gamma1.shape() == (n, n)
            && self.gamma2.shape() == (n, n)
            && self.gammac.len() == n
            && self.psi.nrows() == n;
        if ok {
            Ok(())
        } else {
            Err(crate::Error::Dimension(
                "ReSystem blocks are not conformable".into(),
            ))
        }
    }
}

/// Reduced-form law of motion `s_t = c + T s_{t-1} + R ε_t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReSolution {
    pub c: DVector<f64>,
    pub t: DMatrix<f64>,
    pub r: DMatrix<f64>,
}

/// State space implied by a theory at given θ over a calendar of periods.
///
/// `periods[j]` is the law of motion in force at period `j`; periods outside
/// any announcement carry the baseline. `meas_var[j]` is the diagonal of the
/// measurement-error covariance at `j`.
#[derive(Clone, Debug)]
pub struct StateSpaceSolution {
    pub d: DVector<f64>,
    pub b: DMatrix<f64>,
    pub omega: DVector<f64>,
    pub baseline: ReSolution,
    pub baseline_meas_var: DVector<f64>,
    pub periods: Vec<ReSolution>,
    pub meas_var: Vec<DVector<f64>>,
}

impl StateSpaceSolution {
    /// Time-invariant solution over `n` periods.
    pub fn constant(
        d: DVector<f64>,
        b: DMatrix<f64>,
        omega: DVector<f64>,
        baseline: ReSolution,
        n: usize,
    ) -> Self {
        let nobs = d.len();
        Self {
            periods: vec![baseline.clone(); n],
            meas_var: vec![DVector::zeros(nobs); n],
            baseline_meas_var: DVector::zeros(nobs),
            d,
            b,
            omega,
            baseline,
        }
    }

    pub fn n_obs(&self) -> usize {
        self.d.len()
    }

    pub fn n_states(&self) -> usize {
        self.baseline.t.nrows()
    }

    pub fn n_periods(&self) -> usize {
        self.periods.len()
    }

    /// Law of motion at period `j`; negative or out-of-range periods use the baseline.
    pub fn at(&self, j: isize) -> &ReSolution {
        if j < 0 || j as usize >= self.periods.len() {
            &self.baseline
        } else {
            &self.periods[j as usize]
        }
    }

    pub fn meas_at(&self, j: isize) -> &DVector<f64> {
        if j < 0 || j as usize >= self.meas_var.len() {
            &self.baseline_meas_var
        } else {
            &self.meas_var[j as usize]
        }
    }

    /// Theory impact matrix `B R_t Ωε^{1/2}` at period `j`.
    pub fn impact(&self, j: isize) -> DMatrix<f64> {
        let sd = DMatrix::from_diagonal(&self.omega.map(f64::sqrt));
        &self.b * &self.at(j).r * sd
    }
}

/// A theory that maps a parameter vector to a state-space solution.
pub trait TheoryModel: Send + Sync {
    fn name(&self) -> &str;
    fn param_names(&self) -> Vec<String>;
    fn n_obs(&self) -> usize;
    /// Whether θ lies inside the parameter space.
    fn in_support(&self, theta: &[f64]) -> bool;
    /// Solve at θ over `n_periods` sample periods.
    fn solve(&self, theta: &[f64], n_periods: usize) -> Result<StateSpaceSolution>;
}
