//! Small-scale New Keynesian model with an optional zero-lower-bound calendar.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{solve_anticipated, solve_re, ReSystem, StateSpaceSolution, TheoryModel};
use crate::{Error, Result};

pub const NK_PARAM_NAMES: [&str; 13] = [
    "ln_gamma",
    "ln_pi_star",
    "ln_r_star",
    "kappa",
    "tau",
    "psi1",
    "psi2",
    "rho_r",
    "rho_g",
    "rho_z",
    "sigma_r",
    "sigma_g",
    "sigma_z",
];

// state ordering
const Y: usize = 0;
const PI: usize = 1;
const R: usize = 2;
const Z: usize = 3;
const G: usize = 4;
const YLAG: usize = 5;
const NS: usize = 6;
// shocks: ε_R, ε_g, ε_z
const E_R: usize = 0;
const E_G: usize = 1;
const E_Z: usize = 2;

/// Deep parameters. Growth, inflation and real-rate levels are quarterly
/// percentages; the σ are shock standard deviations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NkTheta {
    pub ln_gamma: f64,
    pub ln_pi_star: f64,
    pub ln_r_star: f64,
    pub kappa: f64,
    pub tau: f64,
    pub psi1: f64,
    pub psi2: f64,
    pub rho_r: f64,
    pub rho_g: f64,
    pub rho_z: f64,
    pub sigma_r: f64,
    pub sigma_g: f64,
    pub sigma_z: f64,
}

impl NkTheta {
    /// Posterior medians reported for US data; a convenient calibration.
    pub fn reference() -> Self {
        Self {
            ln_gamma: 0.979,
            ln_pi_star: 0.770,
            ln_r_star: 0.227,
            kappa: 0.886,
            tau: 1.153,
            psi1: 1.534,
            psi2: 0.139,
            rho_r: 0.849,
            rho_g: 0.794,
            rho_z: 0.209,
            sigma_r: 0.080,
            sigma_g: 0.345,
            sigma_z: 0.416,
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        vec![
            self.ln_gamma,
            self.ln_pi_star,
            self.ln_r_star,
            self.kappa,
            self.tau,
            self.psi1,
            self.psi2,
            self.rho_r,
            self.rho_g,
            self.rho_z,
            self.sigma_r,
            self.sigma_g,
            self.sigma_z,
        ]
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() != 13 {
            return Err(Error::Dimension(format!(
                "NK theta has 13 elements, got {}",
                v.len()
            )));
        }
        Ok(Self {
            ln_gamma: v[0],
            ln_pi_star: v[1],
            ln_r_star: v[2],
            kappa: v[3],
            tau: v[4],
            psi1: v[5],
            psi2: v[6],
            rho_r: v[7],
            rho_g: v[8],
            rho_z: v[9],
            sigma_r: v[10],
            sigma_g: v[11],
            sigma_z: v[12],
        })
    }

    pub fn in_support(&self) -> bool {
        let unit = |x: f64| x > 0.0 && x < 1.0;
        unit(self.rho_r)
            && unit(self.rho_g)
            && unit(self.rho_z)
            && self.sigma_r > 0.0
            && self.sigma_g > 0.0
            && self.sigma_z > 0.0
            && self.kappa > 0.0
            && self.tau > 0.0
            && self.psi1 > 0.0
            && self.psi2 >= 0.0
            && self.ln_r_star > 0.0
            && self.to_vec().iter().all(|v| v.is_finite())
    }

    /// NKPC discount factor `γ / r*`, from levels in quarterly percent.
    pub fn discount(&self) -> f64 {
        ((self.ln_gamma - self.ln_r_star) / 100.0).exp()
    }

    /// Steady-state quarterly nominal rate `ln r* + ln π*` (percent).
    pub fn nominal_rate(&self) -> f64 {
        self.ln_r_star + self.ln_pi_star
    }

    pub fn shock_variances(&self) -> DVector<f64> {
        DVector::from_vec(vec![
            self.sigma_r.powi(2),
            self.sigma_g.powi(2),
            self.sigma_z.powi(2),
        ])
    }
}

/// Structural system for the IS curve, NKPC, policy rule, the z and g laws
/// of motion and the lagged-output identity.
///
/// States are `(ŷ, π̂, R̂, ẑ, ĝ, ŷ_{t-1})`, shocks `(ε_R, ε_g, ε_z)`.
pub fn build_nk_system(th: &NkTheta) -> ReSystem {
    let mut g0 = DMatrix::zeros(NS, NS);
    let mut g1 = DMatrix::zeros(NS, NS);
    let mut g2 = DMatrix::zeros(NS, NS);
    let mut psi = DMatrix::zeros(NS, 3);

    // IS: y = E y' - (R - E π')/τ + (1-ρg) g + ρz z/τ
    g2[(0, Y)] = -1.0;
    g2[(0, PI)] = -1.0 / th.tau;
    g0[(0, Y)] = 1.0;
    g0[(0, R)] = 1.0 / th.tau;
    g0[(0, G)] = -(1.0 - th.rho_g);
    g0[(0, Z)] = -th.rho_z / th.tau;

    // NKPC: π = (γ/r*) E π' + κ (y - g)
    g2[(1, PI)] = -th.discount();
    g0[(1, PI)] = 1.0;
    g0[(1, Y)] = -th.kappa;
    g0[(1, G)] = th.kappa;

    // policy rule
    g0[(2, R)] = 1.0;
    g0[(2, PI)] = -(1.0 - th.rho_r) * th.psi1;
    g0[(2, Y)] = -(1.0 - th.rho_r) * th.psi2;
    g1[(2, R)] = th.rho_r;
    psi[(2, E_R)] = 1.0;

    g0[(3, Z)] = 1.0;
    g1[(3, Z)] = th.rho_z;
    psi[(3, E_Z)] = 1.0;

    g0[(4, G)] = 1.0;
    g1[(4, G)] = th.rho_g;
    psi[(4, E_G)] = 1.0;

    g0[(5, YLAG)] = 1.0;
    g1[(5, Y)] = 1.0;

    ReSystem {
        gamma0: g0,
        gamma1: g1,
        gamma2: g2,
        gammac: DVector::zeros(NS),
        psi,
    }
}

/// The NK system with the policy rule replaced by a peg at a zero nominal rate.
pub fn build_peg_system(th: &NkTheta) -> ReSystem {
    let mut sys = build_nk_system(th);
    for j in 0..NS {
        sys.gamma0[(2, j)] = 0.0;
        sys.gamma1[(2, j)] = 0.0;
        sys.gamma2[(2, j)] = 0.0;
    }
    for j in 0..sys.psi.ncols() {
        sys.psi[(2, j)] = 0.0;
    }
    sys.gamma0[(2, R)] = 1.0;
    sys.gammac[2] = -th.nominal_rate();
    sys
}

/// Observation map for (YGR, INFL, INT).
fn observation(th: &NkTheta) -> (DVector<f64>, DMatrix<f64>) {
    let d = DVector::from_vec(vec![th.ln_gamma, th.ln_pi_star, 4.0 * th.nominal_rate()]);
    let mut b = DMatrix::zeros(3, NS);
    b[(0, Y)] = 1.0;
    b[(0, YLAG)] = -1.0;
    b[(0, Z)] = 1.0;
    b[(1, PI)] = 1.0;
    b[(2, R)] = 4.0;
    (d, b)
}

/// One zero-lower-bound episode: the rate is pegged from `start` for
/// `length` periods, and in each of those periods agents expect the peg to
/// last at most `horizon` further periods.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZlbEpisode {
    pub start: usize,
    pub length: usize,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
}

fn default_horizon() -> usize {
    4
}

impl ZlbEpisode {
    pub const MAX_HORIZON: usize = 4;

    pub fn contains(&self, j: usize) -> bool {
        j >= self.start && j < self.start + self.length
    }

    /// Expected remaining peg length announced at period `j` inside the episode.
    pub fn horizon_at(&self, j: usize) -> usize {
        self.horizon
            .min(Self::MAX_HORIZON)
            .min(self.start + self.length - 1 - j)
    }
}

/// The NK model as a [`TheoryModel`].
#[derive(Clone, Debug, Default)]
pub struct NkModel {
    pub calendar: Vec<ZlbEpisode>,
    /// Measurement variance on the policy rate during ZLB periods.
    pub zlb_meas_var: f64,
}

impl NkModel {
    pub fn new(calendar: Vec<ZlbEpisode>) -> Self {
        Self {
            calendar,
            zlb_meas_var: 0.001,
        }
    }

    /// Calendar shifted to start `offset` periods later.
    pub fn shifted(&self, offset: usize) -> Self {
        Self {
            calendar: self
                .calendar
                .iter()
                .map(|e| ZlbEpisode {
                    start: e.start + offset,
                    ..*e
                })
                .collect(),
            zlb_meas_var: self.zlb_meas_var,
        }
    }

    pub fn in_zlb(&self, j: usize) -> bool {
        self.calendar.iter().any(|e| e.contains(j))
    }

    pub fn solve_theta(&self, th: &NkTheta, n_periods: usize) -> Result<StateSpaceSolution> {
        if !th.in_support() {
            return Err(Error::InvalidParameter(
                "NK theta outside its support".into(),
            ));
        }
        let base_sys = build_nk_system(th);
        let base = solve_re(&base_sys)?;
        let rho = crate::linalg::spectral_radius(&base.t);
        if rho >= 1.0 - 1e-8 {
            return Err(Error::NonStationary(rho));
        }
        let (d, b) = observation(th);
        let mut sol =
            StateSpaceSolution::constant(d, b, th.shock_variances(), base.clone(), n_periods);
        if self.calendar.is_empty() {
            return Ok(sol);
        }
        let peg = build_peg_system(th);
        for j in 0..n_periods {
            let Some(ep) = self.calendar.iter().find(|e| e.contains(j)) else {
                continue;
            };
            let h = ep.horizon_at(j);
            let path = vec![peg.clone(); h + 1];
            let laws = solve_anticipated(&path, &base)?;
            sol.periods[j] = laws[0].clone();
            sol.meas_var[j][2] = self.zlb_meas_var;
        }
        Ok(sol)
    }
}

impl TheoryModel for NkModel {
    fn name(&self) -> &str {
        "nk"
    }

    fn param_names(&self) -> Vec<String> {
        NK_PARAM_NAMES.iter().map(|s| s.to_string()).collect()
    }

    fn n_obs(&self) -> usize {
        3
    }

    fn in_support(&self, theta: &[f64]) -> bool {
        NkTheta::from_slice(theta)
            .map(|t| t.in_support())
            .unwrap_or(false)
    }

    fn solve(&self, theta: &[f64], n_periods: usize) -> Result<StateSpaceSolution> {
        self.solve_theta(&NkTheta::from_slice(theta)?, n_periods)
    }
}
