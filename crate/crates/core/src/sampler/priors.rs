use libm::lgamma;
use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Univariate prior, parameterised by mean and standard deviation where
/// that is the customary way to state it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Prior {
    Normal {
        mean: f64,
        sd: f64,
    },
    Gamma {
        mean: f64,
        sd: f64,
    },
    Beta {
        mean: f64,
        sd: f64,
    },
    InvGamma {
        mean: f64,
        sd: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// Point mass; the parameter is held fixed.
    Fixed {
        value: f64,
    },
}

/// Map from the parameter's support to the real line used by proposals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Transform {
    Identity,
    /// `u = ln(x − lo)`.
    Log {
        lo: f64,
    },
    /// `u = logit((x − lo)/(hi − lo))`.
    Logit {
        lo: f64,
        hi: f64,
    },
}

impl Transform {
    pub fn forward(&self, x: f64) -> f64 {
        match *self {
            Self::Identity => x,
            Self::Log { lo } => (x - lo).ln(),
            Self::Logit { lo, hi } => {
                let z = (x - lo) / (hi - lo);
                (z / (1.0 - z)).ln()
            }
        }
    }

    pub fn inverse(&self, u: f64) -> f64 {
        match *self {
            Self::Identity => u,
            Self::Log { lo } => lo + u.exp(),
            Self::Logit { lo, hi } => lo + (hi - lo) / (1.0 + (-u).exp()),
        }
    }

    /// `ln |dx/du|` at `u`.
    pub fn log_jacobian(&self, u: f64) -> f64 {
        match *self {
            Self::Identity => 0.0,
            Self::Log { .. } => u,
            Self::Logit { lo, hi } => {
                // dx/du = (hi − lo) σ(u)(1 − σ(u))
                (hi - lo).ln() - softplus(-u) - softplus(u)
            }
        }
    }
}

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

impl Prior {
    fn gamma_shape_scale(mean: f64, sd: f64) -> (f64, f64) {
        let shape = (mean / sd).powi(2);
        (shape, sd * sd / mean)
    }

    fn beta_ab(mean: f64, sd: f64) -> (f64, f64) {
        let c = mean * (1.0 - mean) / (sd * sd) - 1.0;
        (mean * c, (1.0 - mean) * c)
    }

    /// Shape and scale matching the given mean and sd.
    pub fn inv_gamma_shape_scale(mean: f64, sd: f64) -> (f64, f64) {
        let a = 2.0 + (mean / sd).powi(2);
        (a, mean * (a - 1.0))
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Normal { sd, .. } => sd > 0.0,
            Self::Gamma { mean, sd } | Self::InvGamma { mean, sd } => mean > 0.0 && sd > 0.0,
            Self::Beta { mean, sd } => {
                mean > 0.0 && mean < 1.0 && sd > 0.0 && sd * sd < mean * (1.0 - mean)
            }
            Self::Uniform { lo, hi } => hi > lo,
            Self::Fixed { value } => value.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid prior {self:?}")))
        }
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self, Self::Fixed { .. })
    }

    pub fn transform(&self) -> Transform {
        match *self {
            Self::Normal { .. } | Self::Fixed { .. } => Transform::Identity,
            Self::Gamma { .. } | Self::InvGamma { .. } => Transform::Log { lo: 0.0 },
            Self::Beta { .. } => Transform::Logit { lo: 0.0, hi: 1.0 },
            // positive uniform ranges are sampled on the log scale
            Self::Uniform { lo, hi } if lo == 0.0 && hi > 1e6 => Transform::Log { lo: 0.0 },
            Self::Uniform { lo, hi } => Transform::Logit { lo, hi },
        }
    }

    pub fn in_support(&self, x: f64) -> bool {
        x.is_finite()
            && match *self {
                Self::Normal { .. } => true,
                Self::Gamma { .. } | Self::InvGamma { .. } => x > 0.0,
                Self::Beta { .. } => x > 0.0 && x < 1.0,
                Self::Uniform { lo, hi } => x > lo && x < hi,
                Self::Fixed { value } => x == value,
            }
    }

    /// Log density (0 for a point mass at its value).
    pub fn ln_pdf(&self, x: f64) -> f64 {
        if !self.in_support(x) {
            return f64::NEG_INFINITY;
        }
        match *self {
            Self::Normal { mean, sd } => {
                -0.5 * ((x - mean) / sd).powi(2) - sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
            }
            Self::Gamma { mean, sd } => {
                let (k, th) = Self::gamma_shape_scale(mean, sd);
                (k - 1.0) * x.ln() - x / th - lgamma(k) - k * th.ln()
            }
            Self::Beta { mean, sd } => {
                let (a, b) = Self::beta_ab(mean, sd);
                (a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln()
                    - (lgamma(a) + lgamma(b) - lgamma(a + b))
            }
            Self::InvGamma { mean, sd } => {
                let (a, b) = Self::inv_gamma_shape_scale(mean, sd);
                a * b.ln() - lgamma(a) - (a + 1.0) * x.ln() - b / x
            }
            Self::Uniform { lo, hi } => -(hi - lo).ln(),
            Self::Fixed { .. } => 0.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Normal { mean, sd } => Normal::new(mean, sd).unwrap().sample(rng),
            Self::Gamma { mean, sd } => {
                let (k, th) = Self::gamma_shape_scale(mean, sd);
                Gamma::new(k, th).unwrap().sample(rng)
            }
            Self::Beta { mean, sd } => {
                let (a, b) = Self::beta_ab(mean, sd);
                Beta::new(a, b).unwrap().sample(rng)
            }
            Self::InvGamma { mean, sd } => {
                let (a, b) = Self::inv_gamma_shape_scale(mean, sd);
                b / Gamma::new(a, 1.0).unwrap().sample(rng)
            }
            Self::Uniform { lo, hi } => rng.random_range(lo..hi),
            Self::Fixed { value } => value,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Normal { mean, .. }
            | Self::Gamma { mean, .. }
            | Self::Beta { mean, .. }
            | Self::InvGamma { mean, .. } => mean,
            Self::Uniform { lo, hi } => 0.5 * (lo + hi),
            Self::Fixed { value } => value,
        }
    }
}

/// Prior table for the NK deep parameters.
pub fn nk_prior_table() -> Vec<Prior> {
    use Prior::*;
    vec![
        Normal {
            mean: 0.5,
            sd: 0.25,
        },
        Normal { mean: 1.0, sd: 0.5 },
        Gamma {
            mean: 0.5,
            sd: 0.25,
        },
        Gamma {
            mean: 0.3,
            sd: 0.15,
        },
        Gamma { mean: 2.0, sd: 0.5 },
        Gamma {
            mean: 1.5,
            sd: 0.25,
        },
        Gamma { mean: 0.5, sd: 0.2 },
        Beta {
            mean: 0.5,
            sd: 0.25,
        },
        Beta { mean: 0.8, sd: 0.1 },
        Beta { mean: 0.3, sd: 0.1 },
        InvGamma {
            mean: 0.251,
            sd: 0.139,
        },
        InvGamma {
            mean: 0.630,
            sd: 0.323,
        },
        InvGamma {
            mean: 0.875,
            sd: 0.430,
        },
    ]
}
