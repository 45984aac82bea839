//! Run configuration (TOML, unknown keys rejected).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::Transform;
use crate::analysis::{HorizonMode, TcHyper};
use crate::baselines::{MinnesotaSpec, StdTvpSpec};
use crate::sampler::{nk_prior_table, ChainConfig, HyperPriors, Prior};
use crate::theory::{NkTheta, ZlbEpisode};
use crate::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub data: DataConfig,
    pub var: VarConfig,
    pub prior: PriorConfig,
    pub theory: TheoryConfig,
    pub sampler: ChainConfig,
    pub forecast: ForecastConfig,
    pub irf: IrfConfig,
    pub ml_grid: GridConfig,
    pub simulate: SimulateConfig,
    pub minnesota: MinnesotaSpec,
    pub std_tvp: StdTvpSpec,
    pub output: OutputConfig,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    pub path: Option<PathBuf>,
    pub transforms: Vec<Transform>,
    pub nonstationary: Vec<bool>,
    pub presample: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VarConfig {
    pub p: usize,
}

impl Default for VarConfig {
    fn default() -> Self {
        Self { p: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PriorConfig {
    pub lambda: Prior,
    pub gamma: Prior,
    /// θ prior table; the NK table when absent.
    pub theta: Option<Vec<Prior>>,
    /// Starting point `(λ, γ)` of the chains; θ starts at `theory.theta`.
    pub init_lambda: f64,
    pub init_gamma: f64,
    /// Rows of Φ₀ (`k x N`); zero when absent.
    pub phi0: Option<Vec<Vec<f64>>>,
}

impl Default for PriorConfig {
    fn default() -> Self {
        let u = Prior::Uniform { lo: 0.0, hi: 1e10 };
        Self {
            lambda: u,
            gamma: u,
            theta: None,
            init_lambda: 10.0,
            init_gamma: 1.0,
            phi0: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TheoryConfig {
    pub model: String,
    pub zlb: Vec<ZlbEpisode>,
    pub zlb_meas_var: f64,
    /// Deep parameters used where θ is fixed; the reference calibration when absent.
    pub theta: Option<Vec<f64>>,
}

impl Default for TheoryConfig {
    fn default() -> Self {
        Self {
            model: "nk".into(),
            zlb: Vec::new(),
            zlb_meas_var: 0.001,
            theta: None,
        }
    }
}

impl TheoryConfig {
    pub fn theta(&self) -> Vec<f64> {
        self.theta
            .clone()
            .unwrap_or_else(|| NkTheta::reference().to_vec())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForecastConfig {
    /// Row index (in the ingested panel) of the first and last origin.
    pub first_origin: Option<usize>,
    pub last_origin: Option<usize>,
    pub horizons: Vec<usize>,
    pub horizon_mode: HorizonMode,
    pub draws: usize,
    pub models: Vec<String>,
    pub freeze: bool,
    /// Hyper-parameter choice for the TC model when no estimate is supplied.
    pub tc: Option<TcHyper>,
    /// Gibbs settings of the standard TVP-VAR at each origin.
    pub std_tvp_chain: ChainConfig,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        Self {
            first_origin: None,
            last_origin: None,
            horizons: vec![1, 2, 4],
            horizon_mode: HorizonMode::Point,
            draws: 500,
            models: vec![
                "tc-tvp-var".into(),
                "std-tvp-var".into(),
                "minnesota".into(),
                "flat-var".into(),
            ],
            freeze: false,
            tc: None,
            std_tvp_chain: ChainConfig {
                iterations: 2000,
                burn_in: 1000,
                thin: 5,
                ..Default::default()
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IrfConfig {
    /// Reference periods (0-based within the estimation sample).
    pub dates: Vec<usize>,
    pub horizon: usize,
    /// Variables reported as cumulative responses.
    pub cumulative: Vec<bool>,
    /// Posterior draws used when no estimate is supplied.
    pub draws: usize,
    pub lambda: f64,
    pub gamma: f64,
}

impl Default for IrfConfig {
    fn default() -> Self {
        Self {
            dates: Vec::new(),
            horizon: 20,
            cumulative: vec![true, false, false],
            draws: 500,
            lambda: 10.0,
            gamma: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub lambdas: Vec<f64>,
    pub gammas: Vec<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            lambdas: (0..13)
                .map(|i| 10f64.powf(-1.0 + i as f64 * 0.25))
                .collect(),
            gammas: vec![0.0, 0.1, 0.3, 1.0, 3.0, 10.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub periods: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self { periods: 200 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("runs"),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)?;
        Ok((Self::parse(&text)?, text))
    }

    pub fn validate(&self) -> Result<()> {
        if self.theory.model != "nk" {
            return Err(Error::Config(format!(
                "unknown theory model '{}'",
                self.theory.model
            )));
        }
        self.prior.lambda.validate()?;
        self.prior.gamma.validate()?;
        for p in self.prior.theta.iter().flatten() {
            p.validate()?;
        }
        self.sampler.validate()?;
        if self.forecast.horizons.contains(&0) {
            return Err(Error::Config("forecast horizons start at 1".into()));
        }
        for m in &self.forecast.models {
            if !["tc-tvp-var", "std-tvp-var", "minnesota", "flat-var"].contains(&m.as_str()) {
                return Err(Error::Config(format!("unknown forecast model '{m}'")));
            }
        }
        Ok(())
    }

    pub fn hyper_priors(&self) -> HyperPriors {
        HyperPriors {
            lambda: self.prior.lambda,
            gamma: self.prior.gamma,
            theta: self.prior.theta.clone().unwrap_or_else(nk_prior_table),
        }
    }

    /// Serialised form used for hashing and for `meta.json`.
    pub fn canonical(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }
}
