//! Theory-coherent time-varying-parameter VARs.
//!
//! The crate builds a Normal-Inverse-Wishart shrinkage prior for a random-walk
//! TVP-VAR from the population moments of a linear rational-expectations model,
//! evaluates the conjugate posterior and closed-form marginal likelihood, samples
//! hyper-parameters and deep parameters by random-walk Metropolis, and produces
//! forecasts and theory-identified impulse responses.
//!
//! Module map:
//! - [`theory`]: RE solver (QZ), anticipated-regime recursion, the small NK model,
//!   population moments.
//! - [`prior`]: random-walk prior, theory update, integrating constant,
//!   conditional chain, dummy observations.
//! - [`posterior`]: static design, conditional posterior, marginal likelihood
//!   and its fit/penalty decomposition.
//! - [`sampler`]: hyper-parameter RWM, conjugate draws, chains and draw storage.
//! - [`baselines`]: flat VAR, Minnesota BVAR, standard TVP-VAR.
//! - [`analysis`]: recursive forecasts, RMSE/CRPS, impulse responses.
//! - [`io`]: data ingestion, configuration, run directories.

extern crate lapack_src;

pub mod analysis;
pub mod baselines;
pub mod error;
pub mod io;
pub mod linalg;
pub mod posterior;
pub mod prior;
pub mod sampler;
pub mod theory;

pub use error::{Error, Result};
