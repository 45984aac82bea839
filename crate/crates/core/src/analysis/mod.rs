//! Forecast evaluation and structural impulse responses.

pub mod forecast;
pub mod irf;
pub mod score;

pub use forecast::{
    ml_grid, ml_grid_argmax, recursive_forecast, score, write_scores, FlatVarForecaster,
    ForecastRecord, ForecastRun, Forecaster, HorizonMode, KnownVar, MinnesotaForecaster, ScoreRow,
    StdTvpForecaster, TcForecaster, TcHyper,
};
pub use irf::{irf, IrfResult};
pub use score::{crps, rmse};
