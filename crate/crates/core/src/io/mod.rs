//! Data ingestion, configuration and run orchestration.

mod config;
mod panel;
pub mod run;

pub use config::{
    DataConfig, ForecastConfig, GridConfig, IrfConfig, OutputConfig, PriorConfig, RunConfig,
    SimulateConfig, TheoryConfig, VarConfig,
};
pub use panel::{emit_csv, ingest, ingest_reader, TimeSeriesPanel, Transform};
