//! The `sedkit` command-line tool.

mod commands;
mod config;

pub use commands::{digest, dispatch, kl, scenarios, study, synth_wind, DispatchInput, Output};
pub use config::{
    CaseConfig, Diurnal, ExperimentConfig, ForecastConfig, ForecastSiteConfig, StudyConfig, SyntheticConfig,
    SyntheticSite, WindConfig, WindFile, SCHEMA,
};
