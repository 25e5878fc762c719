//! Forecast-consistent wind-power scenarios from a Matern covariance model.
//!
//! Per site: pick the Matern shape `(l_t, nu)`, turn the relative power
//! uncertainty `sigma_P` into a log-wind scale `sigma_W` through the power
//! curve, decompose `sigma_W^2 * K` on the hourly grid, and map germs
//! through the truncated KL expansion around the log of the forecast profile.

mod fit;
mod matern;
mod scenario;
mod sigma;

pub use fit::{fit_matern, MaternFit};
pub use matern::{matern, MaternKernel};
pub use scenario::{
    generate_scenarios, read_scenarios_binary, ForecastModel, ForecastSpec, GermSource, ScenarioSet, SiteForecast,
    SCENARIO_MAGIC,
};
pub use sigma::{relative_power_spread, sigma_w_from_sigma_p, MAX_SIGMA_W};
