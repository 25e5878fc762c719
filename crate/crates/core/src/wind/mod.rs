//! Wind data reduction: hourly log-wind profiles, Karhunen-Loeve bases,
//! dependence diagnostics and the rated-power curve.

mod curve;
mod data;
mod kl;
mod stats;
mod synth;

pub use curve::{build_power_curve, wind_to_power, PowerCurve, DEFAULT_BIN_WIDTH, DEFAULT_CUT_IN, DEFAULT_CUT_OUT};
pub use data::{
    hourly_average, parse_timestamp, parse_wind_csv, read_wind_csv, write_wind_csv, AveragingReport, WindRecord,
    WindSampleSet, HOURS, INTERVALS_PER_DAY,
};
pub use kl::{empirical_covariance, kl_decompose, KlBasis, ProjectedGerms};
pub use stats::{compare_to_normal, distance_correlation, empirical_cdf, EmpiricalCdf};
pub use synth::SyntheticWind;
