//! Deterministic dispatch instance: buses, lines, thermal units and wind sites.

mod case;
mod cost;
mod format;

pub use case::{Bus, GridCase, Line, RenewableSite, ThermalGenerator, DEFAULT_SHED_PENALTY};
pub use cost::{linearize_cost, PiecewiseLinearCost, DEFAULT_SEGMENTS};
pub use format::{parse_case, read_case, write_case};
