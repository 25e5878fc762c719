//! Stochastic economic dispatch under wind uncertainty.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`] holds the deterministic network case and its text format.
//! * [`lp`] is a bounded-variable revised simplex solver.
//! * [`wind`] turns wind measurements into Karhunen-Loeve bases and diagnostics.
//! * [`forecast`] builds forecast-consistent wind power scenarios from Matern kernels.
//! * [`sed`] assembles and solves the per-scenario dispatch LP.
//! * [`pce`] provides Hermite chaos bases, nested sparse grids and projection.
//! * [`estimate`] compares Monte Carlo and chaos estimates of expected cost.
//! * [`app`] wires everything into the `sedkit` command-line tool.

// NaN-rejecting `!(x > 0.0)` checks and index loops over matrices are
// deliberate; quadrature constants carry more digits than f64 holds.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::excessive_precision
)]

pub mod app;
pub mod error;
pub mod estimate;
pub mod forecast;
pub mod grid;
pub mod linalg;
pub mod lp;
pub mod model;
pub mod pce;
pub mod rng;
pub mod sed;
pub mod special;
pub mod wind;

pub use error::{Error, Result};
