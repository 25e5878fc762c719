//! Hermite polynomial chaos on nested sparse grids.

mod hermite;
mod quadrature;
mod surrogate;

pub use hermite::{binomial, factorial, hermite, hermite_all, MultiIndexSet};
pub use quadrature::{build_sparse_grid, nested_rule, rule_points, SparseGrid, MAX_LEVEL};
pub use surrogate::{evaluate_on_grid, project, project_values, PceSurrogate};
