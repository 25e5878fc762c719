//! Bounded-variable revised simplex.
//!
//! Problems have the form
//!
//! ```text
//! minimise    c'x + offset
//! subject to  row_lower <= A x <= row_upper
//!             col_lower <=  x  <= col_upper
//! ```
//!
//! Internally each row gets a logical variable `s_i` with `A x - s = 0` and
//! `s_i` bounded by the row bounds, so every constraint is a bound. Cold
//! starts use the all-logical basis; the dual simplex is used whenever the
//! starting basis is dual feasible (always the case after a right-hand-side
//! change), the primal simplex otherwise.

mod lu;
mod simplex;
mod sparse;
mod text;

pub use simplex::Solver;
pub use sparse::CscMatrix;
pub use text::{parse_lp, write_lp};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub objective_offset: f64,
    pub col_lower: Vec<f64>,
    pub col_upper: Vec<f64>,
    pub row_lower: Vec<f64>,
    pub row_upper: Vec<f64>,
    /// `(row, column, value)`; duplicates are summed.
    pub triplets: Vec<(usize, usize, f64)>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.row_lower.len()
    }

    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.objective.push(cost);
        self.col_lower.push(lower);
        self.col_upper.push(upper);
        self.objective.len() - 1
    }

    pub fn add_row(&mut self, lower: f64, upper: f64, entries: &[(usize, f64)]) -> usize {
        let i = self.row_lower.len();
        self.row_lower.push(lower);
        self.row_upper.push(upper);
        self.triplets.extend(entries.iter().map(|&(j, v)| (i, j, v)));
        i
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        let m = self.num_rows();
        for (what, len, want) in [
            ("column lower bounds", self.col_lower.len(), n),
            ("column upper bounds", self.col_upper.len(), n),
            ("row upper bounds", self.row_upper.len(), m),
        ] {
            if len != want {
                return Err(Error::Dimension {
                    what,
                    expected: want,
                    got: len,
                });
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) || !self.objective_offset.is_finite() {
            return Err(Error::invalid("objective coefficients must be finite"));
        }
        let bounds_ok = |lo: &[f64], hi: &[f64]| {
            lo.iter()
                .zip(hi)
                .all(|(l, h)| !l.is_nan() && !h.is_nan() && l <= h && *l < f64::INFINITY && *h > f64::NEG_INFINITY)
        };
        if !bounds_ok(&self.col_lower, &self.col_upper) {
            return Err(Error::invalid("column bounds must satisfy lower <= upper"));
        }
        if !bounds_ok(&self.row_lower, &self.row_upper) {
            return Err(Error::invalid("row bounds must satisfy lower <= upper"));
        }
        for &(i, j, v) in &self.triplets {
            if i >= m || j >= n {
                return Err(Error::invalid(format!("matrix entry ({i}, {j}) outside {m} x {n}")));
            }
            if !v.is_finite() {
                return Err(Error::invalid(format!("matrix entry ({i}, {j}) is not finite")));
            }
        }
        Ok(())
    }

    pub fn matrix(&self) -> CscMatrix {
        CscMatrix::from_triplets(self.num_rows(), self.num_vars(), &self.triplets)
    }

    pub fn eval_objective(&self, x: &[f64]) -> f64 {
        self.objective_offset + self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl std::fmt::Display for LpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
            LpStatus::IterationLimit => "iteration-limit",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOptions {
    pub feas_tol: f64,
    pub opt_tol: f64,
    pub max_iterations: usize,
    /// Basis updates between refactorisations.
    pub refactor_interval: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub stall_limit: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            feas_tol: 1e-7,
            opt_tol: 1e-7,
            max_iterations: 1_000_000,
            refactor_interval: 100,
            stall_limit: 50,
        }
    }
}

/// Where a variable sits relative to the basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable held at zero.
    Zero,
}

/// A simplex basis over the `n` structural and `m` logical variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Basis {
    pub status: Vec<VarStatus>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LpDiagnostics {
    pub iterations: usize,
    pub primal_iterations: usize,
    pub dual_iterations: usize,
    pub refactorizations: usize,
    /// Dependent basis columns swapped for logicals during factorisation.
    pub singular_repairs: usize,
    pub max_primal_infeasibility: f64,
    pub max_dual_infeasibility: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub x: Vec<f64>,
    /// Row activities `A x`.
    pub row_activity: Vec<f64>,
    /// Row duals `y`; reduced costs are `c - A'y`.
    pub row_duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub basis: Basis,
    pub diagnostics: LpDiagnostics,
}

impl LpSolution {
    /// Lagrangian dual bound `offset + sum_j inf_{l_j <= z <= u_j} d_j z` over
    /// columns and rows, using the reported duals.
    pub fn dual_objective(&self, lp: &LinearProgram) -> f64 {
        let term = |d: f64, lo: f64, hi: f64| {
            if d > 0.0 {
                d * lo
            } else if d < 0.0 {
                d * hi
            } else {
                0.0
            }
        };
        let mut total = lp.objective_offset;
        for j in 0..lp.num_vars() {
            total += term(self.reduced_costs[j], lp.col_lower[j], lp.col_upper[j]);
        }
        for i in 0..lp.num_rows() {
            total += term(self.row_duals[i], lp.row_lower[i], lp.row_upper[i]);
        }
        total
    }
}

/// Solves `lp` from the all-logical basis.
pub fn solve_lp(lp: &LinearProgram, opts: &LpOptions) -> Result<LpSolution> {
    let mut solver = Solver::new(lp, opts.clone())?;
    solver.solve()
}

/// Solves `lp` starting from `basis` (typically from a related problem).
pub fn solve_lp_from(lp: &LinearProgram, opts: &LpOptions, basis: &Basis) -> Result<LpSolution> {
    let mut solver = Solver::new(lp, opts.clone())?;
    solver.load_basis(basis)?;
    solver.solve()
}
