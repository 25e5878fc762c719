//! Multi-period DC economic dispatch for a fixed commitment.
//!
//! For each period `t`, bus `i`, line `e` and committed generator `g`:
//!
//! ```text
//! min   sum_g,t cost_g(p_g^t) + M sum_i,t q_i^t
//! s.t.  sum_{g at i} p_g^t + sum_{r at i} (p_r^t - c_i^t)
//!         + sum_{e into i} f_e^t - sum_{e out of i} f_e^t + q_i^t = D_i^t
//!       f_e^t = base * B_e (theta_from - theta_to),  F_min <= f_e^t <= F_max
//!       x P_min <= p_g^t <= x P_max
//!       p_g^t - p_g^{t-1} <= R^u x^{t-1} + S^u (x^t - x^{t-1}) + P_max (1 - x^t)
//!       p_g^{t-1} - p_g^t <= R^d x^t + S^d (x^{t-1} - x^t) + P_max (1 - x^{t-1})
//!       0 <= q_i^t <= D_i^t,  0 <= c_i^t <= sum_{r at i} p_r^t
//! ```
//!
//! `cost_g` is the piecewise-linear interpolant of the quadratic cost, `c` is
//! renewable curtailment (free, so that surplus wind never makes the LP
//! infeasible), and each island's reference angle is fixed at zero. Ramp rows
//! exist only from the second period on.

mod evaluate;
mod instance;

pub use evaluate::DispatchEvaluator;
pub use instance::{build_instance, DispatchInstance, DispatchOptions, DispatchSolution, VariableMap};
