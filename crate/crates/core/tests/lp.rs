mod common;

use common::{random_lp, vertex_enumeration};
use proptest::prelude::*;
use sedkit::lp::{parse_lp, solve_lp, write_lp, LinearProgram, LpOptions, LpStatus, Solver, VarStatus};

fn check_against_oracle(lp: &LinearProgram) -> Result<(), TestCaseError> {
    let opts = LpOptions::default();
    let sol = solve_lp(lp, &opts).unwrap();
    match vertex_enumeration(lp) {
        Some(best) => {
            prop_assert_eq!(sol.status, LpStatus::Optimal);
            prop_assert!(
                (sol.objective - best).abs() <= 1e-8 * (1.0 + best.abs()),
                "{} vs oracle {}",
                sol.objective,
                best
            );
            let gap = sol.objective - sol.dual_objective(lp);
            prop_assert!(gap.abs() <= 1e-7 * (1.0 + sol.objective.abs()), "duality gap {}", gap);
            // Primal feasibility of the reported point.
            for j in 0..lp.num_vars() {
                prop_assert!(
                    sol.x[j] >= lp.col_lower[j] - opts.feas_tol && sol.x[j] <= lp.col_upper[j] + opts.feas_tol
                );
            }
            for i in 0..lp.num_rows() {
                let a = sol.row_activity[i];
                prop_assert!(a >= lp.row_lower[i] - opts.feas_tol && a <= lp.row_upper[i] + opts.feas_tol);
            }
            // Reduced-cost sign consistency.
            for j in 0..lp.num_vars() {
                let d = sol.reduced_costs[j];
                match sol.basis.status[j] {
                    VarStatus::AtLower if lp.col_lower[j] < lp.col_upper[j] => prop_assert!(d >= -opts.opt_tol),
                    VarStatus::AtUpper if lp.col_lower[j] < lp.col_upper[j] => prop_assert!(d <= opts.opt_tol),
                    VarStatus::Basic => prop_assert!(d.abs() <= opts.opt_tol),
                    _ => {}
                }
            }
        }
        None => prop_assert_eq!(sol.status, LpStatus::Infeasible),
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matches_vertex_enumeration(seed in any::<u64>()) {
        check_against_oracle(&random_lp(seed, 6, 6))?;
    }

    #[test]
    fn repeated_solves_are_identical(seed in any::<u64>()) {
        let lp = random_lp(seed, 8, 8);
        let a = solve_lp(&lp, &LpOptions::default()).unwrap();
        let b = solve_lp(&lp, &LpOptions::default()).unwrap();
        prop_assert_eq!(&a.basis, &b.basis);
        prop_assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    }

    #[test]
    fn text_round_trip(seed in any::<u64>()) {
        let lp = random_lp(seed, 8, 8);
        prop_assert_eq!(parse_lp(&write_lp(&lp)).unwrap(), lp);
    }

    #[test]
    fn warm_start_agrees_with_cold(seed in any::<u64>(), shift in -3.0f64..3.0) {
        let mut lp = random_lp(seed, 6, 6);
        let opts = LpOptions::default();
        let mut solver = Solver::new(&lp, opts.clone()).unwrap();
        solver.run().unwrap();
        for i in 0..lp.num_rows() {
            lp.row_lower[i] += shift;
            lp.row_upper[i] += shift;
            solver.set_row_bounds(i, lp.row_lower[i], lp.row_upper[i]);
        }
        let warm = solver.solve().unwrap();
        let cold = solve_lp(&lp, &opts).unwrap();
        prop_assert_eq!(warm.status, cold.status);
        if cold.status == LpStatus::Optimal {
            prop_assert!((warm.objective - cold.objective).abs() <= 1e-8 * (1.0 + cold.objective.abs()));
        }
    }
}

#[test]
fn full_size_random_lps() {
    for seed in 0..40 {
        check_against_oracle(&random_lp(1000 + seed, 8, 8)).unwrap();
    }
}

#[test]
fn iteration_limit_is_reported() {
    let lp = random_lp(3, 8, 8);
    let opts = LpOptions {
        max_iterations: 0,
        ..LpOptions::default()
    };
    let s = solve_lp(&lp, &opts).unwrap();
    assert!(matches!(s.status, LpStatus::IterationLimit | LpStatus::Optimal));
}
