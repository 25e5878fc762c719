use crate::error::{Error, Result};

use super::ThermalGenerator;

/// Segment count used when the caller does not choose one.
pub const DEFAULT_SEGMENTS: usize = 3;

/// Convex piecewise-linear interpolant of a quadratic cost curve.
///
/// `breakpoints` are equally spaced on `[p_min, p_max]`; `slopes[k]` is the
/// marginal cost on `[breakpoints[k], breakpoints[k + 1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearCost {
    pub breakpoints: Vec<f64>,
    /// Cost at `p_min` for a committed unit, including the no-load term.
    pub base_cost: f64,
    pub slopes: Vec<f64>,
}

impl PiecewiseLinearCost {
    pub fn segments(&self) -> usize {
        self.slopes.len()
    }

    pub fn widths(&self) -> impl Iterator<Item = f64> + '_ {
        self.breakpoints.windows(2).map(|w| w[1] - w[0])
    }

    /// Evaluates the interpolant at `p` (clamped into the breakpoint range).
    pub fn eval(&self, p: f64) -> f64 {
        let lo = self.breakpoints[0];
        let mut cost = self.base_cost;
        let mut left = lo;
        for (k, &slope) in self.slopes.iter().enumerate() {
            let right = self.breakpoints[k + 1];
            if p <= left {
                break;
            }
            cost += slope * (p.min(right) - left);
            left = right;
        }
        cost
    }
}

/// Interpolates `a + b p + c p^2` at `segments + 1` equally spaced points of
/// `[p_min, p_max]`.
pub fn linearize_cost(gen: &ThermalGenerator, segments: usize) -> Result<PiecewiseLinearCost> {
    if segments == 0 {
        return Err(Error::invalid("cost linearization needs at least one segment"));
    }
    if !(gen.p_min <= gen.p_max) {
        return Err(Error::invalid(format!("generator {} has p_min > p_max", gen.id)));
    }
    let quad = |p: f64| gen.cost_a + gen.cost_b * p + gen.cost_c * p * p;
    let width = (gen.p_max - gen.p_min) / segments as f64;
    let breakpoints: Vec<f64> = (0..=segments)
        .map(|k| {
            if k == segments {
                gen.p_max
            } else {
                gen.p_min + width * k as f64
            }
        })
        .collect();
    let slopes = breakpoints
        .windows(2)
        .map(|w| {
            if w[1] > w[0] {
                (quad(w[1]) - quad(w[0])) / (w[1] - w[0])
            } else {
                // Degenerate range: marginal cost at the single operating point.
                gen.cost_b + 2.0 * gen.cost_c * w[0]
            }
        })
        .collect();
    Ok(PiecewiseLinearCost {
        base_cost: quad(gen.p_min),
        breakpoints,
        slopes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(a: f64, b: f64, c: f64, lo: f64, hi: f64) -> ThermalGenerator {
        ThermalGenerator {
            id: 1,
            bus: 1,
            p_min: lo,
            p_max: hi,
            cost_a: a,
            cost_b: b,
            cost_c: c,
            ramp_up: 0.0,
            ramp_down: 0.0,
            startup: 0.0,
            shutdown: 0.0,
            commitment: vec![1],
        }
    }

    #[test]
    fn linear_cost_has_single_slope() {
        for segs in [1, 2, 5] {
            let pl = linearize_cost(&unit(3.0, 17.5, 0.0, 10.0, 90.0), segs).unwrap();
            assert!(pl.slopes.iter().all(|s| (s - 17.5).abs() < 1e-12));
        }
    }

    #[test]
    fn unit_quadratic_two_segments() {
        let pl = linearize_cost(&unit(0.0, 0.0, 1.0, 0.0, 2.0), 2).unwrap();
        assert_eq!(pl.breakpoints, vec![0.0, 1.0, 2.0]);
        assert_eq!(pl.slopes, vec![1.0, 3.0]);
        assert_eq!(pl.base_cost, 0.0);
    }

    #[test]
    fn zero_segments_rejected() {
        assert!(linearize_cost(&unit(0.0, 1.0, 1.0, 0.0, 2.0), 0).is_err());
    }

    #[test]
    fn chord_bounds_quadratic_and_gap_shrinks_quadratically() {
        let g = unit(5.0, 20.0, 0.04, 10.0, 200.0);
        let gap = |segs: usize| {
            let pl = linearize_cost(&g, segs).unwrap();
            for w in pl.slopes.windows(2) {
                assert!(w[0] <= w[1]);
            }
            for &bp in &pl.breakpoints {
                assert!((pl.eval(bp) - g.cost(0, bp)).abs() < 1e-9);
            }
            (0..=4000)
                .map(|k| {
                    let p = g.p_min + (g.p_max - g.p_min) * k as f64 / 4000.0;
                    let d = pl.eval(p) - g.cost(0, p);
                    assert!(d >= -1e-9, "interpolant below the quadratic at {p}");
                    d
                })
                .fold(0.0, f64::max)
        };
        let g4 = gap(4);
        let g8 = gap(8);
        assert!((g4 / g8 - 4.0).abs() < 0.05, "ratio {}", g4 / g8);
    }
}
