use super::matern::MaternKernel;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Outcome of a Matern fit.
#[derive(Debug, Clone, PartialEq)]
pub struct MaternFit {
    /// Unit-variance kernel.
    pub kernel: MaternKernel,
    /// Weighted sum of squared correlation residuals.
    pub residual: f64,
    /// Best residual after each multi-start, in start order.
    pub history: Vec<f64>,
}

const START_LENGTHS: [f64; 5] = [2.0, 5.0, 10.0, 20.0, 40.0];
const START_NUS: [f64; 4] = [0.3, 0.5, 1.0, 2.0];

/// Least-squares fit of `(l_t, nu)` to a covariance matrix.
///
/// The matrix is normalised by its diagonal and the correlations are
/// pooled by lag (each lag weighted by how many anchor pairs it has). The
/// objective is minimised by Nelder-Mead in `(ln l, ln nu)` from a fixed
/// grid of starting points, so the result is deterministic.
pub fn fit_matern(cov: &Matrix) -> Result<MaternFit> {
    let n = cov.rows();
    if n < 3 || cov.cols() != n {
        return Err(Error::invalid("Matern fit needs a square covariance of size >= 3"));
    }
    if cov.asymmetry() > 1e-8 * (1.0 + cov.max_abs()) {
        return Err(Error::invalid("covariance is not symmetric"));
    }
    if (0..n).any(|i| !(cov[(i, i)] > 0.0)) {
        return Err(Error::invalid("covariance diagonal must be positive"));
    }
    let mut sum = vec![0.0; n];
    let mut count = vec![0.0; n];
    for i in 0..n {
        for j in i + 1..n {
            let rho = cov[(i, j)] / (cov[(i, i)] * cov[(j, j)]).sqrt();
            sum[j - i] += rho;
            count[j - i] += 1.0;
        }
    }
    let lags: Vec<(f64, f64, f64)> = (1..n).map(|h| (h as f64, sum[h] / count[h], count[h])).collect();
    if lags.iter().all(|(_, rho, _)| *rho > 0.999) {
        return Err(Error::invalid("covariance shows no decay with lag; nothing to fit"));
    }
    let objective = |p: &[f64; 2]| -> f64 {
        let (l, nu) = (p[0].exp(), p[1].exp());
        if !(0.05..=1e4).contains(&l) || !(0.02..=50.0).contains(&nu) {
            return f64::INFINITY;
        }
        let k = MaternKernel {
            length_scale: l,
            smoothness: nu,
            variance: 1.0,
        };
        lags.iter().map(|(h, rho, w)| w * (k.eval(*h) - rho).powi(2)).sum()
    };

    let mut best: Option<([f64; 2], f64)> = None;
    let mut history = Vec::new();
    for l0 in START_LENGTHS {
        for nu0 in START_NUS {
            let (p, f) = nelder_mead(&objective, [l0.ln(), nu0.ln()], 0.3, 2000);
            if best.as_ref().is_none_or(|(_, fb)| f < *fb) {
                best = Some((p, f));
            }
            history.push(best.as_ref().map_or(f64::INFINITY, |b| b.1));
        }
    }
    let (p, residual) = best.expect("at least one start");
    if !residual.is_finite() {
        return Err(Error::numerical(format!(
            "Matern fit failed; residual history {history:?}"
        )));
    }
    Ok(MaternFit {
        kernel: MaternKernel::normalized(p[0].exp(), p[1].exp())?,
        residual,
        history,
    })
}

/// Plain Nelder-Mead on two parameters.
fn nelder_mead(f: &impl Fn(&[f64; 2]) -> f64, x0: [f64; 2], step: f64, max_iter: usize) -> ([f64; 2], f64) {
    let mut simplex = [x0, [x0[0] + step, x0[1]], [x0[0], x0[1] + step]];
    let mut values = simplex.map(|p| f(&p));
    for _ in 0..max_iter {
        let mut order = [0, 1, 2];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.map(|k| simplex[k]);
        values = order.map(|k| values[k]);
        let spread = (values[2] - values[0]).abs();
        let size = (simplex[2][0] - simplex[0][0])
            .abs()
            .max((simplex[2][1] - simplex[0][1]).abs());
        if spread <= 1e-16 * (1.0 + values[0].abs()) && size < 1e-10 {
            break;
        }
        let c = [
            (simplex[0][0] + simplex[1][0]) / 2.0,
            (simplex[0][1] + simplex[1][1]) / 2.0,
        ];
        let along = |t: f64| [c[0] + t * (simplex[2][0] - c[0]), c[1] + t * (simplex[2][1] - c[1])];
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            if fe < fr {
                simplex[2] = xe;
                values[2] = fe;
            } else {
                simplex[2] = xr;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = xr;
            values[2] = fr;
        } else {
            let (xc, fc) = if fr < values[2] {
                let x = along(-0.5);
                (x, f(&x))
            } else {
                let x = along(0.5);
                (x, f(&x))
            };
            if fc < values[2].min(fr) {
                simplex[2] = xc;
                values[2] = fc;
            } else {
                for k in 1..3 {
                    simplex[k] = [
                        simplex[0][0] + 0.5 * (simplex[k][0] - simplex[0][0]),
                        simplex[0][1] + 0.5 * (simplex[k][1] - simplex[0][1]),
                    ];
                    values[k] = f(&simplex[k]);
                }
            }
        }
    }
    let k = (0..3)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("three vertices");
    (simplex[k], values[k])
}
