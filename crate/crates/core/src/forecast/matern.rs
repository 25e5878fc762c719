use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::special::bessel_k;

/// Matern covariance
/// `k(dt) = s2 * 2^(1-nu) / Gamma(nu) * z^nu * K_nu(z)`, `z = sqrt(2 nu) dt / l`,
/// with `k(0) = s2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaternKernel {
    /// Length scale in hours.
    pub length_scale: f64,
    pub smoothness: f64,
    /// Variance scale sigma_W^2 in (log m/s)^2.
    pub variance: f64,
}

impl MaternKernel {
    pub fn new(length_scale: f64, smoothness: f64, variance: f64) -> Result<Self> {
        if !(length_scale > 0.0) || !length_scale.is_finite() {
            return Err(Error::invalid(format!(
                "Matern length scale must be positive, got {length_scale}"
            )));
        }
        if !(smoothness > 0.0) || !smoothness.is_finite() {
            return Err(Error::invalid(format!(
                "Matern smoothness must be positive, got {smoothness}"
            )));
        }
        if !(variance >= 0.0) || !variance.is_finite() {
            return Err(Error::invalid(format!(
                "Matern variance must be nonnegative, got {variance}"
            )));
        }
        Ok(MaternKernel {
            length_scale,
            smoothness,
            variance,
        })
    }

    /// Unit-variance kernel with the same shape.
    pub fn normalized(length_scale: f64, smoothness: f64) -> Result<Self> {
        Self::new(length_scale, smoothness, 1.0)
    }

    pub fn eval(&self, dt: f64) -> f64 {
        let nu = self.smoothness;
        let z = (2.0 * nu).sqrt() * dt.abs() / self.length_scale;
        if z < 1e-12 {
            return self.variance;
        }
        let k = bessel_k(nu, z);
        if k == 0.0 {
            return 0.0;
        }
        // Work in logs: z^nu and 1/Gamma(nu) overflow separately for large nu.
        let log_pref = (1.0 - nu) * std::f64::consts::LN_2 - gamma(nu).ln() + nu * z.ln();
        self.variance * (log_pref + k.ln()).exp()
    }

    /// `K[i][j] = k(|i - j| * spacing)` on an `n`-point grid.
    pub fn matrix(&self, n: usize, spacing: f64) -> Matrix {
        let lags: Vec<f64> = (0..n).map(|d| self.eval(d as f64 * spacing)).collect();
        Matrix::from_fn(n, n, |i, j| lags[i.abs_diff(j)])
    }
}

/// Convenience wrapper for one evaluation.
pub fn matern(dt: f64, kernel: &MaternKernel) -> Result<f64> {
    if dt < 0.0 {
        return Err(Error::invalid("Matern lag must be nonnegative"));
    }
    Ok(kernel.eval(dt))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_lag_is_variance() {
        let k = MaternKernel::new(11.4, 0.56, 0.2).unwrap();
        assert_eq!(k.eval(0.0), 0.2);
    }

    #[test]
    fn exponential_special_case() {
        let k = MaternKernel::new(7.0, 0.5, 1.3).unwrap();
        for dt in [1.0, 5.0, 12.0] {
            let want = 1.3 * (-dt / 7.0f64).exp();
            assert!((k.eval(dt) - want).abs() < 1e-14, "{dt}");
        }
    }

    #[test]
    fn nu_three_halves_closed_form() {
        let k = MaternKernel::new(4.0, 1.5, 1.0).unwrap();
        for dt in [0.5, 2.0, 9.0] {
            let z = 3f64.sqrt() * dt / 4.0;
            assert!((k.eval(dt) - (1.0 + z) * (-z).exp()).abs() < 1e-13);
        }
    }

    #[test]
    fn matches_high_precision_reference() {
        // 30-digit evaluations of the normalised kernel at lags 1, 3, 7, 12, 23 h.
        let table = [
            (
                11.4,
                0.56,
                [
                    0.932_131_297_651_117_2,
                    0.792_536_916_711_123_3,
                    0.561_997_556_771_114_6,
                    0.361_130_746_913_001_2,
                    0.134_075_748_775_470_34,
                ],
            ),
            (
                11.15,
                0.57,
                [
                    0.932_832_445_051_307_1,
                    0.791_682_852_310_714_5,
                    0.557_506_110_289_298_1,
                    0.354_373_730_430_485_7,
                    0.128_062_319_425_393_82,
                ],
            ),
            (
                9.79,
                0.78,
                [
                    0.957_181_311_040_559,
                    0.822_237_395_552_639_5,
                    0.560_782_587_947_567_8,
                    0.328_473_030_459_615_5,
                    0.093_158_202_851_185_93,
                ],
            ),
        ];
        for (l, nu, want) in table {
            let k = MaternKernel::normalized(l, nu).unwrap();
            for (h, w) in [1.0, 3.0, 7.0, 12.0, 23.0].iter().zip(want) {
                assert!((k.eval(*h) - w).abs() < 1e-13, "l={l} nu={nu} h={h}");
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(MaternKernel::new(0.0, 0.5, 1.0).is_err());
        assert!(MaternKernel::new(1.0, -0.5, 1.0).is_err());
        assert!(matern(-1.0, &MaternKernel::new(1.0, 0.5, 1.0).unwrap()).is_err());
    }

    #[test]
    fn decays_on_daily_grid() {
        for (l, nu) in [(11.4, 0.56), (11.15, 0.57), (9.79, 0.78)] {
            let k = MaternKernel::normalized(l, nu).unwrap();
            let mut prev = 1.0;
            for h in 1..24 {
                let v = k.eval(h as f64);
                assert!(v > 0.0 && v < prev);
                prev = v;
            }
        }
    }
}
