use crate::error::{Error, Result};
use crate::wind::PowerCurve;

/// Hourly relative power spread produced by a +/- `sigma` log-wind
/// perturbation, averaged over hours where the curve responds.
///
/// For hour `t` with mean speed `w_t` the spread is
/// `(f(w_t e^sigma) - f(w_t e^-sigma)) / (2 f(w_t))`; for a monotone curve
/// this is half the one-sigma quantile band of `f(w_t e^(sigma Z))` relative
/// to the forecast power.
pub fn relative_power_spread(sigma: f64, sensitive: &[f64], curve: &PowerCurve) -> f64 {
    let total: f64 = sensitive
        .iter()
        .map(|&w| (curve.eval(w * sigma.exp()) - curve.eval(w * (-sigma).exp())) / (2.0 * curve.eval(w)))
        .sum();
    total / sensitive.len() as f64
}

/// Hours with nonzero forecast power and a nonzero local slope.
fn sensitive_hours(mean_wind: &[f64], curve: &PowerCurve) -> Vec<f64> {
    mean_wind
        .iter()
        .copied()
        .filter(|&w| {
            let f = curve.eval(w);
            f > 0.0 && curve.eval(w * 1.001) != curve.eval(w / 1.001)
        })
        .collect()
}

pub const MAX_SIGMA_W: f64 = 3.0;

/// Log-wind standard deviation that reproduces relative power uncertainty
/// `sigma_p` through `curve` at the forecast `mean_wind` (m/s), by bisection
/// on [`relative_power_spread`].
pub fn sigma_w_from_sigma_p(sigma_p: f64, mean_wind: &[f64], curve: &PowerCurve) -> Result<f64> {
    if !(sigma_p >= 0.0) || !sigma_p.is_finite() {
        return Err(Error::invalid(format!(
            "relative power uncertainty must be >= 0, got {sigma_p}"
        )));
    }
    if mean_wind.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::invalid("mean wind speeds must be positive"));
    }
    let hours = sensitive_hours(mean_wind, curve);
    if hours.is_empty() {
        return Err(Error::invalid(
            "mean wind never falls where the power curve responds; sigma_W is undefined",
        ));
    }
    if sigma_p == 0.0 {
        return Ok(0.0);
    }
    let spread = |s: f64| relative_power_spread(s, &hours, curve);
    // The spread rises with sigma until perturbed speeds cross cut-out, then
    // falls, so bracket the first crossing on a scan before bisecting.
    const SCAN: usize = 600;
    let mut lo = 0.0;
    let mut hi = None;
    let mut best: f64 = 0.0;
    for k in 1..=SCAN {
        let s = MAX_SIGMA_W * k as f64 / SCAN as f64;
        let v = spread(s);
        best = best.max(v);
        if v >= sigma_p {
            hi = Some(s);
            break;
        }
        lo = s;
    }
    let Some(mut hi) = hi else {
        return Err(Error::invalid(format!(
            "relative power uncertainty {sigma_p} is unreachable (largest spread is {best:.4})"
        )));
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if spread(mid) < sigma_p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_curve() -> PowerCurve {
        let speeds: Vec<f64> = (0..=100).map(|k| 0.5 + 0.5 * k as f64).collect();
        let values = speeds.iter().map(|w| w / 60.0).collect();
        PowerCurve::from_knots(speeds, values, 0.5, 50.5).unwrap()
    }

    #[test]
    fn zero_uncertainty() {
        assert_eq!(
            sigma_w_from_sigma_p(0.0, &[8.0; 24], &PowerCurve::default_turbine()).unwrap(),
            0.0
        );
    }

    #[test]
    fn linear_curve_is_asinh() {
        // f = w / 60 gives spread sinh(sigma) exactly.
        let s = sigma_w_from_sigma_p(0.35, &[10.0; 24], &linear_curve()).unwrap();
        assert!((s - 0.35f64.asinh()).abs() < 1e-9, "{s}");
    }

    #[test]
    fn flat_regions_rejected() {
        let c = PowerCurve::default_turbine();
        assert!(sigma_w_from_sigma_p(0.35, &[2.0; 24], &c).is_err());
        assert!(sigma_w_from_sigma_p(0.35, &[18.0; 24], &c).is_err());
    }
}
