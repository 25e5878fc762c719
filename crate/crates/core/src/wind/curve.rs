use std::path::Path;

use crate::error::{Error, Result};

pub const DEFAULT_CUT_IN: f64 = 3.2;
pub const DEFAULT_CUT_OUT: f64 = 26.0;
pub const DEFAULT_BIN_WIDTH: f64 = 0.05;

/// Rated output as a fraction of nameplate versus wind speed.
///
/// Bin-averaged knots joined by a natural cubic spline; zero outside
/// `[cut_in, cut_out]`, constant beyond the first/last knot inside it, and
/// clamped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerCurve {
    pub speeds: Vec<f64>,
    pub values: Vec<f64>,
    /// Spline second derivatives at the knots.
    second: Vec<f64>,
    pub cut_in: f64,
    pub cut_out: f64,
}

impl PowerCurve {
    /// Spline through explicit knots.
    pub fn from_knots(speeds: Vec<f64>, values: Vec<f64>, cut_in: f64, cut_out: f64) -> Result<Self> {
        if speeds.is_empty() || speeds.len() != values.len() {
            return Err(Error::invalid("power curve needs matching, nonempty knot lists"));
        }
        if speeds.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("power curve knots must be strictly increasing"));
        }
        if !(cut_in < cut_out) {
            return Err(Error::invalid("cut-in speed must be below cut-out speed"));
        }
        let second = natural_spline(&speeds, &values);
        Ok(PowerCurve {
            speeds,
            values,
            second,
            cut_in,
            cut_out,
        })
    }

    /// Per-unit output at wind speed `w` (m/s).
    pub fn eval(&self, w: f64) -> f64 {
        if !(w >= self.cut_in && w <= self.cut_out) {
            return 0.0;
        }
        let n = self.speeds.len();
        let raw = if n == 1 || w <= self.speeds[0] {
            self.values[0]
        } else if w >= self.speeds[n - 1] {
            self.values[n - 1]
        } else {
            let k = self.speeds.partition_point(|s| *s <= w) - 1;
            let (x0, x1) = (self.speeds[k], self.speeds[k + 1]);
            let h = x1 - x0;
            let a = (x1 - w) / h;
            let b = (w - x0) / h;
            a * self.values[k]
                + b * self.values[k + 1]
                + ((a * a * a - a) * self.second[k] + (b * b * b - b) * self.second[k + 1]) * h * h / 6.0
        };
        raw.clamp(0.0, 1.0)
    }

    /// A generic utility-scale turbine: smooth rise from cut-in to rated at
    /// 13.5 m/s, flat to cut-out. Knots every 0.25 m/s.
    pub fn default_turbine() -> Self {
        let rated = 13.5;
        let shape = |w: f64| {
            let u = ((w - DEFAULT_CUT_IN) / (rated - DEFAULT_CUT_IN)).clamp(0.0, 1.0);
            u * u * (3.0 - 2.0 * u)
        };
        let speeds: Vec<f64> = (0..=((DEFAULT_CUT_OUT - DEFAULT_CUT_IN) / 0.25).round() as usize)
            .map(|k| DEFAULT_CUT_IN + 0.25 * k as f64)
            .collect();
        let values = speeds.iter().map(|&w| shape(w)).collect();
        PowerCurve::from_knots(speeds, values, DEFAULT_CUT_IN, DEFAULT_CUT_OUT).expect("valid default curve")
    }

    /// Knot table as `speed_mps,power_pu` CSV.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("speed_mps,power_pu\n");
        for (w, p) in self.speeds.iter().zip(&self.values) {
            s.push_str(&format!("{w},{p}\n"));
        }
        s
    }

    /// Reads a knot table written by [`PowerCurve::to_csv`]; the first and
    /// last knot speeds become cut-in and cut-out.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
        let mut speeds = Vec::new();
        let mut values = Vec::new();
        for (k, row) in rdr.deserialize::<(f64, f64)>().enumerate() {
            let (w, p) = row.map_err(|e| Error::Syntax {
                path: path.display().to_string(),
                line: k + 2,
                msg: e.to_string(),
            })?;
            speeds.push(w);
            values.push(p);
        }
        let (lo, hi) = match (speeds.first(), speeds.last()) {
            (Some(a), Some(b)) => (*a, *b),
            _ => return Err(Error::data(format!("{}: empty power curve", path.display()))),
        };
        PowerCurve::from_knots(speeds, values, lo, hi)
    }
}

/// Natural cubic spline second derivatives (Thomas algorithm).
fn natural_spline(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        let a = h0 / 6.0;
        let b = (h0 + h1) / 3.0;
        let c = h1 / 6.0;
        let d = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        let denom = b - a * c_prime[i - 1];
        c_prime[i] = c / denom;
        d_prime[i] = (d - a * d_prime[i - 1]) / denom;
    }
    for i in (1..n - 1).rev() {
        m[i] = d_prime[i] - c_prime[i] * m[i + 1];
    }
    m
}

/// Fits a curve to `(speed, power)` scatter: mean power per bin of width
/// `bin_width`, knots at the centres of non-empty bins inside the cut range.
/// `rated` converts power to per-unit.
pub fn build_power_curve(
    speeds: &[f64],
    powers: &[f64],
    bin_width: f64,
    rated: f64,
    cut_in: f64,
    cut_out: f64,
) -> Result<PowerCurve> {
    if speeds.len() != powers.len() {
        return Err(Error::Dimension {
            what: "power scatter length",
            expected: speeds.len(),
            got: powers.len(),
        });
    }
    if !(bin_width > 0.0) || !(rated > 0.0) {
        return Err(Error::invalid("bin width and rated power must be positive"));
    }
    let nbins = ((cut_out - cut_in) / bin_width).ceil().max(1.0) as usize;
    let mut sum = vec![0.0; nbins];
    let mut count = vec![0usize; nbins];
    for (&w, &p) in speeds.iter().zip(powers) {
        if !(w >= cut_in && w < cut_out) || !p.is_finite() {
            continue;
        }
        let b = (((w - cut_in) / bin_width) as usize).min(nbins - 1);
        sum[b] += p / rated;
        count[b] += 1;
    }
    let (knots, values): (Vec<f64>, Vec<f64>) = (0..nbins)
        .filter(|&b| count[b] > 0)
        .map(|b| (cut_in + (b as f64 + 0.5) * bin_width, sum[b] / count[b] as f64))
        .unzip();
    if knots.is_empty() {
        return Err(Error::data("no scatter points inside the cut-in/cut-out range"));
    }
    PowerCurve::from_knots(knots, values, cut_in, cut_out)
}

/// `nameplate * curve(exp(W_L))` per hour.
pub fn wind_to_power(curve: &PowerCurve, nameplate: f64, log_wind: &[f64]) -> Vec<f64> {
    log_wind.iter().map(|wl| nameplate * curve.eval(wl.exp())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_outside_cut_range() {
        let c = PowerCurve::default_turbine();
        assert_eq!(c.eval(2.0), 0.0);
        assert_eq!(c.eval(26.5), 0.0);
        assert!(c.eval(8.0) > 0.2 && c.eval(8.0) < 0.8);
        assert_eq!(c.eval(20.0), 1.0);
    }

    #[test]
    fn linear_scatter_reproduced() {
        let speeds: Vec<f64> = (0..200_000)
            .map(|k| 3.2 + (26.0 - 3.2) * (k as f64 + 0.5) / 200_000.0)
            .collect();
        let powers: Vec<f64> = speeds.iter().map(|w| w / 30.0).collect();
        let c = build_power_curve(&speeds, &powers, 0.05, 1.0, 3.2, 26.0).unwrap();
        for &w in &c.speeds {
            assert!((c.eval(w) - w / 30.0).abs() < 1e-3);
        }
        // Between knots too, since the spline of a line is the line.
        assert!((c.eval(10.013) - 10.013 / 30.0).abs() < 1e-3);
    }

    #[test]
    fn empty_interior_bins_interpolated() {
        let speeds = [4.0, 4.01, 9.0, 9.01];
        let powers = [0.1, 0.1, 0.6, 0.6];
        let c = build_power_curve(&speeds, &powers, 0.05, 1.0, 3.2, 26.0).unwrap();
        let mid = c.eval(6.5);
        assert!(mid > 0.1 && mid < 0.6);
    }

    #[test]
    fn all_empty_rejected() {
        assert!(build_power_curve(&[1.0, 2.0], &[0.0, 0.0], 0.05, 1.0, 3.2, 26.0).is_err());
    }

    #[test]
    fn spline_interpolates_knots() {
        let xs = vec![0.0, 1.0, 2.5, 4.0];
        let ys = vec![0.0, 0.5, 0.2, 0.9];
        let c = PowerCurve::from_knots(xs.clone(), ys.clone(), 0.0, 4.0).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert!((c.eval(*x) - y).abs() < 1e-15);
        }
    }

    #[test]
    fn wind_to_power_uses_exp() {
        let c = PowerCurve::default_turbine();
        let p = wind_to_power(&c, 50.0, &[8f64.ln(), 1f64.ln()]);
        assert!((p[0] - 50.0 * c.eval(8.0)).abs() < 1e-12);
        assert_eq!(p[1], 0.0);
    }
}
