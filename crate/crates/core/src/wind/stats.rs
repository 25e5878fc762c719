use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Right-continuous empirical distribution function.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::data("empirical CDF of an empty column"));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::data("empirical CDF input contains NaN"));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(EmpiricalCdf { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Fraction of samples `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|v| *v <= x) as f64 / self.len() as f64
    }

    /// Distinct jump locations with the CDF value reached at each.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        let n = self.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &v) in self.sorted.iter().enumerate() {
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 = (i + 1) as f64 / n,
                _ => out.push((v, (i + 1) as f64 / n)),
            }
        }
        out
    }

    /// Kolmogorov-Smirnov distance to the standard normal.
    pub fn ks_standard_normal(&self) -> f64 {
        let normal = Normal::standard();
        let n = self.len() as f64;
        let mut d: f64 = 0.0;
        for (i, &v) in self.sorted.iter().enumerate() {
            let f = normal.cdf(v);
            d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
        }
        d
    }
}

pub fn empirical_cdf(column: &[f64]) -> Result<EmpiricalCdf> {
    EmpiricalCdf::new(column)
}

pub fn compare_to_normal(column: &[f64]) -> Result<f64> {
    Ok(EmpiricalCdf::new(column)?.ks_standard_normal())
}

/// Sample distance correlation of Szekely, Rizzo and Bakirov.
///
/// Uses the identity
/// `sum_ij A_ij B_ij = sum_ij a_ij b_ij - 2 n sum_i abar_i bbar_i + n^2 abar bbar`
/// for double-centred distance matrices, so memory stays O(n). Constant
/// inputs give 0.
pub fn distance_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::Dimension {
            what: "distance correlation sample length",
            expected: n,
            got: y.len(),
        });
    }
    if n < 2 {
        return Err(Error::data("distance correlation needs at least 2 samples"));
    }
    let row_means = |v: &[f64]| -> (Vec<f64>, f64) {
        let m: Vec<f64> = v
            .iter()
            .map(|a| v.iter().map(|b| (a - b).abs()).sum::<f64>() / n as f64)
            .collect();
        let grand = m.iter().sum::<f64>() / n as f64;
        (m, grand)
    };
    let (ax, gx) = row_means(x);
    let (by, gy) = row_means(y);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (mut rxy, mut rxx, mut ryy) = (0.0, 0.0, 0.0);
        for j in 0..n {
            let a = (x[i] - x[j]).abs();
            let b = (y[i] - y[j]).abs();
            rxy += a * b;
            rxx += a * a;
            ryy += b * b;
        }
        sxy += rxy;
        sxx += rxx;
        syy += ryy;
    }
    let nf = n as f64;
    let centred = |s: f64, a: &[f64], ga: f64, b: &[f64], gb: f64| {
        let cross: f64 = a.iter().zip(b).map(|(p, q)| p * q).sum();
        (s - 2.0 * nf * cross + nf * nf * ga * gb) / (nf * nf)
    };
    let dcov = centred(sxy, &ax, gx, &by, gy);
    let dvx = centred(sxx, &ax, gx, &ax, gx);
    let dvy = centred(syy, &by, gy, &by, gy);
    if dvx <= 0.0 || dvy <= 0.0 {
        return Ok(0.0);
    }
    Ok((dcov.max(0.0) / (dvx * dvy).sqrt()).sqrt().clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct double-centring with full n x n matrices.
    fn dcor_oracle(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len();
        let centre = |v: &[f64]| {
            let d: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| (v[i] - v[j]).abs()).collect()).collect();
            let row: Vec<f64> = d.iter().map(|r| r.iter().sum::<f64>() / n as f64).collect();
            let grand = row.iter().sum::<f64>() / n as f64;
            (0..n)
                .map(|i| (0..n).map(|j| d[i][j] - row[i] - row[j] + grand).collect::<Vec<_>>())
                .collect::<Vec<_>>()
        };
        let (a, b) = (centre(x), centre(y));
        let dot = |p: &Vec<Vec<f64>>, q: &Vec<Vec<f64>>| {
            p.iter()
                .flatten()
                .zip(q.iter().flatten())
                .map(|(u, v)| u * v)
                .sum::<f64>()
                / (n * n) as f64
        };
        (dot(&a, &b) / (dot(&a, &a) * dot(&b, &b)).sqrt()).sqrt()
    }

    #[test]
    fn two_point_cdf() {
        let c = empirical_cdf(&[1.0, -1.0]).unwrap();
        assert_eq!(c.steps(), vec![(-1.0, 0.5), (1.0, 1.0)]);
        assert_eq!(c.eval(-1.0), 0.5);
        assert_eq!(c.eval(-1.0 - 1e-12), 0.0);
        assert_eq!(c.eval(0.0), 0.5);
        assert_eq!(c.eval(1.0), 1.0);
    }

    #[test]
    fn empty_rejected() {
        assert!(empirical_cdf(&[]).is_err());
    }

    #[test]
    fn constant_column_far_from_normal() {
        assert!(compare_to_normal(&[0.3; 50]).unwrap() >= 0.5);
    }

    #[test]
    fn self_dependence_is_one() {
        let x = [0.1, 2.0, -1.0, 3.5, 0.7];
        assert!((distance_correlation(&x, &x).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hand_sample_matches_direct_double_centring() {
        let x = [1.0, 2.0, 4.0, 7.0, 11.0];
        let y = [2.0, 1.0, 5.0, 3.0, 8.0];
        let got = distance_correlation(&x, &y).unwrap();
        assert!((got - dcor_oracle(&x, &y)).abs() < 1e-12, "{got}");
    }

    #[test]
    fn constant_input_is_zero() {
        assert_eq!(distance_correlation(&[1.0; 4], &[1.0, 2.0, 3.0, 4.0]).unwrap(), 0.0);
    }
}
