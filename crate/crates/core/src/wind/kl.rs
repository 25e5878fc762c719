use std::fmt::Write as _;

use super::data::WindSampleSet;
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, Matrix};

/// Unbiased sample covariance of the rows of `samples`.
pub fn empirical_covariance(samples: &Matrix) -> Result<Matrix> {
    let (n, d) = (samples.rows(), samples.cols());
    if n < 2 {
        return Err(Error::data(format!("covariance needs at least 2 samples, got {n}")));
    }
    let mean: Vec<f64> = (0..d)
        .map(|t| (0..n).map(|i| samples[(i, t)]).sum::<f64>() / n as f64)
        .collect();
    let mut cov = Matrix::zeros(d, d);
    let mut centred = vec![0.0; d];
    for i in 0..n {
        for t in 0..d {
            centred[t] = samples[(i, t)] - mean[t];
        }
        for s in 0..d {
            for t in s..d {
                cov[(s, t)] += centred[s] * centred[t];
            }
        }
    }
    let scale = 1.0 / (n as f64 - 1.0);
    for s in 0..d {
        for t in s..d {
            let v = cov[(s, t)] * scale;
            cov[(s, t)] = v;
            cov[(t, s)] = v;
        }
    }
    Ok(cov)
}

/// Truncated Karhunen-Loeve representation `mean + sum_k sqrt(lambda_k) xi_k f_k`.
///
/// The decomposition treats the hourly grid with unit-width midpoint
/// weights, so the Nystrom system is the plain covariance eigenproblem. On a
/// grid with spacing `h`, scale the covariance by `h` before decomposing and
/// the eigenvectors by `1/sqrt(h)` after.
#[derive(Debug, Clone, PartialEq)]
pub struct KlBasis {
    pub mean: Vec<f64>,
    /// Nonincreasing and nonnegative.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is `f_k`.
    pub eigenvectors: Matrix,
    pub truncation: usize,
}

pub fn kl_decompose(cov: &Matrix, mean: &[f64]) -> Result<KlBasis> {
    let d = cov.rows();
    if mean.len() != d {
        return Err(Error::Dimension {
            what: "mean profile length",
            expected: d,
            got: mean.len(),
        });
    }
    let eig = symmetric_eigen(cov, 1e-8)?;
    let top = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let floor = -1e-8 * (1.0 + top);
    if let Some(bad) = eig.values.iter().find(|l| **l < floor) {
        return Err(Error::invalid(format!(
            "covariance is not positive semidefinite (eigenvalue {bad:.3e})"
        )));
    }
    Ok(KlBasis {
        mean: mean.to_vec(),
        eigenvalues: eig.values.iter().map(|l| l.max(0.0)).collect(),
        eigenvectors: eig.vectors,
        truncation: d,
    })
}

/// Result of projecting samples onto a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedGerms {
    /// `n_samples x dim`; columns listed in `skipped` are zero.
    pub xi: Matrix,
    /// Modes with zero eigenvalue, which carry no germ.
    pub skipped: Vec<usize>,
}

impl KlBasis {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn with_truncation(mut self, n: usize) -> Result<Self> {
        if n == 0 || n > self.dim() {
            return Err(Error::invalid(format!("truncation {n} outside 1..={}", self.dim())));
        }
        self.truncation = n;
        Ok(self)
    }

    pub fn total_variance(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// Percentage of total variance carried by the first `n` modes.
    pub fn variance_fraction(&self, n: usize) -> Result<f64> {
        if n == 0 || n > self.dim() {
            return Err(Error::invalid(format!("mode count {n} outside 1..={}", self.dim())));
        }
        let total = self.total_variance();
        if total <= 0.0 {
            return Ok(100.0);
        }
        Ok(100.0 * self.eigenvalues[..n].iter().sum::<f64>() / total)
    }

    pub fn mode(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.col(k)
    }

    /// `xi_jk = (sample_j - mean) . f_k / sqrt(lambda_k)`.
    pub fn project(&self, samples: &Matrix) -> Result<ProjectedGerms> {
        let d = self.dim();
        if samples.cols() != d {
            return Err(Error::Dimension {
                what: "sample length",
                expected: d,
                got: samples.cols(),
            });
        }
        let tiny = 1e-14 * self.eigenvalues.first().copied().unwrap_or(0.0);
        let skipped: Vec<usize> = (0..d).filter(|&k| self.eigenvalues[k] <= tiny).collect();
        let mut xi = Matrix::zeros(samples.rows(), d);
        let mut centred = vec![0.0; d];
        for j in 0..samples.rows() {
            for t in 0..d {
                centred[t] = samples[(j, t)] - self.mean[t];
            }
            for k in 0..d {
                if skipped.contains(&k) {
                    continue;
                }
                let dot: f64 = (0..d).map(|t| centred[t] * self.eigenvectors[(t, k)]).sum();
                xi[(j, k)] = dot / self.eigenvalues[k].sqrt();
            }
        }
        Ok(ProjectedGerms { xi, skipped })
    }

    pub fn project_samples(&self, samples: &WindSampleSet) -> Result<ProjectedGerms> {
        self.project(&samples.samples)
    }

    /// `mean + sum_{k < n} sqrt(lambda_k) xi_k f_k`.
    pub fn reconstruct(&self, xi: &[f64], n: usize) -> Result<Vec<f64>> {
        let d = self.dim();
        if n > d {
            return Err(Error::invalid(format!("cannot use {n} modes of a {d}-mode basis")));
        }
        if xi.len() < n {
            return Err(Error::Dimension {
                what: "germ length",
                expected: n,
                got: xi.len(),
            });
        }
        let mut out = self.mean.clone();
        for k in 0..n {
            let a = self.eigenvalues[k].sqrt() * xi[k];
            if a == 0.0 {
                continue;
            }
            for (t, o) in out.iter_mut().enumerate() {
                *o += a * self.eigenvectors[(t, k)];
            }
        }
        Ok(out)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "KL {} {}", self.dim(), self.truncation);
        let line = |s: &mut String, tag: &str, v: &[f64]| {
            let _ = write!(s, "{tag}");
            for x in v {
                let _ = write!(s, " {x}");
            }
            s.push('\n');
        };
        line(&mut s, "mean", &self.mean);
        line(&mut s, "lambda", &self.eigenvalues);
        for k in 0..self.dim() {
            line(&mut s, &format!("f {k}"), &self.mode(k));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let err = |line: usize, msg: &str| Error::Syntax {
            path: "<kl basis>".into(),
            line,
            msg: msg.into(),
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| err(1, "empty file"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 3 || h[0] != "KL" {
            return Err(err(1, "expected 'KL <dim> <truncation>'"));
        }
        let d: usize = h[1].parse().map_err(|_| err(1, "bad dimension"))?;
        let truncation: usize = h[2].parse().map_err(|_| err(1, "bad truncation"))?;
        let nums = |line: usize, fields: &[&str]| -> Result<Vec<f64>> {
            let v: Vec<f64> = fields
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| err(line, "bad number"))?;
            if v.len() != d {
                return Err(err(line, "wrong number of values"));
            }
            Ok(v)
        };
        let mut mean = None;
        let mut eigenvalues = None;
        let mut vectors = Matrix::zeros(d, d);
        let mut seen = vec![false; d];
        for (k, l) in lines {
            let f: Vec<&str> = l.split_whitespace().collect();
            match f[0] {
                "mean" => mean = Some(nums(k + 1, &f[1..])?),
                "lambda" => eigenvalues = Some(nums(k + 1, &f[1..])?),
                "f" => {
                    let m: usize = f
                        .get(1)
                        .and_then(|v| v.parse().ok())
                        .filter(|m| *m < d)
                        .ok_or_else(|| err(k + 1, "bad mode index"))?;
                    for (t, v) in nums(k + 1, &f[2..])?.into_iter().enumerate() {
                        vectors[(t, m)] = v;
                    }
                    seen[m] = true;
                }
                _ => return Err(err(k + 1, "unknown record")),
            }
        }
        if !seen.iter().all(|s| *s) {
            return Err(err(1, "missing eigenvector"));
        }
        let basis = KlBasis {
            mean: mean.ok_or_else(|| err(1, "missing mean"))?,
            eigenvalues: eigenvalues.ok_or_else(|| err(1, "missing lambda"))?,
            eigenvectors: vectors,
            truncation: d,
        };
        basis.with_truncation(truncation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_have_zero_covariance() {
        let s = Matrix::from_fn(5, 24, |_, t| t as f64);
        assert_eq!(empirical_covariance(&s).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn two_point_covariance() {
        let d = 0.7;
        let s = Matrix::from_fn(2, 24, |i, t| {
            if t == 0 {
                if i == 0 {
                    d
                } else {
                    -d
                }
            } else {
                1.0
            }
        });
        let c = empirical_covariance(&s).unwrap();
        assert!((c[(0, 0)] - 2.0 * d * d).abs() < 1e-15);
        assert_eq!(c.max_abs(), c[(0, 0)]);
    }

    #[test]
    fn needs_two_samples() {
        assert!(empirical_covariance(&Matrix::zeros(1, 24)).is_err());
    }

    #[test]
    fn rank_one_spectrum() {
        let v: Vec<f64> = (0..24).map(|t| (t as f64 * 0.3).sin() + 0.5).collect();
        let norm2: f64 = v.iter().map(|x| x * x).sum();
        let b = kl_decompose(&Matrix::outer(&v), &[0.0; 24]).unwrap();
        assert!((b.eigenvalues[0] - norm2).abs() < 1e-10 * norm2);
        assert!(b.eigenvalues[1..].iter().all(|l| *l < 1e-10));
        let f = b.mode(0);
        let cos: f64 = f.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() / norm2.sqrt();
        assert!((cos.abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn variance_fraction_ratio() {
        let mut lam = vec![0.0; 24];
        lam[0] = 3.0;
        lam[1] = 1.0;
        let b = KlBasis {
            mean: vec![0.0; 24],
            eigenvalues: lam,
            eigenvectors: Matrix::identity(24),
            truncation: 24,
        };
        assert_eq!(b.variance_fraction(1).unwrap(), 75.0);
        assert_eq!(b.variance_fraction(24).unwrap(), 100.0);
        assert!(b.variance_fraction(25).is_err());
        let flat = KlBasis {
            eigenvalues: vec![0.0; 24],
            ..b
        };
        assert_eq!(flat.variance_fraction(3).unwrap(), 100.0);
    }

    #[test]
    fn text_round_trip() {
        let c = Matrix::from_fn(24, 24, |i, j| (-((i as f64 - j as f64).abs()) / 7.0).exp());
        let b = kl_decompose(&c, &[1.5; 24]).unwrap().with_truncation(6).unwrap();
        assert_eq!(KlBasis::from_text(&b.to_text()).unwrap(), b);
    }

    #[test]
    fn asymmetric_rejected() {
        let mut c = Matrix::identity(24);
        c[(0, 1)] = 1e-3;
        assert!(kl_decompose(&c, &[0.0; 24]).is_err());
    }
}
