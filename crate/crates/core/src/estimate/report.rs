use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::pce::PceSurrogate;

#[derive(Debug, Clone, PartialEq)]
pub struct PceRecord {
    pub level: usize,
    pub nodes: usize,
    /// `c_0` at this level.
    pub mean: f64,
    /// `|c_0,i - c_0,i+1| / c_0,i+1`; `None` at the finest level.
    pub error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McRecord {
    pub samples: usize,
    pub realization: usize,
    pub mean: f64,
    /// Relative to the realization-averaged mean at the next sample size.
    pub error: Option<f64>,
}

/// `error ~ a * N^(-b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub a: f64,
    pub b: f64,
    pub points: usize,
}

/// Ordinary least squares of `log e = log a - b log n`. Points with a zero
/// error carry no slope information and are skipped; fewer than two usable
/// points give `None`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Option<PowerLaw> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(n, e)| *n > 0.0 && *e > 0.0 && e.is_finite())
        .map(|(n, e)| (n.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some(PowerLaw {
        a: (my - slope * mx).exp(),
        b: -slope,
        points: pts.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub pce: Vec<PceRecord>,
    /// Size-major, realization-minor.
    pub mc: Vec<McRecord>,
    /// Realization-averaged mean per Monte Carlo size.
    pub mc_grand_means: Vec<f64>,
    pub pce_fit: Option<PowerLaw>,
    pub mc_fit: Option<PowerLaw>,
    /// Chaos surrogate projected at the finest level.
    pub surrogate: Option<PceSurrogate>,
}

impl ConvergenceReport {
    pub fn new(pce: Vec<PceRecord>, mc: Vec<McRecord>, mc_grand_means: Vec<f64>) -> Self {
        let mut r = ConvergenceReport {
            pce,
            mc,
            mc_grand_means,
            pce_fit: None,
            mc_fit: None,
            surrogate: None,
        };
        r.pce_fit = fit_power_law(&r.pce_error_curve());
        r.mc_fit = fit_power_law(&r.mc_error_curve());
        r
    }

    /// `(nodes, E_PC)` for every level that has an error.
    pub fn pce_error_curve(&self) -> Vec<(f64, f64)> {
        self.pce
            .iter()
            .filter_map(|r| r.error.map(|e| (r.nodes as f64, e)))
            .collect()
    }

    /// `(samples, mean_j E_MC^j)` for every size that has errors.
    pub fn mc_error_curve(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        let mut i = 0;
        while i < self.mc.len() {
            let n = self.mc[i].samples;
            let group: Vec<f64> = self.mc[i..]
                .iter()
                .take_while(|r| r.samples == n)
                .filter_map(|r| r.error)
                .collect();
            let len = self.mc[i..].iter().take_while(|r| r.samples == n).count();
            if !group.is_empty() {
                out.push((n as f64, group.iter().sum::<f64>() / group.len() as f64));
            }
            i += len;
        }
        out
    }

    /// `method,resolution,realization,value,error`; resolution is the node
    /// count for `pce` rows and the sample count for `mc` rows, and the error
    /// is empty where no finer reference exists.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("method,resolution,realization,value,error\n");
        let err = |e: Option<f64>| e.map(|v| format!("{v:?}")).unwrap_or_default();
        for r in &self.pce {
            let _ = writeln!(s, "pce,{},0,{:?},{}", r.nodes, r.mean, err(r.error));
        }
        for r in &self.mc {
            let _ = writeln!(s, "mc,{},{},{:?},{}", r.samples, r.realization, r.mean, err(r.error));
        }
        s
    }

    /// Long-format mean error per method and resolution, plus fitted curves,
    /// for plotting error against model evaluations.
    pub fn to_plot_table(&self) -> String {
        let mut s = String::from("series,evaluations,error\n");
        for (n, e) in self.pce_error_curve() {
            let _ = writeln!(s, "pce,{n},{e:?}");
        }
        for (n, e) in self.mc_error_curve() {
            let _ = writeln!(s, "mc,{n},{e:?}");
        }
        for (name, fit, curve) in [
            ("pce_fit", self.pce_fit, self.pce_error_curve()),
            ("mc_fit", self.mc_fit, self.mc_error_curve()),
        ] {
            if let Some(f) = fit {
                for (n, _) in curve {
                    let _ = writeln!(s, "{name},{n},{:?}", f.a * n.powf(-f.b));
                }
            }
        }
        s
    }

    /// `method,a,b,points`.
    pub fn fits_csv(&self) -> String {
        let mut s = String::from("method,a,b,points\n");
        for (name, fit) in [("pce", self.pce_fit), ("mc", self.mc_fit)] {
            if let Some(f) = fit {
                let _ = writeln!(s, "{name},{:?},{:?},{}", f.a, f.b, f.points);
            }
        }
        s
    }

    /// Checks the structural invariants: nonnegative errors, strictly
    /// increasing resolutions, errors present exactly below the finest level,
    /// and errors consistent with the recorded means.
    pub fn verify(&self) -> Result<()> {
        let bad = |m: String| Err(Error::numerical(format!("report check failed: {m}")));
        if self.pce.windows(2).any(|w| w[0].nodes >= w[1].nodes) {
            return bad("node counts are not strictly increasing".into());
        }
        for (i, r) in self.pce.iter().enumerate() {
            let last = i + 1 == self.pce.len();
            match (r.error, last) {
                (None, true) => {}
                (Some(e), false) => {
                    let want = (r.mean - self.pce[i + 1].mean).abs() / self.pce[i + 1].mean.abs();
                    if !(e >= 0.0) || (e - want).abs() > 1e-12 * want.max(1e-300) {
                        return bad(format!("level {} error {e} inconsistent with means", r.level));
                    }
                }
                _ => return bad(format!("level {} error presence is wrong", r.level)),
            }
        }
        let sizes: Vec<usize> = {
            let mut v: Vec<usize> = self.mc.iter().map(|r| r.samples).collect();
            v.dedup();
            v
        };
        if sizes.windows(2).any(|w| w[0] >= w[1]) {
            return bad("sample counts are not strictly increasing".into());
        }
        if sizes.len() != self.mc_grand_means.len() {
            return bad("one grand mean per sample size expected".into());
        }
        for r in &self.mc {
            let i = sizes.iter().position(|&n| n == r.samples).unwrap_or(0);
            match (r.error, i + 1 == sizes.len()) {
                (None, true) => {}
                (Some(e), false) => {
                    let reference = self.mc_grand_means[i + 1];
                    let want = (r.mean - reference).abs() / reference.abs();
                    if !(e >= 0.0) || (e - want).abs() > 1e-12 * want.max(1e-300) {
                        return bad(format!(
                            "size {} realization {} error inconsistent",
                            r.samples, r.realization
                        ));
                    }
                }
                _ => return bad(format!("size {} error presence is wrong", r.samples)),
            }
        }
        if fit_power_law(&self.pce_error_curve()) != self.pce_fit
            || fit_power_law(&self.mc_error_curve()) != self.mc_fit
        {
            return bad("fits do not match the error curves".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|&n: &f64| (n, 3.0 * n.powf(-0.5)))
            .collect();
        let f = fit_power_law(&pts).unwrap();
        assert!((f.b - 0.5).abs() < 1e-12 && (f.a - 3.0).abs() < 1e-12);
        assert!(fit_power_law(&[(10.0, 0.0), (100.0, 1.0)]).is_none());
    }
}
