//! Expected-cost estimators and the Monte Carlo vs chaos convergence study.

mod report;

pub use report::{fit_power_law, ConvergenceReport, McRecord, PceRecord, PowerLaw};

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::compensated_sum;
use crate::model::GermModel;
use crate::pce::{build_sparse_grid, project_values, MultiIndexSet, PceSurrogate, SparseGrid};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n)`.
    pub stderr: f64,
    pub samples: usize,
}

/// Model values at germs `0..n` of the iid normal sequence under `seed`.
pub fn mc_values(model: &dyn GermModel, n: usize, seed: u64) -> Result<Vec<f64>> {
    let d = model.dims();
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            model
                .eval(&rng::normal_germ(seed, i, d))
                .map_err(|e| Error::at(format!("Monte Carlo sample {i}"), e))
        })
        .collect()
}

pub fn summarize(values: &[f64]) -> McEstimate {
    let n = values.len();
    let mean = compensated_sum(values.iter().copied()) / n as f64;
    let ss = compensated_sum(values.iter().map(|v| (v - mean).powi(2)));
    let var = if n > 1 { ss / (n - 1) as f64 } else { 0.0 };
    McEstimate {
        mean,
        stderr: (var / n as f64).sqrt(),
        samples: n,
    }
}

/// Plain Monte Carlo estimate of `E[model(xi)]`.
pub fn mc_estimate(model: &dyn GermModel, n_samples: usize, seed: u64) -> Result<McEstimate> {
    if n_samples < 2 {
        return Err(Error::invalid("Monte Carlo needs at least two samples"));
    }
    Ok(summarize(&mc_values(model, n_samples, seed)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PceEstimate {
    pub mean: f64,
    pub nodes: usize,
    pub surrogate: PceSurrogate,
}

/// Chaos estimate: `c_0` of the order-`order` projection on a level-`level`
/// sparse grid.
pub fn pce_estimate(model: &dyn GermModel, level: usize, order: usize) -> Result<PceEstimate> {
    let grid = build_sparse_grid(model.dims(), level)?;
    let basis = MultiIndexSet::total_degree(model.dims(), order)?;
    let values = crate::pce::evaluate_on_grid(model, &grid)?;
    let surrogate = project_values(&values, &grid, &basis)?;
    Ok(PceEstimate {
        mean: surrogate.mean(),
        nodes: grid.len(),
        surrogate,
    })
}

/// Evaluates a model on several nested grids, computing each distinct node
/// once.
struct NodeCache<'a> {
    model: &'a dyn GermModel,
    values: HashMap<Vec<u64>, f64>,
}

impl<'a> NodeCache<'a> {
    fn new(model: &'a dyn GermModel) -> Self {
        NodeCache {
            model,
            values: HashMap::new(),
        }
    }

    fn key(node: &[f64]) -> Vec<u64> {
        node.iter().map(|x| x.to_bits()).collect()
    }

    fn values(&mut self, grid: &SparseGrid) -> Result<Vec<f64>> {
        let missing: Vec<usize> = (0..grid.len())
            .filter(|&j| !self.values.contains_key(&Self::key(grid.node(j))))
            .collect();
        let model = self.model;
        let fresh: Vec<f64> = missing
            .par_iter()
            .map(|&j| {
                model
                    .eval(grid.node(j))
                    .map_err(|e| Error::at(format!("level-{} node {j} {:?}", grid.level, grid.node(j)), e))
            })
            .collect::<Result<_>>()?;
        for (&j, v) in missing.iter().zip(fresh) {
            self.values.insert(Self::key(grid.node(j)), v);
        }
        Ok((0..grid.len()).map(|j| self.values[&Self::key(grid.node(j))]).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyOptions {
    /// Sparse-grid levels, strictly increasing.
    pub levels: Vec<usize>,
    /// Chaos order projected at every level (capped at `level - 1`).
    pub order: usize,
    /// Monte Carlo sample sizes, strictly increasing.
    pub mc_sizes: Vec<usize>,
    pub realizations: usize,
    pub seed: u64,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            levels: vec![1, 2, 3],
            order: 1,
            mc_sizes: vec![10, 100, 1000, 10_000],
            realizations: 10,
            seed: 1,
        }
    }
}

fn strictly_increasing(v: &[usize]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

fn relative_error(value: f64, reference: f64) -> Result<f64> {
    if reference == 0.0 {
        return Err(Error::numerical("reference value is zero; relative error undefined"));
    }
    Ok((value - reference).abs() / reference.abs())
}

/// Seed of Monte Carlo realization `j` at schedule position `i`.
pub fn realization_seed(seed: u64, i: usize, j: usize) -> u64 {
    rng::derive_seed(seed, &[i as u64, j as u64])
}

/// Runs the chaos levels and the Monte Carlo schedule, with errors measured
/// against the next more accurate result of the same method.
pub fn convergence_study(model: &dyn GermModel, opts: &StudyOptions) -> Result<ConvergenceReport> {
    if opts.levels.len() < 2 || !strictly_increasing(&opts.levels) {
        return Err(Error::invalid(
            "need at least two strictly increasing quadrature levels",
        ));
    }
    if opts.mc_sizes.len() < 2 || !strictly_increasing(&opts.mc_sizes) || opts.mc_sizes[0] < 2 {
        return Err(Error::invalid(
            "need at least two strictly increasing Monte Carlo sizes >= 2",
        ));
    }
    if opts.realizations == 0 {
        return Err(Error::invalid("need at least one Monte Carlo realization"));
    }

    let mut cache = NodeCache::new(model);
    let mut pce = Vec::with_capacity(opts.levels.len());
    let mut finest = None;
    for &level in &opts.levels {
        let grid = build_sparse_grid(model.dims(), level)?;
        let values = cache.values(&grid)?;
        let order = opts.order.min(level - 1);
        let basis = MultiIndexSet::total_degree(model.dims(), order)?;
        let s = project_values(&values, &grid, &basis)?;
        pce.push(PceRecord {
            level,
            nodes: grid.len(),
            mean: s.mean(),
            error: None,
        });
        finest = Some(s);
    }
    for i in 0..pce.len() - 1 {
        pce[i].error = Some(relative_error(pce[i].mean, pce[i + 1].mean)?);
    }

    // All Monte Carlo evaluations in one parallel sweep.
    let jobs: Vec<(usize, usize)> = (0..opts.mc_sizes.len())
        .flat_map(|i| (0..opts.realizations).map(move |j| (i, j)))
        .collect();
    let d = model.dims();
    let means: Vec<f64> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let seed = realization_seed(opts.seed, i, j);
            let vals = (0..opts.mc_sizes[i] as u64)
                .map(|k| {
                    model.eval(&rng::normal_germ(seed, k, d)).map_err(|e| {
                        Error::at(
                            format!("Monte Carlo size {} realization {j} sample {k}", opts.mc_sizes[i]),
                            e,
                        )
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(compensated_sum(vals) / opts.mc_sizes[i] as f64)
        })
        .collect::<Result<_>>()?;
    let mut mc: Vec<McRecord> = jobs
        .iter()
        .zip(&means)
        .map(|(&(i, j), &mean)| McRecord {
            samples: opts.mc_sizes[i],
            realization: j,
            mean,
            error: None,
        })
        .collect();
    let grand: Vec<f64> = opts
        .mc_sizes
        .iter()
        .enumerate()
        .map(|(i, _)| {
            compensated_sum(
                means[i * opts.realizations..(i + 1) * opts.realizations]
                    .iter()
                    .copied(),
            ) / opts.realizations as f64
        })
        .collect();
    for (r, &(i, _)) in mc.iter_mut().zip(&jobs) {
        if i + 1 < opts.mc_sizes.len() {
            r.error = Some(relative_error(r.mean, grand[i + 1])?);
        }
    }
    let mut report = ConvergenceReport::new(pce, mc, grand);
    report.surrogate = finest;
    Ok(report)
}

/// Relative L1 errors of a surrogate on fresh germs.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidation {
    /// `|model - surrogate| / mean(model)` per test germ, in percent.
    pub errors: Vec<f64>,
    pub reference_mean: f64,
}

impl CrossValidation {
    /// Linear-interpolated quantile of the error distribution, `p` in [0, 1].
    pub fn quantile(&self, p: f64) -> f64 {
        let mut v = self.errors.clone();
        v.sort_by(f64::total_cmp);
        let pos = p.clamp(0.0, 1.0) * (v.len() - 1) as f64;
        let i = pos.floor() as usize;
        let f = pos - i as f64;
        v[i] + f * (v[(i + 1).min(v.len() - 1)] - v[i])
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }
}

pub fn cross_validate(
    surrogate: &PceSurrogate,
    model: &dyn GermModel,
    n_test: usize,
    seed: u64,
) -> Result<CrossValidation> {
    if n_test == 0 {
        return Err(Error::invalid("cross-validation needs at least one test germ"));
    }
    if surrogate.dim() != model.dims() {
        return Err(Error::Dimension {
            what: "surrogate dimension",
            expected: model.dims(),
            got: surrogate.dim(),
        });
    }
    let d = model.dims();
    let pairs: Vec<(f64, f64)> = (0..n_test as u64)
        .into_par_iter()
        .map(|i| {
            let g = rng::normal_germ(seed, i, d);
            let q = model.eval(&g).map_err(|e| Error::at(format!("test germ {i}"), e))?;
            Ok((q, surrogate.eval(&g)?))
        })
        .collect::<Result<_>>()?;
    let reference_mean = compensated_sum(pairs.iter().map(|p| p.0)) / n_test as f64;
    if reference_mean == 0.0 {
        return Err(Error::numerical("mean model value over the test set is zero"));
    }
    Ok(CrossValidation {
        errors: pairs
            .iter()
            .map(|(q, s)| 100.0 * (q - s).abs() / reference_mean.abs())
            .collect(),
        reference_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FnModel;

    #[test]
    fn constant_model_everywhere() {
        let m = FnModel::new(3, |_| 4.0);
        let mc = mc_estimate(&m, 100, 1).unwrap();
        assert_eq!((mc.mean, mc.stderr), (4.0, 0.0));
        assert!((pce_estimate(&m, 2, 1).unwrap().mean - 4.0).abs() < 1e-12);
        let r = convergence_study(&m, &StudyOptions::default()).unwrap();
        assert!(r.pce.iter().all(|p| p.error.is_none_or(|e| e.abs() < 1e-14)));
        assert!(r.mc.iter().all(|p| p.error.is_none_or(|e| e == 0.0)));
        let s = pce_estimate(&m, 2, 1).unwrap().surrogate;
        assert!(cross_validate(&s, &m, 50, 2).unwrap().quantile(1.0) < 1e-10);
    }

    #[test]
    fn lognormal_mean() {
        let m = FnModel::new(1, |x| (0.1 * x[0]).exp());
        let e = pce_estimate(&m, 4, 2).unwrap();
        assert!((e.mean - 0.005f64.exp()).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_schedules() {
        let m = FnModel::new(1, |_| 1.0);
        let o = StudyOptions {
            levels: vec![2],
            ..StudyOptions::default()
        };
        assert!(convergence_study(&m, &o).is_err());
        let o = StudyOptions {
            mc_sizes: vec![100, 10],
            ..StudyOptions::default()
        };
        assert!(convergence_study(&m, &o).is_err());
        assert!(mc_estimate(&m, 1, 0).is_err());
        let z = FnModel::new(1, |x| x[0]);
        assert!(convergence_study(&z, &StudyOptions::default()).is_err());
    }

    #[test]
    fn report_is_reproducible() {
        let m = FnModel::new(2, |x| 1.0 + x[0] * x[0] + 0.5 * x[1]);
        let o = StudyOptions {
            mc_sizes: vec![10, 100],
            realizations: 3,
            ..StudyOptions::default()
        };
        let a = convergence_study(&m, &o).unwrap();
        let b = convergence_study(&m, &o).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        // Quadratic: exact from level 1 on.
        assert!(a.pce[1].error.is_none_or(|e| e < 1e-14));
    }
}
