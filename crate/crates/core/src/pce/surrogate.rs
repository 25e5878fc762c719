use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::KahanSum;
use crate::model::GermModel;

use super::hermite::MultiIndexSet;
use super::quadrature::SparseGrid;

/// Truncated Hermite chaos `sum_k c_k Psi_k(xi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PceSurrogate {
    pub basis: MultiIndexSet,
    pub coefficients: Vec<f64>,
    /// Sparse-grid level the coefficients were projected with.
    pub level: usize,
}

/// Model values at every node of `grid`, in node order.
///
/// Nodes are evaluated in parallel; a failure reports the lowest failing
/// node.
pub fn evaluate_on_grid(model: &dyn GermModel, grid: &SparseGrid) -> Result<Vec<f64>> {
    if model.dims() != grid.dim {
        return Err(Error::Dimension {
            what: "model dimension",
            expected: grid.dim,
            got: model.dims(),
        });
    }
    (0..grid.len())
        .into_par_iter()
        .map(|j| {
            let node = grid.node(j);
            model
                .eval(node)
                .map_err(|e| Error::at(format!("sparse-grid node {j} {node:?}"), e))
        })
        .collect()
}

/// `c_k = sum_j w_j Q_j Psi_k(node_j) / <Psi_k^2>` from precomputed node
/// values; summation runs in node order with compensation.
pub fn project_values(values: &[f64], grid: &SparseGrid, basis: &MultiIndexSet) -> Result<PceSurrogate> {
    if basis.dim() != grid.dim {
        return Err(Error::Dimension {
            what: "basis dimension",
            expected: grid.dim,
            got: basis.dim(),
        });
    }
    if values.len() != grid.len() {
        return Err(Error::Dimension {
            what: "node values",
            expected: grid.len(),
            got: values.len(),
        });
    }
    if grid.level < basis.order() + 1 {
        return Err(Error::invalid(format!(
            "order {} projection needs a sparse grid of level >= {}, got {}",
            basis.order(),
            basis.order() + 1,
            grid.level
        )));
    }
    let mut sums = vec![KahanSum::default(); basis.len()];
    let mut psi = vec![0.0; basis.len()];
    for (j, &q) in values.iter().enumerate() {
        basis.eval_basis_into(grid.node(j), &mut psi)?;
        let wq = grid.weights[j] * q;
        for (s, p) in sums.iter_mut().zip(&psi) {
            s.add(wq * p);
        }
    }
    let coefficients: Vec<f64> = sums
        .iter()
        .enumerate()
        .map(|(k, s)| s.value() / basis.norm_squared(k))
        .collect();
    if let Some(k) = coefficients.iter().position(|c| !c.is_finite()) {
        return Err(Error::numerical(format!("chaos coefficient {k} is not finite")));
    }
    Ok(PceSurrogate {
        basis: basis.clone(),
        coefficients,
        level: grid.level,
    })
}

/// Galerkin projection of `model` onto `basis` with sparse quadrature. The
/// model is evaluated once per node.
pub fn project(model: &dyn GermModel, grid: &SparseGrid, basis: &MultiIndexSet) -> Result<PceSurrogate> {
    if grid.level < basis.order() + 1 {
        return project_values(&[], grid, basis);
    }
    let values = evaluate_on_grid(model, grid)?;
    project_values(&values, grid, basis)
}

impl PceSurrogate {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn order(&self) -> usize {
        self.basis.order()
    }

    pub fn eval(&self, xi: &[f64]) -> Result<f64> {
        let psi = self.basis.eval_basis(xi)?;
        Ok(psi.iter().zip(&self.coefficients).map(|(p, c)| p * c).sum())
    }

    pub fn mean(&self) -> f64 {
        self.coefficients[0]
    }

    /// `sum_{k >= 1} c_k^2 <Psi_k^2>`.
    pub fn variance(&self) -> f64 {
        (1..self.coefficients.len())
            .map(|k| self.coefficients[k].powi(2) * self.basis.norm_squared(k))
            .sum()
    }

    /// ```text
    /// PCE
    /// dim 2
    /// order 1
    /// level 2
    /// terms 3
    /// 0 0 7.5
    /// 1 0 -0.25
    /// 0 1 1e-3
    /// END
    /// ```
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "PCE\ndim {}\norder {}\nlevel {}\nterms {}\n",
            self.dim(),
            self.order(),
            self.level,
            self.basis.len()
        );
        for (idx, c) in self.basis.iter().zip(&self.coefficients) {
            for a in idx {
                s.push_str(&a.to_string());
                s.push(' ');
            }
            s.push_str(&format!("{c:?}\n"));
        }
        s.push_str("END\n");
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let syntax = |line: usize, msg: String| Error::Syntax {
            path: "<surrogate>".into(),
            line,
            msg,
        };
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| syntax(0, format!("unexpected end of file, expected {what}")))
        };
        let (l, head) = next("PCE")?;
        if head != "PCE" {
            return Err(syntax(l, format!("expected PCE, found {head:?}")));
        }
        let mut field = |key: &str| -> Result<usize> {
            let (l, s) = next(key)?;
            let mut parts = s.split_whitespace();
            if parts.next() != Some(key) {
                return Err(syntax(l, format!("expected `{key} <value>`")));
            }
            parts
                .next()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| syntax(l, format!("bad {key} value")))
        };
        let dim = field("dim")?;
        let order = field("order")?;
        let level = field("level")?;
        let terms = field("terms")?;
        let mut indices = Vec::with_capacity(terms);
        let mut coefficients = Vec::with_capacity(terms);
        for _ in 0..terms {
            let (l, s) = next("a term")?;
            let parts: Vec<&str> = s.split_whitespace().collect();
            if parts.len() != dim + 1 {
                return Err(syntax(l, format!("expected {} fields, found {}", dim + 1, parts.len())));
            }
            let idx = parts[..dim]
                .iter()
                .map(|p| p.parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| syntax(l, format!("bad multi-index: {e}")))?;
            let c: f64 = parts[dim]
                .parse()
                .map_err(|e| syntax(l, format!("bad coefficient: {e}")))?;
            indices.push(idx);
            coefficients.push(c);
        }
        let (l, end) = next("END")?;
        if end != "END" {
            return Err(syntax(l, format!("expected END, found {end:?}")));
        }
        let basis = MultiIndexSet::from_indices(dim, indices)?;
        if basis.order() > order {
            return Err(Error::data(format!("terms exceed declared order {order}")));
        }
        Ok(PceSurrogate {
            basis,
            coefficients,
            level,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FnModel;
    use crate::pce::build_sparse_grid;

    #[test]
    fn constant_model() {
        let grid = build_sparse_grid(3, 3).unwrap();
        let basis = MultiIndexSet::total_degree(3, 2).unwrap();
        let s = project(&FnModel::new(3, |_| 7.0), &grid, &basis).unwrap();
        assert!((s.mean() - 7.0).abs() < 1e-12);
        assert!(s.coefficients[1..].iter().all(|c| c.abs() < 1e-12));
        assert!(s.variance() < 1e-20);
    }

    #[test]
    fn polynomial_in_span() {
        let grid = build_sparse_grid(4, 3).unwrap();
        let basis = MultiIndexSet::total_degree(4, 2).unwrap();
        let s = project(&FnModel::new(4, |x| 2.0 + 3.0 * x[0] + x[0] * x[1]), &grid, &basis).unwrap();
        for (k, c) in s.coefficients.iter().enumerate() {
            let want = match basis.get(k) {
                [0, 0, 0, 0] => 2.0,
                [1, 0, 0, 0] => 3.0,
                [1, 1, 0, 0] => 1.0,
                _ => 0.0,
            };
            assert!((c - want).abs() < 1e-10, "{:?}: {c}", basis.get(k));
        }
    }

    #[test]
    fn fourth_moment() {
        let grid = build_sparse_grid(2, 3).unwrap();
        let basis = MultiIndexSet::total_degree(2, 2).unwrap();
        let s = project(&FnModel::new(2, |x| x[0].powi(4)), &grid, &basis).unwrap();
        assert!((s.mean() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn level_must_exceed_order() {
        let grid = build_sparse_grid(2, 2).unwrap();
        let basis = MultiIndexSet::total_degree(2, 2).unwrap();
        assert!(project(&FnModel::new(2, |_| 1.0), &grid, &basis).is_err());
    }

    #[test]
    fn failure_names_node() {
        struct Bad;
        impl GermModel for Bad {
            fn dims(&self) -> usize {
                1
            }
            fn eval(&self, x: &[f64]) -> Result<f64> {
                if x[0] > 1.0 {
                    Err(Error::numerical("boom"))
                } else {
                    Ok(0.0)
                }
            }
        }
        let grid = build_sparse_grid(1, 2).unwrap();
        let basis = MultiIndexSet::total_degree(1, 1).unwrap();
        let err = project(&Bad, &grid, &basis).unwrap_err().to_string();
        assert!(err.contains("sparse-grid node") && err.contains("boom"), "{err}");
    }

    #[test]
    fn text_round_trip() {
        let basis = MultiIndexSet::total_degree(3, 2).unwrap();
        let s = PceSurrogate {
            coefficients: (0..basis.len()).map(|k| (k as f64).sin() / 3.0).collect(),
            basis,
            level: 3,
        };
        assert_eq!(PceSurrogate::from_text(&s.to_text()).unwrap(), s);
        assert!(PceSurrogate::from_text("PCE\ndim 1\n").is_err());
    }

    #[test]
    fn variance_uses_factorial_norms() {
        let basis = MultiIndexSet::total_degree(1, 2).unwrap();
        let s = PceSurrogate {
            coefficients: vec![1.0, 3.0, 0.5],
            basis,
            level: 3,
        };
        assert!((s.variance() - (9.0 + 0.25 * 2.0)).abs() < 1e-15);
        assert!((s.eval(&[2.0]).unwrap() - (1.0 + 6.0 + 0.5 * 3.0)).abs() < 1e-15);
    }
}
