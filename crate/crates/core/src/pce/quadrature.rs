//! Nested Gaussian-weight rules and their Smolyak combination.
//!
//! The 1-D rules are the Genz-Keister extensions of the 3-point Gauss-Hermite
//! rule with 1, 3, 9 and 19 points (polynomial degree 1, 5, 15, 29), each
//! containing all nodes of the previous one. They were generated by
//! repeatedly solving for the monic polynomial orthogonal to all lower
//! powers against the product of the existing node polynomial (Kronrod-
//! Patterson extension), at 60 digits, for the standard normal density.
//! A 7-point extension of the 3-point rule has complex nodes, so the
//! sequence jumps to 9.
//!
//! Level `l` of the 1-D sequence uses the smallest rule exact to degree
//! `2l - 1`, so several levels share a rule ("slow growth"). A sparse grid
//! of level `L` in `n` dimensions combines tensor products with
//! `sum_k (l_k - 1) <= L` and integrates every polynomial of total degree
//! `2L + 1`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

use super::hermite::binomial;

/// Highest sparse-grid level supported by the tabulated rules.
pub const MAX_LEVEL: usize = 14;

#[allow(clippy::excessive_precision)]
const NODES: [f64; 19] = [
    0.0,
    -1.732050807568877293527446,
    1.732050807568877293527446,
    -0.7410953499945408418617966,
    0.7410953499945408418617966,
    -2.861279576057058117331474,
    2.861279576057058117331474,
    -4.184956017672731860688908,
    4.184956017672731860688908,
    -1.230423634027306007751144,
    1.230423634027306007751144,
    -2.596083115049202159357846,
    2.596083115049202159357846,
    -3.205333794499194518718378,
    3.205333794499194518718378,
    -5.187016039913656065991777,
    5.187016039913656065991777,
    -6.363394494336369987632579,
    6.363394494336369987632579,
];
#[allow(clippy::excessive_precision)]
const W1: [f64; 1] = [1.0];
#[allow(clippy::excessive_precision)]
const W3: [f64; 3] = [
    0.6666666666666666666666667,
    0.1666666666666666666666667,
    0.1666666666666666666666667,
];
#[allow(clippy::excessive_precision)]
const W9: [f64; 9] = [
    0.2539682539682539682539683,
    0.09485094850948509485094851,
    0.09485094850948509485094851,
    0.270074329577937870762767,
    0.270074329577937870762767,
    0.007996325470893532769855266,
    0.007996325470893532769855266,
    0.00009426945755651748944507794,
    0.00009426945755651748944507794,
];
#[allow(clippy::excessive_precision)]
const W19: [f64; 19] = [
    0.3034671998542058664311657,
    0.06409605468680758871147003,
    0.06409605468680758871147003,
    0.2083249916496088778093513,
    0.2083249916496088778093513,
    -0.00633722479337373585413936,
    -0.00633722479337373585413936,
    0.00006012336945984781849906134,
    0.00006012336945984781849906134,
    0.06115173012524767711418338,
    0.06115173012524767711418338,
    0.01808523425479845277249607,
    0.01808523425479845277249607,
    0.00288488043650675129122203,
    0.00288488043650675129122203,
    0.0000006094808731468983460398372,
    0.0000006094808731468983460398372,
    8.629684602229885768008062e-10,
    8.629684602229885768008062e-10,
];

/// Points of the 1-D rule used at level `l >= 1`.
pub fn rule_points(l: usize) -> usize {
    match l {
        1 => 1,
        2 | 3 => 3,
        4..=8 => 9,
        _ => 19,
    }
}

/// Nodes and weights of the nested 1-D rule with `points` nodes, in nesting
/// order (each rule's nodes come first in the next).
pub fn nested_rule(points: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let w: &[f64] = match points {
        1 => &W1,
        3 => &W3,
        9 => &W9,
        19 => &W19,
        _ => return Err(Error::invalid(format!("no nested rule with {points} points"))),
    };
    Ok((NODES[..points].to_vec(), w.to_vec()))
}

/// Weights of a 1-D level, indexed by node id.
fn level_weights(l: usize) -> &'static [f64] {
    match rule_points(l) {
        1 => &W1,
        3 => &W3,
        9 => &W9,
        _ => &W19,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseGrid {
    pub dim: usize,
    pub level: usize,
    /// `count x dim`, rows in lexicographic order of 1-D node ids.
    pub nodes: Matrix,
    pub weights: Vec<f64>,
}

impl SparseGrid {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, j: usize) -> &[f64] {
        self.nodes.row(j)
    }

    /// `sum_j w_j f(node_j)`.
    pub fn integrate(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        crate::linalg::compensated_sum((0..self.len()).map(|j| self.weights[j] * f(self.node(j))))
    }
}

/// Calls `visit` for every `l` in `{1..}^n` with `sum (l_k - 1) == q`.
fn levels_with_sum(n: usize, q: usize, visit: &mut impl FnMut(&[usize])) {
    fn rec(k: usize, left: usize, cur: &mut Vec<usize>, n: usize, visit: &mut dyn FnMut(&[usize])) {
        if k == n - 1 {
            cur.push(left + 1);
            visit(cur);
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e + 1);
            rec(k + 1, left - e, cur, n, visit);
            cur.pop();
        }
    }
    rec(0, q, &mut Vec::with_capacity(n), n, visit);
}

/// Smolyak sparse grid for the n-dimensional standard normal.
///
/// Nodes are identified by their per-coordinate 1-D node ids, so merging
/// tensor terms needs no floating-point comparison.
pub fn build_sparse_grid(n: usize, level: usize) -> Result<SparseGrid> {
    if n == 0 {
        return Err(Error::invalid("sparse grid dimension must be positive"));
    }
    if level == 0 || level > MAX_LEVEL {
        return Err(Error::invalid(format!(
            "sparse grid level {level} outside 1..={MAX_LEVEL}"
        )));
    }
    if n > u8::MAX as usize {
        return Err(Error::invalid(format!("sparse grid dimension {n} is too large")));
    }
    // Smolyak with the level shifted so the single-node grid is level 0.
    let big = level;
    let mut acc: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
    let lowest = big.saturating_sub(n - 1);
    for q in lowest..=big {
        let c = binomial(n - 1, big - q) as f64 * if (big - q).is_multiple_of(2) { 1.0 } else { -1.0 };
        levels_with_sum(n, q, &mut |ls: &[usize]| {
            let sizes: Vec<usize> = ls.iter().map(|&l| rule_points(l)).collect();
            let weights: Vec<&[f64]> = ls.iter().map(|&l| level_weights(l)).collect();
            let mut id = vec![0u8; n];
            loop {
                let w: f64 = id.iter().zip(&weights).map(|(&i, w)| w[i as usize]).product();
                *acc.entry(id.clone()).or_insert(0.0) += c * w;
                // Odometer over the tensor product.
                let mut k = 0;
                while k < n {
                    id[k] += 1;
                    if (id[k] as usize) < sizes[k] {
                        break;
                    }
                    id[k] = 0;
                    k += 1;
                }
                if k == n {
                    break;
                }
            }
        });
    }
    let count = acc.len();
    let mut data = Vec::with_capacity(count * n);
    let mut weights = Vec::with_capacity(count);
    for (id, w) in acc {
        data.extend(id.iter().map(|&i| NODES[i as usize]));
        weights.push(w);
    }
    Ok(SparseGrid {
        dim: n,
        level,
        nodes: Matrix::from_vec(count, n, data),
        weights,
    })
}
