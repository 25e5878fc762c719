use crate::error::{Error, Result};

/// Probabilists' Hermite polynomial `He_k(x)`, orthogonal under N(0, 1) with
/// `<He_j He_k> = k! delta_jk`.
pub fn hermite(k: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for j in 0..k {
        let next = x * cur - j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `He_0(x) ..= He_p(x)` into `out`.
pub fn hermite_all(p: usize, x: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if p >= 1 {
        out[1] = x;
    }
    for k in 1..p {
        out[k + 1] = x * out[k] - k as f64 * out[k - 1];
    }
}

/// `k!` as a float; exact up to 22!.
pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Total-degree multi-indices `|alpha| <= p` in `n` variables.
///
/// Ordered by degree, then reverse-lexicographically within a degree, so
/// index 0 is the constant and `(1, 0, ..)` precedes `(0, 1, ..)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiIndexSet {
    dim: usize,
    order: usize,
    indices: Vec<Vec<u32>>,
}

/// Compositions of `total` into `parts` nonnegative integers, largest first
/// coordinate first.
fn compositions(total: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if parts == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first);
        compositions(total - first, parts - 1, prefix, out);
        prefix.pop();
    }
}

impl MultiIndexSet {
    pub fn total_degree(dim: usize, order: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("multi-index dimension must be positive"));
        }
        let count = Self::cardinality(dim, order);
        if count > 10_000_000 {
            return Err(Error::invalid(format!("{count} basis terms is too many")));
        }
        let mut indices = Vec::with_capacity(count as usize);
        for d in 0..=order as u32 {
            compositions(d, dim, &mut Vec::with_capacity(dim), &mut indices);
        }
        Ok(MultiIndexSet { dim, order, indices })
    }

    /// `(n + p)! / (n! p!)`.
    pub fn cardinality(dim: usize, order: usize) -> u128 {
        binomial(dim + order, order)
    }

    /// Builds a set from explicit indices (e.g. when reading a surrogate).
    pub fn from_indices(dim: usize, indices: Vec<Vec<u32>>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        let mut order = 0;
        for idx in &indices {
            if idx.len() != dim {
                return Err(Error::Dimension {
                    what: "multi-index length",
                    expected: dim,
                    got: idx.len(),
                });
            }
            if !seen.insert(idx.clone()) {
                return Err(Error::invalid(format!("duplicate multi-index {idx:?}")));
            }
            order = order.max(idx.iter().sum::<u32>() as usize);
        }
        if indices.first().is_none_or(|i| i.iter().any(|&v| v != 0)) {
            return Err(Error::invalid("multi-index set must start with the constant term"));
        }
        Ok(MultiIndexSet { dim, order, indices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn get(&self, k: usize) -> &[u32] {
        &self.indices[k]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> {
        self.indices.iter().map(Vec::as_slice)
    }

    pub fn position(&self, idx: &[u32]) -> Option<usize> {
        self.indices.iter().position(|i| i == idx)
    }

    /// `<Psi_k^2> = prod_i alpha_i!`.
    pub fn norm_squared(&self, k: usize) -> f64 {
        self.indices[k].iter().map(|&a| factorial(a as usize)).product()
    }

    /// `Psi_k(xi) = prod_i He_{alpha_i}(xi_i)` for every index.
    pub fn eval_basis(&self, xi: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        self.eval_basis_into(xi, &mut out)?;
        Ok(out)
    }

    pub fn eval_basis_into(&self, xi: &[f64], out: &mut [f64]) -> Result<()> {
        if xi.len() != self.dim {
            return Err(Error::Dimension {
                what: "germ dimension",
                expected: self.dim,
                got: xi.len(),
            });
        }
        let p = self.order;
        let mut table = vec![0.0; self.dim * (p + 1)];
        for (i, &x) in xi.iter().enumerate() {
            hermite_all(p, x, &mut table[i * (p + 1)..(i + 1) * (p + 1)]);
        }
        for (o, idx) in out.iter_mut().zip(&self.indices) {
            let mut v = 1.0;
            for (i, &a) in idx.iter().enumerate() {
                if a > 0 {
                    v *= table[i * (p + 1) + a as usize];
                }
            }
            *o = v;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_values() {
        assert_eq!(hermite(0, 3.7), 1.0);
        assert_eq!(hermite(2, 0.0), -1.0);
        assert_eq!(hermite(3, 2.0), 2.0);
        let mut all = [0.0; 5];
        hermite_all(4, 1.5, &mut all);
        for (k, v) in all.iter().enumerate() {
            assert_eq!(*v, hermite(k, 1.5));
        }
    }

    #[test]
    fn ordering() {
        let s = MultiIndexSet::total_degree(2, 2).unwrap();
        let want: Vec<Vec<u32>> = vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]];
        assert_eq!(s.iter().map(<[u32]>::to_vec).collect::<Vec<_>>(), want);
        assert_eq!(s.norm_squared(3), 2.0);
    }

    #[test]
    fn tensor_values() {
        let s = MultiIndexSet::total_degree(2, 2).unwrap();
        let v = s.eval_basis(&[0.3, -2.0]).unwrap();
        assert_eq!(v[4], 0.3 * -2.0);
        assert_eq!(v[0], 1.0);
        assert!(s.eval_basis(&[0.0]).is_err());
    }

    #[test]
    fn from_indices_checks() {
        assert!(MultiIndexSet::from_indices(2, vec![vec![0, 0], vec![0, 0]]).is_err());
        assert!(MultiIndexSet::from_indices(2, vec![vec![1, 0]]).is_err());
        let s = MultiIndexSet::from_indices(2, vec![vec![0, 0], vec![0, 3]]).unwrap();
        assert_eq!(s.order(), 3);
    }
}
