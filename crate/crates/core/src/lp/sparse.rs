//! Compressed sparse column/row storage.

/// Compressed sparse columns. Duplicate triplets are summed; explicit zeros
/// are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub colptr: Vec<usize>,
    pub rowidx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CscMatrix {
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by_key(|a| (a.1, a.0));
        let mut colptr = vec![0usize; ncols + 1];
        let mut rowidx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().expect("previous entry") += v;
                continue;
            }
            rowidx.push(r);
            values.push(v);
            colptr[c + 1] += 1;
            last = Some((r, c));
        }
        for c in 0..ncols {
            colptr[c + 1] += colptr[c];
        }
        let mut m = CscMatrix {
            nrows,
            ncols,
            colptr,
            rowidx,
            values,
        };
        m.drop_zeros();
        m
    }

    fn drop_zeros(&mut self) {
        if self.values.iter().all(|v| *v != 0.0) {
            return;
        }
        let mut colptr = vec![0; self.ncols + 1];
        let mut rowidx = Vec::new();
        let mut values = Vec::new();
        for c in 0..self.ncols {
            for k in self.colptr[c]..self.colptr[c + 1] {
                if self.values[k] != 0.0 {
                    rowidx.push(self.rowidx[k]);
                    values.push(self.values[k]);
                }
            }
            colptr[c + 1] = rowidx.len();
        }
        self.colptr = colptr;
        self.rowidx = rowidx;
        self.values = values;
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let r = self.colptr[j]..self.colptr[j + 1];
        (&self.rowidx[r.clone()], &self.values[r])
    }

    /// The same matrix stored by rows (a CSC of the transpose).
    pub fn transpose(&self) -> CscMatrix {
        let mut count = vec![0usize; self.nrows + 1];
        for &r in &self.rowidx {
            count[r + 1] += 1;
        }
        for r in 0..self.nrows {
            count[r + 1] += count[r];
        }
        let mut next = count.clone();
        let mut colidx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for c in 0..self.ncols {
            for k in self.colptr[c]..self.colptr[c + 1] {
                let r = self.rowidx[k];
                colidx[next[r]] = c;
                values[next[r]] = self.values[k];
                next[r] += 1;
            }
        }
        CscMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            colptr: count,
            rowidx: colidx,
            values,
        }
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        for c in 0..self.ncols {
            if x[c] == 0.0 {
                continue;
            }
            let (rows, vals) = self.col(c);
            for (r, v) in rows.iter().zip(vals) {
                y[*r] += v * x[c];
            }
        }
        y
    }
}
