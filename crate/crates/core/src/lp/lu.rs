//! Sparse LU of the simplex basis with product-form updates.
//!
//! Left-looking (Gilbert-Peierls) factorisation: columns are processed in
//! order of increasing count, each one solved against the partial L found
//! so far, and pivoted by threshold partial pivoting with a preference for
//! short rows. The result is stored as `B = L U` with
//!
//! * `L` a set of unit columns `l_s`, one per elimination step `s`, holding
//!   entries only on rows pivoted after `s`;
//! * `U` upper triangular in step order, stored by columns.
//!
//! Basis changes append eta columns until the next refactorisation.

const PIVOT_THRESHOLD: f64 = 0.1;
const SINGULAR_TOL: f64 = 1e-11;

#[derive(Debug, Clone)]
struct Eta {
    pos: usize,
    pivot: f64,
    idx: Vec<usize>,
    val: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct LuFactor {
    m: usize,
    /// Pivot row of each step.
    prow: Vec<usize>,
    /// Basis position eliminated at each step.
    pcol: Vec<usize>,
    /// Step at which each row was pivoted.
    row_step: Vec<usize>,
    l_start: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    u_start: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
    u_diag: Vec<f64>,
    etas: Vec<Eta>,
    eta_nnz: usize,
    base_nnz: usize,
}

/// Basis positions whose columns were numerically dependent, with the row
/// whose unit column replaced each of them.
pub(crate) type Repairs = Vec<(usize, usize)>;

struct Work {
    x: Vec<f64>,
    in_pattern: Vec<bool>,
    pattern: Vec<usize>,
    visited: Vec<bool>,
    stack: Vec<(usize, usize)>,
    topo: Vec<usize>,
}

impl LuFactor {
    /// Factorises the `m x m` basis whose column at position `k` is produced
    /// by `column(k, rows, vals)`.
    pub(crate) fn factor(m: usize, mut column: impl FnMut(usize, &mut Vec<usize>, &mut Vec<f64>)) -> (Self, Repairs) {
        let mut cols_r: Vec<Vec<usize>> = Vec::with_capacity(m);
        let mut cols_v: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut row_count = vec![0usize; m];
        for k in 0..m {
            let mut r = Vec::new();
            let mut v = Vec::new();
            column(k, &mut r, &mut v);
            for &i in &r {
                row_count[i] += 1;
            }
            cols_r.push(r);
            cols_v.push(v);
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&k| (cols_r[k].len(), k));

        const NONE: usize = usize::MAX;
        let mut f = LuFactor {
            m,
            prow: Vec::with_capacity(m),
            pcol: Vec::with_capacity(m),
            row_step: vec![NONE; m],
            l_start: vec![0],
            l_idx: Vec::new(),
            l_val: Vec::new(),
            u_start: vec![0],
            u_idx: Vec::new(),
            u_val: Vec::new(),
            u_diag: Vec::with_capacity(m),
            etas: Vec::new(),
            eta_nnz: 0,
            base_nnz: 0,
        };
        let mut w = Work {
            x: vec![0.0; m],
            in_pattern: vec![false; m],
            pattern: Vec::new(),
            visited: vec![false; m],
            stack: Vec::new(),
            topo: Vec::new(),
        };
        let mut singular = Vec::new();

        for &k in &order {
            // Scatter and find the steps reachable from the column pattern.
            w.topo.clear();
            for (&i, &v) in cols_r[k].iter().zip(&cols_v[k]) {
                w.x[i] = v;
                if !w.in_pattern[i] {
                    w.in_pattern[i] = true;
                    w.pattern.push(i);
                }
                let s = f.row_step[i];
                if s != NONE && !w.visited[s] {
                    f.dfs(s, &mut w);
                }
            }
            // Reverse postorder is a topological order.
            for t in (0..w.topo.len()).rev() {
                let s = w.topo[t];
                let xs = w.x[f.prow[s]];
                if xs == 0.0 {
                    continue;
                }
                for e in f.l_start[s]..f.l_start[s + 1] {
                    let i = f.l_idx[e];
                    w.x[i] -= f.l_val[e] * xs;
                    if !w.in_pattern[i] {
                        w.in_pattern[i] = true;
                        w.pattern.push(i);
                    }
                }
            }
            for &s in &w.topo {
                w.visited[s] = false;
            }

            let mut max_abs: f64 = 0.0;
            for &i in &w.pattern {
                if f.row_step[i] == NONE {
                    max_abs = max_abs.max(w.x[i].abs());
                }
            }
            let col_scale = cols_v[k].iter().fold(1.0f64, |a, v| a.max(v.abs()));
            if max_abs <= SINGULAR_TOL * col_scale {
                singular.push(k);
                for &i in &w.pattern {
                    w.x[i] = 0.0;
                    w.in_pattern[i] = false;
                }
                w.pattern.clear();
                continue;
            }
            let mut piv = NONE;
            for &i in &w.pattern {
                if f.row_step[i] != NONE || w.x[i].abs() < PIVOT_THRESHOLD * max_abs {
                    continue;
                }
                let better = piv == NONE
                    || row_count[i] < row_count[piv]
                    || (row_count[i] == row_count[piv]
                        && (w.x[i].abs() > w.x[piv].abs() || (w.x[i].abs() == w.x[piv].abs() && i < piv)));
                if better {
                    piv = i;
                }
            }
            let step = f.prow.len();
            let pv = w.x[piv];
            // Deterministic entry order: sort the pattern.
            w.pattern.sort_unstable();
            for &i in &w.pattern {
                let v = w.x[i];
                if i != piv && v != 0.0 {
                    let s = f.row_step[i];
                    if s != NONE {
                        f.u_idx.push(s);
                        f.u_val.push(v);
                    } else {
                        f.l_idx.push(i);
                        f.l_val.push(v / pv);
                    }
                }
                w.x[i] = 0.0;
                w.in_pattern[i] = false;
            }
            w.pattern.clear();
            f.u_start.push(f.u_idx.len());
            f.l_start.push(f.l_idx.len());
            f.u_diag.push(pv);
            f.prow.push(piv);
            f.pcol.push(k);
            f.row_step[piv] = step;
        }

        // Dependent columns are replaced by unit columns on leftover rows.
        let mut repairs = Vec::new();
        let free: Vec<usize> = (0..m).filter(|&i| f.row_step[i] == NONE).collect();
        let mut free_rows = free.into_iter();
        for k in singular {
            let r = free_rows.next().expect("one free row per dependent column");
            let step = f.prow.len();
            f.u_start.push(f.u_idx.len());
            f.l_start.push(f.l_idx.len());
            f.u_diag.push(-1.0);
            f.prow.push(r);
            f.pcol.push(k);
            f.row_step[r] = step;
            repairs.push((k, r));
        }
        f.base_nnz = f.l_idx.len() + f.u_idx.len() + m;
        (f, repairs)
    }

    fn dfs(&self, start: usize, w: &mut Work) {
        w.visited[start] = true;
        w.stack.push((start, self.l_start[start]));
        'outer: while let Some(&(s, mut next)) = w.stack.last() {
            let end = self.l_start[s + 1];
            while next < end {
                let i = self.l_idx[next];
                next += 1;
                let t = self.row_step[i];
                if t != usize::MAX && !w.visited[t] {
                    w.visited[t] = true;
                    let top = w.stack.len() - 1;
                    w.stack[top].1 = next;
                    w.stack.push((t, self.l_start[t]));
                    continue 'outer;
                }
            }
            w.stack.pop();
            w.topo.push(s);
        }
    }

    pub(crate) fn eta_count(&self) -> usize {
        self.etas.len()
    }

    /// True when the eta file has grown enough that refactorising is cheaper.
    pub(crate) fn wants_refactor(&self, limit: usize) -> bool {
        self.etas.len() >= limit || self.eta_nnz > 2 * self.base_nnz + 10 * self.m
    }

    /// Solves `B z = a`. `a` is row-indexed on input and holds `z`
    /// (basis-position indexed) on output. `work` must have length `m`.
    pub(crate) fn ftran(&self, a: &mut [f64], work: &mut [f64]) {
        let m = self.m;
        for s in 0..m {
            let ws = a[self.prow[s]];
            work[s] = ws;
            if ws != 0.0 {
                for e in self.l_start[s]..self.l_start[s + 1] {
                    a[self.l_idx[e]] -= self.l_val[e] * ws;
                }
            }
        }
        for s in (0..m).rev() {
            if work[s] == 0.0 {
                continue;
            }
            let z = work[s] / self.u_diag[s];
            work[s] = z;
            for e in self.u_start[s]..self.u_start[s + 1] {
                work[self.u_idx[e]] -= self.u_val[e] * z;
            }
        }
        for s in 0..m {
            a[self.pcol[s]] = work[s];
        }
        for eta in &self.etas {
            let zr = a[eta.pos];
            if zr == 0.0 {
                continue;
            }
            let zr = zr / eta.pivot;
            a[eta.pos] = zr;
            for (&i, &v) in eta.idx.iter().zip(&eta.val) {
                a[i] -= v * zr;
            }
        }
    }

    /// Solves `B^T y = e`. `e` is basis-position indexed on input and holds
    /// the row-indexed `y` on output.
    pub(crate) fn btran(&self, e: &mut [f64], work: &mut [f64]) {
        let m = self.m;
        for eta in self.etas.iter().rev() {
            let mut v = e[eta.pos];
            for (&i, &a) in eta.idx.iter().zip(&eta.val) {
                v -= a * e[i];
            }
            e[eta.pos] = v / eta.pivot;
        }
        for s in 0..m {
            let mut v = e[self.pcol[s]];
            for k in self.u_start[s]..self.u_start[s + 1] {
                v -= self.u_val[k] * work[self.u_idx[k]];
            }
            work[s] = v / self.u_diag[s];
        }
        for s in (0..m).rev() {
            let mut v = work[s];
            for k in self.l_start[s]..self.l_start[s + 1] {
                v -= self.l_val[k] * e[self.l_idx[k]];
            }
            e[self.prow[s]] = v;
        }
    }

    /// Records the replacement of the column at `pos` by one whose FTRAN
    /// image is `alpha`.
    pub(crate) fn update(&mut self, pos: usize, alpha: &[f64]) {
        let mut idx = Vec::new();
        let mut val = Vec::new();
        for (i, &a) in alpha.iter().enumerate() {
            if i != pos && a != 0.0 {
                idx.push(i);
                val.push(a);
            }
        }
        self.eta_nnz += idx.len() + 1;
        self.etas.push(Eta {
            pos,
            pivot: alpha[pos],
            idx,
            val,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_cols(a: &[Vec<f64>]) -> impl FnMut(usize, &mut Vec<usize>, &mut Vec<f64>) + '_ {
        move |k, r, v| {
            for (i, row) in a.iter().enumerate() {
                if row[k] != 0.0 {
                    r.push(i);
                    v.push(row[k]);
                }
            }
        }
    }

    fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        a.iter()
            .map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum())
            .collect()
    }

    fn mat_t_vec(a: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
        (0..a.len())
            .map(|j| (0..a.len()).map(|i| a[i][j] * y[i]).sum())
            .collect()
    }

    fn sample() -> Vec<Vec<f64>> {
        vec![
            vec![4.0, 0.0, 1.0, 0.0, 2.0],
            vec![1.0, 3.0, 0.0, 0.0, 0.0],
            vec![0.0, 2.0, 5.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0, -2.0, 1.0],
            vec![1.0, 0.0, 0.0, 1.0, 6.0],
        ]
    }

    #[test]
    fn ftran_btran_solve() {
        let a = sample();
        let (lu, rep) = LuFactor::factor(5, dense_cols(&a));
        assert!(rep.is_empty());
        let x = [1.0, -2.0, 0.5, 3.0, -1.0];
        let mut rhs = matvec(&a, &x);
        let mut work = vec![0.0; 5];
        lu.ftran(&mut rhs, &mut work);
        for k in 0..5 {
            assert!((rhs[k] - x[k]).abs() < 1e-12);
        }
        let mut rhs = mat_t_vec(&a, &x);
        lu.btran(&mut rhs, &mut work);
        for k in 0..5 {
            assert!((rhs[k] - x[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn eta_update_matches_fresh_factor() {
        let mut a = sample();
        let (mut lu, _) = LuFactor::factor(5, dense_cols(&a));
        let newcol = [0.0, 1.0, -1.0, 2.0, 0.5];
        let mut alpha = newcol.to_vec();
        let mut work = vec![0.0; 5];
        lu.ftran(&mut alpha, &mut work);
        lu.update(2, &alpha);
        for (i, row) in a.iter_mut().enumerate() {
            row[2] = newcol[i];
        }
        let x = [0.3, 1.0, -1.0, 2.0, 4.0];
        let mut rhs = matvec(&a, &x);
        lu.ftran(&mut rhs, &mut work);
        let mut rhs_t = mat_t_vec(&a, &x);
        lu.btran(&mut rhs_t, &mut work);
        for k in 0..5 {
            assert!((rhs[k] - x[k]).abs() < 1e-12);
            assert!((rhs_t[k] - x[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn dependent_column_is_repaired() {
        let a = vec![vec![1.0, 2.0, 0.0], vec![1.0, 2.0, 0.0], vec![0.0, 0.0, 1.0]];
        let (_, rep) = LuFactor::factor(3, dense_cols(&a));
        assert_eq!(rep.len(), 1);
    }
}
