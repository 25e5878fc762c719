#![allow(dead_code, clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sedkit::lp::LinearProgram;

/// Minimum of `c'x + offset` over the vertices of a bounded polytope, found by
/// solving every square system of active bounds. `None` when no vertex is
/// feasible. Only intended for a handful of variables.
pub fn vertex_enumeration(lp: &LinearProgram) -> Option<f64> {
    let n = lp.num_vars();
    let mut rows = vec![vec![0.0; n]; lp.num_rows()];
    for &(i, j, v) in &lp.triplets {
        rows[i][j] += v;
    }
    // Every finite bound is a candidate hyperplane a'x = b.
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        for b in [lp.col_lower[j], lp.col_upper[j]] {
            if b.is_finite() {
                planes.push((e.clone(), b));
            }
        }
    }
    for (i, row) in rows.iter().enumerate() {
        let mut bounds = vec![lp.row_lower[i]];
        if lp.row_upper[i] != lp.row_lower[i] {
            bounds.push(lp.row_upper[i]);
        }
        for b in bounds {
            if b.is_finite() {
                planes.push((row.clone(), b));
            }
        }
    }
    let feasible = |x: &[f64]| {
        let tol = 1e-9;
        (0..n).all(|j| x[j] >= lp.col_lower[j] - tol && x[j] <= lp.col_upper[j] + tol)
            && rows.iter().enumerate().all(|(i, r)| {
                let act: f64 = r.iter().zip(x).map(|(a, b)| a * b).sum();
                act >= lp.row_lower[i] - tol * (1.0 + act.abs()) && act <= lp.row_upper[i] + tol * (1.0 + act.abs())
            })
    };
    let mut best: Option<f64> = None;
    let mut pick = Vec::with_capacity(n);
    combinations(planes.len(), n, 0, &mut pick, &mut |idx| {
        let a: Vec<Vec<f64>> = idx.iter().map(|&k| planes[k].0.clone()).collect();
        let b: Vec<f64> = idx.iter().map(|&k| planes[k].1).collect();
        if let Some(x) = gauss_solve(a, b) {
            if feasible(&x) {
                let obj = lp.eval_objective(&x);
                best = Some(best.map_or(obj, |v: f64| v.min(obj)));
            }
        }
    });
    best
}

fn combinations(total: usize, k: usize, start: usize, pick: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if pick.len() == k {
        f(pick);
        return;
    }
    for i in start..total {
        if total - i < k - pick.len() {
            break;
        }
        pick.push(i);
        combinations(total, k, i + 1, pick, f);
        pick.pop();
    }
}

/// Dense Gaussian elimination with partial pivoting; `None` if singular.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-10 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            if f != 0.0 {
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for c in (0..n).rev() {
        let s: f64 = (c + 1..n).map(|k| a[c][k] * x[k]).sum();
        x[c] = (b[c] - s) / a[c][c];
    }
    Some(x)
}

/// Random LP with boxed variables (so it is never unbounded), up to
/// `max_n` variables and `max_m` rows of mixed sense, small integer data.
pub fn random_lp(seed: u64, max_n: usize, max_m: usize) -> LinearProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_n);
    let m = rng.random_range(0..=max_m);
    let mut lp = LinearProgram::new();
    for _ in 0..n {
        let lo = rng.random_range(-5..=0) as f64;
        let hi = lo + rng.random_range(0..=8) as f64;
        lp.add_var(rng.random_range(-6..=6) as f64, lo, hi);
    }
    for _ in 0..m {
        let mut entries = Vec::new();
        for j in 0..n {
            if rng.random_bool(0.6) {
                entries.push((j, rng.random_range(-4..=4) as f64));
            }
        }
        let centre = rng.random_range(-6..=6) as f64;
        let (lo, hi) = match rng.random_range(0..4) {
            0 => (f64::NEG_INFINITY, centre),
            1 => (centre, f64::INFINITY),
            2 => (centre, centre + rng.random_range(0..=5) as f64),
            _ => (centre, centre),
        };
        lp.add_row(lo, hi, &entries);
    }
    lp
}
