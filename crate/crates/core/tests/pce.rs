use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sedkit::model::FnModel;
use sedkit::pce::{build_sparse_grid, hermite, project, MultiIndexSet, PceSurrogate};

/// Probabilists' Hermite polynomial by the three-term recurrence.
fn he(n: usize, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, x);
    if n == 0 {
        return a;
    }
    for k in 1..n {
        (a, b) = (b, x * b - k as f64 * a);
    }
    b
}

/// n-point Gauss-Hermite rule for the standard normal weight: roots of He_n
/// by bracketing and bisection, weights n! / (n He_{n-1}(x))^2.
fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::new();
    let steps = 20_000;
    let (lo, hi) = (-8.0, 8.0);
    let h = (hi - lo) / steps as f64;
    for s in 0..steps {
        let (mut a, mut b) = (lo + h * s as f64, lo + h * (s + 1) as f64);
        if he(n, a) * he(n, b) > 0.0 {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if he(n, a) * he(n, m) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        let x = 0.5 * (a + b);
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        rule.push((x, fact / (n as f64 * he(n - 1, x)).powi(2)));
    }
    assert_eq!(rule.len(), n);
    rule
}

/// E[x^k] for x ~ N(0, 1).
fn normal_moment(k: u32) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        (1..k).step_by(2).map(f64::from).product()
    }
}

#[test]
fn hermite_norms_by_independent_quadrature() {
    let rule = gauss_hermite(10);
    assert!((rule.iter().map(|r| r.1).sum::<f64>() - 1.0).abs() < 1e-12);
    let norm3: f64 = rule.iter().map(|&(x, w)| w * hermite(3, x).powi(2)).sum();
    assert!((norm3 - 6.0).abs() < 1e-10);
    for j in 0..6 {
        for k in 0..6 {
            let ip: f64 = rule.iter().map(|&(x, w)| w * hermite(j, x) * hermite(k, x)).sum();
            let want = if j == k {
                (1..=k).map(|i| i as f64).product()
            } else {
                0.0
            };
            assert!((ip - want).abs() < 1e-9, "<He_{j} He_{k}> = {ip}");
        }
    }
}

#[test]
fn basis_counts_and_products() {
    for (n, p, count) in [(16, 1, 17), (16, 2, 153), (2, 3, 10), (6, 2, 28)] {
        let set = MultiIndexSet::total_degree(n, p).unwrap();
        assert_eq!(set.len(), count);
        assert_eq!(set.eval_basis(&vec![0.3; n]).unwrap().len(), count);
    }
    let set = MultiIndexSet::total_degree(2, 2).unwrap();
    let (a, b) = (0.7, -1.3);
    let psi = set.eval_basis(&[a, b]).unwrap();
    assert!((psi[set.position(&[1, 1]).unwrap()] - a * b).abs() < 1e-15);
    let at_zero = set.eval_basis(&[0.0, 0.0]).unwrap();
    for (k, idx) in set.iter().enumerate() {
        let want: f64 = idx.iter().map(|&d| he(d as usize, 0.0)).product();
        assert_eq!(at_zero[k], want);
    }
}

fn monomials(n: usize, max_degree: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|m: Vec<u32>| {
                let used: u32 = m.iter().sum();
                (0..=max_degree - used).map(move |d| {
                    let mut m = m.clone();
                    m.push(d);
                    m
                })
            })
            .collect();
    }
    out
}

#[test]
fn sparse_grids_integrate_low_degree_monomials() {
    for n in 1..=4 {
        for level in 1..=4 {
            let grid = build_sparse_grid(n, level).unwrap();
            let degree = 2 * level as u32 + 1;
            for m in monomials(n, degree) {
                let got = grid.integrate(|x| x.iter().zip(&m).map(|(v, &k)| v.powi(k as i32)).product());
                let want: f64 = m.iter().map(|&k| normal_moment(k)).product();
                assert!(
                    (got - want).abs() < 1e-10 * want.abs().max(1.0),
                    "n={n} L={level} {m:?}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn second_moment_in_one_dimension() {
    for level in 1..=6 {
        let grid = build_sparse_grid(1, level).unwrap();
        assert!((grid.integrate(|x| x[0] * x[0]) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn grids_are_nested() {
    for n in [1, 2, 3, 6] {
        for level in 2..=4 {
            let coarse = build_sparse_grid(n, level - 1).unwrap();
            let fine = build_sparse_grid(n, level).unwrap();
            let fine_nodes: std::collections::HashSet<Vec<u64>> = (0..fine.len())
                .map(|j| fine.node(j).iter().map(|x| x.to_bits()).collect())
                .collect();
            for j in 0..coarse.len() {
                let key: Vec<u64> = coarse.node(j).iter().map(|x| x.to_bits()).collect();
                assert!(
                    fine_nodes.contains(&key),
                    "n={n}: level {} node {j} missing at level {level}",
                    level - 1
                );
            }
        }
    }
}

#[test]
fn grid_cardinalities() {
    assert_eq!(build_sparse_grid(16, 1).unwrap().len(), 33);
    assert_eq!(build_sparse_grid(16, 2).unwrap().len(), 513);
}

#[test]
fn parseval_matches_sampled_variance() {
    let basis = MultiIndexSet::total_degree(3, 2).unwrap();
    let coefficients: Vec<f64> = (0..basis.len())
        .map(|k| 1.0 / (1.0 + k as f64) * if k % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    let s = PceSurrogate {
        basis,
        coefficients,
        level: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let n = 1_000_000;
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..n {
        let xi: Vec<f64> = (0..3).map(|_| StandardNormal.sample(&mut rng)).collect();
        let v = s.eval(&xi).unwrap();
        sum += v;
        sq += v * v;
    }
    let mean = sum / n as f64;
    let var = sq / n as f64 - mean * mean;
    assert!((var / s.variance() - 1.0).abs() < 0.01, "{var} vs {}", s.variance());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn projection_is_idempotent(
        n in 1usize..4,
        p in 0usize..4,
        seed in any::<u64>(),
    ) {
        let basis = MultiIndexSet::total_degree(n, p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coefficients: Vec<f64> = (0..basis.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let s = PceSurrogate { basis: basis.clone(), coefficients, level: 0 };
        let grid = build_sparse_grid(n, p + 1).unwrap();
        let model = FnModel::new(n, |x: &[f64]| s.eval(x).unwrap());
        let again = project(&model, &grid, &basis).unwrap();
        for (a, b) in again.coefficients.iter().zip(&s.coefficients) {
            prop_assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
        for j in 0..grid.len() {
            let x = grid.node(j);
            prop_assert!((again.eval(x).unwrap() - s.eval(x).unwrap()).abs() < 1e-9);
        }
    }
}
