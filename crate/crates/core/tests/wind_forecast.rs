use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;
use sedkit::forecast::{
    generate_scenarios, sigma_w_from_sigma_p, ForecastModel, ForecastSpec, GermSource, MaternKernel, SiteForecast,
};
use sedkit::linalg::Matrix;
use sedkit::rng;
use sedkit::wind::{distance_correlation, empirical_covariance, kl_decompose, PowerCurve, HOURS};
use statrs::distribution::{ContinuousCDF, Normal};

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let f = pos - i as f64;
    sorted[i] * (1.0 - f) + sorted[(i + 1).min(sorted.len() - 1)] * f
}

/// Half the one-sigma quantile band of `f(w exp(sigma Z))`, relative to `f(w)`.
fn simulated_spread(curve: &PowerCurve, w: f64, sigma: f64, n: usize) -> f64 {
    let mut r = rng::stream(77, 0);
    let mut p: Vec<f64> = (0..n)
        .map(|_| {
            let z: f64 = r.sample(StandardNormal);
            curve.eval(w * (sigma * z).exp())
        })
        .collect();
    p.sort_by(f64::total_cmp);
    let phi = Normal::new(0.0, 1.0).unwrap();
    (quantile(&p, phi.cdf(1.0)) - quantile(&p, phi.cdf(-1.0))) / (2.0 * curve.eval(w))
}

#[test]
fn sigma_w_matches_simulated_spread_linear_curve() {
    let speeds: Vec<f64> = (0..=200).map(|k| 0.5 + 0.25 * k as f64).collect();
    let values = speeds.iter().map(|w| w / 60.0).collect();
    let curve = PowerCurve::from_knots(speeds, values, 0.5, 50.5).unwrap();
    let s = sigma_w_from_sigma_p(0.35, &[10.0; HOURS], &curve).unwrap();
    let sim = simulated_spread(&curve, 10.0, s, 1_000_000);
    assert!((sim - 0.35).abs() < 0.02 * 0.35, "simulated {sim}");
}

#[test]
fn sigma_w_matches_simulated_spread_default_curve() {
    let curve = PowerCurve::default_turbine();
    let s = sigma_w_from_sigma_p(0.35, &[8.0; HOURS], &curve).unwrap();
    let sim = simulated_spread(&curve, 8.0, s, 1_000_000);
    assert!((sim - 0.35).abs() < 0.02 * 0.35, "sigma_W {s}, simulated {sim}");
}

fn site(label: &str, level: f64, modes: usize, l: f64, nu: f64) -> SiteForecast {
    SiteForecast {
        label: label.into(),
        mean_wind: (0..HOURS).map(|t| level + 0.05 * t as f64).collect(),
        kernel: MaternKernel::normalized(l, nu).unwrap(),
        modes,
        nameplate: 150.0,
        curve: PowerCurve::default_turbine(),
        sigma_w: None,
    }
}

fn log_wind_samples(model: &ForecastModel, site: usize, n: usize, seed: u64) -> Matrix {
    let mut data = Vec::with_capacity(n * HOURS);
    for i in 0..n {
        data.extend(
            model
                .log_wind(site, &rng::normal_germ(seed, i as u64, model.dims()))
                .unwrap(),
        );
    }
    Matrix::from_vec(n, HOURS, data)
}

#[test]
fn generated_fields_reproduce_kernel_covariance() {
    let spec = ForecastSpec {
        sites: vec![site("a", 8.0, 24, 11.15, 0.57)],
        sigma_p: 0.35,
        shared: vec![],
    };
    let model = ForecastModel::new(&spec).unwrap();
    let s = model.sigma_w(0);
    let target = MaternKernel::new(11.15, 0.57, s * s).unwrap().matrix(HOURS, 1.0);
    let cov = empirical_covariance(&log_wind_samples(&model, 0, 100_000, 3)).unwrap();
    let err = cov.sub(&target).frobenius() / target.frobenius();
    assert!(err < 0.05, "relative Frobenius error {err}");
}

#[test]
fn full_rank_kl_sampling_reproduces_covariance() {
    let cov = MaternKernel::new(9.0, 1.2, 0.3).unwrap().matrix(HOURS, 1.0);
    let basis = kl_decompose(&cov, &[0.0; HOURS]).unwrap();
    let mut data = Vec::new();
    for i in 0..100_000u64 {
        data.extend(basis.reconstruct(&rng::normal_germ(11, i, HOURS), HOURS).unwrap());
    }
    let emp = empirical_covariance(&Matrix::from_vec(100_000, HOURS, data)).unwrap();
    assert!(emp.sub(&cov).frobenius() / cov.frobenius() < 0.05);
}

#[test]
fn shared_coordinates_are_identical_and_others_uncorrelated() {
    let spec = ForecastSpec {
        sites: vec![
            site("wy_a", 8.0, 6, 11.15, 0.57),
            site("wy_b", 7.0, 6, 11.40, 0.56),
            site("ca", 9.0, 6, 10.0, 0.6),
        ],
        sigma_p: 0.35,
        shared: vec![vec![(0, 0), (1, 0)], vec![(0, 1), (1, 1)]],
    };
    let model = ForecastModel::new(&spec).unwrap();
    assert_eq!(model.dims(), 16);
    let set = generate_scenarios(
        &model,
        &GermSource::Normal {
            seed: 8,
            count: 100_000,
        },
    )
    .unwrap();
    let coord = |site: usize, k: usize| set.germs.col(model.coordinates(site)[k]);
    let corr = |x: &[f64], y: &[f64]| {
        let n = x.len() as f64;
        let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
        sxy / (sxx * syy).sqrt()
    };
    for k in 0..2 {
        assert_eq!(coord(0, k), coord(1, k));
    }
    for k in 2..6 {
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let c = corr(&coord(a, k), &coord(b, k));
            assert!(c.abs() < 0.02, "sites {a},{b} mode {k}: {c}");
        }
    }
}

#[test]
fn table_kernels_decay_on_day_grid() {
    for (l, nu) in [(11.15, 0.57), (11.40, 0.56), (10.10, 0.62), (10.0, 0.5), (12.0, 1.0)] {
        let k = MaternKernel::normalized(l, nu).unwrap();
        let mut prev = 1.0;
        for dt in 1..HOURS {
            let r = k.eval(dt as f64) / k.eval(0.0);
            assert!(r > 0.0 && r <= 1.0);
            assert!(r <= prev);
            prev = r;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dcor_symmetric_and_affine_invariant(
        x in prop::collection::vec(-10.0f64..10.0, 5..40),
        noise in prop::collection::vec(-1.0f64..1.0, 40),
        a in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0],
        b in -10.0f64..10.0,
    ) {
        let y: Vec<f64> = x.iter().zip(&noise).map(|(v, e)| v * v + e).collect();
        let d = distance_correlation(&x, &y).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&d));
        prop_assert!((d - distance_correlation(&y, &x).unwrap()).abs() < 1e-10);
        let xs: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        prop_assert!((d - distance_correlation(&xs, &y).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn kl_trace_and_orthonormality(seed in 0u64..1000, n in 2usize..40) {
        let mut data = Vec::new();
        for i in 0..n as u64 {
            data.extend(rng::normal_germ(seed, i, HOURS));
        }
        let cov = empirical_covariance(&Matrix::from_vec(n, HOURS, data)).unwrap();
        let basis = kl_decompose(&cov, &[0.0; HOURS]).unwrap();
        prop_assert!((basis.total_variance() - cov.trace()).abs() < 1e-8 * (1.0 + cov.trace()));
        let f = &basis.eigenvectors;
        let gram = f.transpose().matmul(f);
        prop_assert!(gram.sub(&Matrix::identity(HOURS)).max_abs() < 1e-10);
        prop_assert!(basis.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn project_reconstruct_identity(seed in 0u64..1000) {
        let cov = MaternKernel::new(6.0, 0.8, 0.4).unwrap().matrix(HOURS, 1.0);
        let mean: Vec<f64> = (0..HOURS).map(|t| 2.0 + 0.01 * t as f64).collect();
        let basis = kl_decompose(&cov, &mean).unwrap();
        let sample = basis.reconstruct(&rng::normal_germ(seed, 0, HOURS), HOURS).unwrap();
        let xi = basis.project(&Matrix::from_vec(1, HOURS, sample.clone())).unwrap();
        let back = basis.reconstruct(xi.xi.row(0), HOURS).unwrap();
        for t in 0..HOURS {
            prop_assert!((back[t] - sample[t]).abs() < 1e-8 * (1.0 + sample[t].abs()));
        }
    }
}
