use sedkit::estimate::{convergence_study, cross_validate, mc_estimate, pce_estimate, StudyOptions};
use sedkit::model::FnModel;
use sedkit::pce::build_sparse_grid;

#[test]
fn monte_carlo_first_and_second_moments() {
    let linear = FnModel::new(2, |x: &[f64]| x[0]);
    let m = mc_estimate(&linear, 1_000_000, 17).unwrap();
    assert!(m.mean.abs() < 4.0 * m.stderr, "{m:?}");
    let square = FnModel::new(2, |x: &[f64]| x[0] * x[0]);
    let m = mc_estimate(&square, 1_000_000, 18).unwrap();
    assert!((m.mean - 1.0).abs() < 4.0 * m.stderr, "{m:?}");
}

#[test]
fn chaos_mean_is_the_weighted_node_sum() {
    let f = |x: &[f64]| (0.3 * x[0] - 0.2 * x[1] * x[2]).exp() + x[1].sin();
    let model = FnModel::new(3, f);
    for level in 1..=4 {
        let est = pce_estimate(&model, level, level - 1).unwrap();
        let grid = build_sparse_grid(3, level).unwrap();
        let direct: f64 = (0..grid.len()).map(|j| grid.weights[j] * f(grid.node(j))).sum();
        assert!((est.mean - direct).abs() < 1e-12 * direct.abs(), "level {level}");
    }
}

#[test]
fn chaos_and_monte_carlo_agree_on_smooth_models() {
    let model = FnModel::new(4, |x: &[f64]| {
        (0.2 * x[0] + 0.1 * x[1] - 0.15 * x[3]).exp() * (1.0 + 0.1 * x[2].cos())
    });
    let pce = pce_estimate(&model, 5, 2).unwrap().mean;
    let mc = mc_estimate(&model, 200_000, 3).unwrap();
    assert!((pce - mc.mean).abs() < 4.0 * mc.stderr, "{pce} vs {mc:?}");
}

#[test]
fn quadratic_model_study() {
    let model = FnModel::new(4, |x: &[f64]| {
        1.0 + x[0] + 0.5 * x[1] * x[1] + 0.3 * x[2] * x[3] + 0.2 * x[3] * x[3]
    });
    let opts = StudyOptions {
        levels: vec![1, 2, 3, 4],
        order: 2,
        ..StudyOptions::default()
    };
    let report = convergence_study(&model, &opts).unwrap();
    report.verify().unwrap();
    let b = report.mc_fit.unwrap().b;
    assert!((0.35..=0.65).contains(&b), "MC exponent {b}");
    // Every level integrates a quadratic exactly.
    for r in &report.pce {
        assert!((r.mean - 1.7).abs() < 1e-12, "{r:?}");
        assert!(r.error.is_none_or(|e| e < 1e-10));
    }
    // MC at the largest size agrees with the chaos mean.
    let last = *report.mc_grand_means.last().unwrap();
    let sd = (1.0f64 + 0.5 + 0.09 + 0.08).sqrt();
    let combined = sd / (opts.realizations as f64 * *opts.mc_sizes.last().unwrap() as f64).sqrt();
    assert!((last - 1.7).abs() < 4.0 * combined);
}

#[test]
fn same_seed_same_report() {
    let model = FnModel::new(3, |x: &[f64]| 2.0 + (x[0] - 0.5 * x[1]).tanh() + x[2]);
    let opts = StudyOptions {
        levels: vec![1, 2, 3],
        order: 2,
        mc_sizes: vec![10, 100],
        realizations: 4,
        seed: 77,
    };
    let a = convergence_study(&model, &opts).unwrap();
    let b = convergence_study(&model, &opts).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.to_plot_table(), b.to_plot_table());
}

#[test]
fn cross_validation_of_polynomials() {
    let model = FnModel::new(3, |x: &[f64]| 5.0 + x[0] - 0.5 * x[1] * x[2] + 0.25 * x[2] * x[2]);
    let s = pce_estimate(&model, 3, 2).unwrap().surrogate;
    let cv = cross_validate(&s, &model, 1000, 5).unwrap();
    assert!(cv.quantile(1.0) <= 1e-9, "max error {}%", cv.quantile(1.0));
}
