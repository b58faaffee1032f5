use approx::assert_relative_eq;

use blowup_core::eigenfunction::*;
use blowup_core::MetricProfile;

/// Flat `n = 5` radial solution, normalised to 1 at the origin.
fn flat_n5(x: f64) -> f64 {
    if x < 1e-3 {
        1.0 + x * x / 10.0
    } else {
        3.0 * (x.cosh() - x.sinh() / x) / (x * x)
    }
}

fn solve(metric: &MetricProfile, n: usize, lambda: f64, r_end: f64, cells: usize) -> Eigenfunction {
    let cfg = EigenSolverConfig::new(lambda, r_end, r_end / cells as f64)
        .unwrap()
        .with_lambda0(lambda.max(DEFAULT_LAMBDA0));
    solve_eigenfunction(metric, n, cfg).unwrap()
}

#[test]
fn flat_five_dimensions_matches_closed_form() {
    let m = MetricProfile::flat(1e4);
    let lambda = 0.3;
    let eig = solve(&m, 5, lambda, 30.0 / lambda, 1000);
    for r in [0.5, 5.0, 40.0, 99.0] {
        assert_relative_eq!(
            eig.phi(r).unwrap(),
            flat_n5(lambda * r),
            max_relative = 1e-6
        );
    }
}

#[test]
fn flat_three_dimensions_log_values() {
    let m = MetricProfile::flat(1e4);
    let eig = solve(&m, 3, 0.5, 400.0, 1000);
    // ln(sinh x / x) ~ x - ln(2x) for large x
    let x: f64 = 0.5 * 400.0;
    assert_relative_eq!(
        eig.log_phi(400.0).unwrap(),
        x - (2.0 * x).ln(),
        max_relative = 1e-9
    );
}

#[test]
fn long_range_sandwich_and_monotone() {
    let m = MetricProfile::long_range(0.1, 2.0, 0.5, 1e4).unwrap();
    for n in [2, 3, 4] {
        let eig = solve(&m, n, 0.1, 200.0, 1000);
        assert!(eig.c0_measured > 0.0);
        assert!(check_bounds(&eig, &m, n).unwrap() > 0.0);
        assert!(eig.log_values.windows(2).all(|w| w[1] >= w[0]));
    }
}

#[test]
fn out_of_range_requests_fail() {
    let m = MetricProfile::flat(10.0);
    let cfg = EigenSolverConfig::new(0.1, 20.0, 0.1).unwrap();
    assert!(solve_eigenfunction(&m, 3, cfg).is_err());
    let zero = EigenSolverConfig::new(0.0, 5.0, 0.1).unwrap();
    assert!(solve_eigenfunction(&m, 3, zero).is_err());
    // above the ceiling λ0
    let high = EigenSolverConfig::new(0.8, 5.0, 0.1).unwrap();
    assert!(solve_eigenfunction(&m, 3, high).is_err());
    let eig = solve(&MetricProfile::flat(1e4), 3, 0.1, 10.0, 100);
    assert!(eig.phi(11.0).is_err());
}
