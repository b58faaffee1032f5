use super::*;
use crate::critical_curves::{SystemKind, SystemSpec};
use crate::eigenfunction::{solve_eigenfunction, EigenSolverConfig};
use crate::metric::{MetricProfile, RadialGrid};

fn flat() -> MetricProfile {
    MetricProfile::flat(1e4).with_delta0(0.9)
}

fn ss(c: f64) -> SystemSpec {
    SystemSpec::new(SystemKind::SS, 2.0, 2.0, c, 3).unwrap()
}

fn bump_data(metric: &MetricProfile, eps: f64, r: f64) -> DataProfile {
    let g = RadialGrid::uniform(10.0, 10).unwrap();
    make_initial_data(Shape::PolyBump, eps, r, &g, metric).unwrap()
}

fn only_u0(mut d: DataProfile) -> DataProfile {
    d.u1 = Component::zero();
    d.v0 = Component::zero();
    d.v1 = Component::zero();
    d
}

#[test]
fn zero_data_stays_zero() {
    let m = flat();
    let mut d = bump_data(&m, 1.0, 1.0);
    d.eps = 0.0;
    let grid = light_cone_grid(&m, 1.0, 5.0, d.r1, 0.1).unwrap();
    let opts = SimOptions {
        snapshot_every: 10,
        ..SimOptions::default()
    };
    let out = run_simulation(&ss(1.0), &m, &d, &grid, 5.0, &opts).unwrap();
    assert_eq!(out.status, SimStatus::Completed);
    for s in &out.snapshots {
        assert!(s.u.iter().chain(&s.v).all(|x| *x == 0.0));
    }
    assert!(out.support_report.unwrap().pass);
}

#[test]
fn linear_flat_matches_dalembert() {
    let rep = dalembert_order(&[0.04, 0.02], 2.0).unwrap();
    assert!(rep.errors[1] < 1e-2, "{rep:?}");
    let order = rep.finest_order();
    assert!(order > 1.8 && order < 2.3, "{rep:?}");
}

#[test]
fn dalembert_oracle_at_the_centre() {
    // u(t, 0) = d/dt (t u0(t)) for the free wave
    let u0 = |x: f64| Shape::PolyBump.eval(x, 1.0);
    let t: f64 = 0.4;
    let (d1, _) = Shape::PolyBump.derivs(t, 1.0);
    let exact = u0(t) + t * d1;
    assert!((dalembert_n3(u0, t, 0.0) - exact).abs() < 1e-8);
    assert_eq!(dalembert_n3(u0, 0.0, 0.5), u0(0.5));
}

#[test]
fn manufactured_solution_second_order() {
    let rep = manufactured_order(&[0.08, 0.04, 0.02]).unwrap();
    let order = rep.finest_order();
    assert!((1.8..=2.2).contains(&order), "{rep:?}");
}

#[test]
fn linear_energy_is_conserved() {
    let m = flat();
    let d = only_u0(bump_data(&m, 1.0, 1.0));
    let spec = ss(1.0);
    let h = 0.05;
    let t_max = 20.0;
    let grid = light_cone_grid(&m, 1.0, t_max, d.r1, h).unwrap();
    let op = RadialOperator::new(&m, &grid, 3).unwrap();
    let dt = stable_dt(&m, h, 1.0, DEFAULT_CFL);
    let mut st = FieldState::initialize(&d, &grid, &op, &spec, Wiring::Linear, dt, None);
    let len = grid.len();
    // energy at level m from levels m-1, m, m+1
    let energy = |prev: &[f64], cur: &[f64], next: &[f64]| {
        let mut e = 0.0;
        for i in 0..len - 1 {
            let ut = (next[i] - prev[i]) / (2.0 * dt);
            let rp = grid.r_points[i] + 0.5 * h;
            let ur = (cur[i + 1] - cur[i]) / h;
            e += ut * ut * op.cell_weight[i] + ur * ur * rp * rp / m.k_at(rp) * h;
        }
        e
    };
    let steps = (t_max / dt).round() as usize;
    let mut values = Vec::new();
    for _ in 0..steps {
        let prev = st.u_prev.clone();
        let cur = st.u.clone();
        assert!(step(&mut st, &op, &spec, Wiring::Linear, None));
        values.push(energy(&prev, &cur, &st.u));
    }
    let e0 = values[0];
    let drift = values
        .iter()
        .map(|e| (e / e0 - 1.0).abs())
        .fold(0.0, f64::max);
    assert!(drift < 0.01, "drift {drift}");
}

#[test]
fn support_tracks_flat_cone() {
    let m = flat();
    let d = only_u0(bump_data(&m, 1.0, 1.0));
    let spec = ss(0.5);
    let h = 0.05;
    let t_max = 10.0;
    let grid = light_cone_grid(&m, 0.5, t_max, d.r1, h).unwrap();
    let opts = SimOptions {
        wiring: Wiring::Linear,
        snapshot_every: 50,
        ..SimOptions::default()
    };
    let out = run_simulation(&spec, &m, &d, &grid, t_max, &opts).unwrap();
    let rep = out.support_report.unwrap();
    assert!(rep.pass);
    // d'Alembert: the front moves with speed c, so the offset seen at t = 0
    // (the bump's own tail) is carried along
    let gap0 = rep.rows[0].gap_u;
    for row in &rep.rows {
        assert!((row.gap_u - gap0).abs() <= 2.0 * h, "{row:?}");
    }
}

#[test]
fn support_check_rejects_a_too_slow_cone() {
    let m = flat();
    let d = only_u0(bump_data(&m, 1.0, 1.0));
    let t_max = 10.0;
    let grid = light_cone_grid(&m, 1.0, t_max, d.r1, 0.05).unwrap();
    let opts = SimOptions {
        wiring: Wiring::Linear,
        snapshot_every: 50,
        ..SimOptions::default()
    };
    let out = run_simulation(&ss(1.0), &m, &d, &grid, t_max, &opts).unwrap();
    assert!(out.support_report.unwrap().pass);
    let wrong = check_support(&out.snapshots, &grid, &m, &ss(0.9), &d, 1e-2);
    assert!(!wrong.pass);
}

#[test]
fn support_uses_geodesic_cone_on_long_range_metric() {
    let m = MetricProfile::long_range(0.3, 1.0, 0.5, 1e4).unwrap();
    let g = RadialGrid::uniform(10.0, 10).unwrap();
    let d = only_u0(make_initial_data(Shape::PolyBump, 1.0, 1.0, &g, &m).unwrap());
    let spec = ss(1.0);
    let h = 0.05;
    let t_max = 8.0;
    let grid = light_cone_grid(&m, 1.0, t_max, d.r1, h).unwrap();
    let opts = SimOptions {
        wiring: Wiring::Linear,
        snapshot_every: 40,
        ..SimOptions::default()
    };
    let out = run_simulation(&spec, &m, &d, &grid, t_max, &opts).unwrap();
    let rep = out.support_report.unwrap();
    assert!(rep.pass);
    // the front keeps its initial offset from the r̃-cone; against the
    // Euclidean cone it drifts by r̃(r) - r = 0.3 asinh(r)
    let (first, last) = (rep.rows[0], *rep.rows.last().unwrap());
    for row in &rep.rows {
        assert!((row.gap_u - first.gap_u).abs() <= rep.slack, "{row:?}");
    }
    assert!(
        last.euclidean_gap_u - first.euclidean_gap_u > 2.0 * rep.slack,
        "{last:?}"
    );
}

#[test]
fn ss_second_difference_matches_source() {
    let rep = source_identity(2.0, 0.05, 3.0).unwrap();
    assert!(rep.max_relative_error < 5e-3, "{rep:?}");
    // nonnegative sources: F and G increase
    assert!(rep.monotone);
}

#[test]
fn ss_blow_up_regression() {
    let m = flat();
    let d = bump_data(&m, 4.0, 1.0);
    let spec = ss(1.0);
    let t_max = 60.0;
    let grid = light_cone_grid(&m, 1.0, t_max, d.r1, 0.1).unwrap();
    let opts = SimOptions {
        snapshot_every: 100,
        ..SimOptions::default()
    };
    let out = run_simulation(&spec, &m, &d, &grid, t_max, &opts).unwrap();
    let t = out.status.t_star().expect("blow-up");
    assert!((t - 30.607).abs() < 0.05, "{t}");
    assert!(out.support_report.unwrap().pass);
}

#[test]
fn gg_functionals_follow_the_monotonicity_argument() {
    let m = flat();
    let eig = solve_eigenfunction(&m, 3, EigenSolverConfig::new(0.5, 20.0, 0.05).unwrap()).unwrap();
    let d = bump_data(&m, 0.5, 1.0);
    let spec = SystemSpec::new(SystemKind::GG, 2.0, 2.0, 0.5, 3).unwrap();
    let cond = check_data_conditions(&d, &eig, &m, &spec).unwrap();
    assert!(cond.pass);
    let t_max = 8.0;
    let grid = light_cone_grid(&m, 0.5, t_max, d.r1, 0.05).unwrap();
    let opts = SimOptions {
        record_every: 10,
        eig: Some(&eig),
        ..SimOptions::default()
    };
    let out = run_simulation(&spec, &m, &d, &grid, t_max, &opts).unwrap();
    assert_eq!(out.status, SimStatus::Completed);
    let s = &out.functional_series;
    let tol = 1e-6 * s.g[0].abs();
    for k in 1..s.len() {
        assert!(s.f[k] >= s.f[k - 1] - tol, "F at {}", s.times[k]);
        assert!(s.g[k] >= s.g[k - 1] - tol, "G at {}", s.times[k]);
        assert!(2.0 * s.h2[k] - s.g[k] >= -tol);
        assert!(s.h2[k] >= 0.5 * s.g[0] - tol);
    }
}

#[test]
fn configuration_errors() {
    let m = flat();
    let d = bump_data(&m, 1.0, 1.0);
    let spec = ss(1.0);
    let grid = light_cone_grid(&m, 1.0, 5.0, d.r1, 0.1).unwrap();
    let too_big = SimOptions {
        dt: Some(1.0),
        ..SimOptions::default()
    };
    assert!(matches!(
        run_simulation(&spec, &m, &d, &grid, 5.0, &too_big),
        Err(crate::Error::Config(_))
    ));
    assert!(matches!(
        run_simulation(&spec, &m, &d, &grid, 50.0, &SimOptions::default()),
        Err(crate::Error::Config(_))
    ));
}

#[test]
fn sweep_fits_synthetic_passthrough() {
    // the PDE sweep reuses the ODE fitter
    let eps = [1e-1, 1e-2, 1e-3, 1e-4];
    let t: Vec<f64> = eps.iter().map(|e: &f64| e.powi(-2)).collect();
    let fit = crate::fit::fit_powerlaw(&eps, &t).unwrap();
    assert!((fit.slope + 2.0).abs() < 1e-12);
}
