use approx::assert_relative_eq;
use proptest::prelude::*;

use blowup_core::comparison_ode::*;
use blowup_core::critical_curves::{KatoHypotheses, SystemKind, SystemSpec};
use blowup_core::fit::fit_powerlaw;

fn ss() -> ComparisonSystem {
    let spec = SystemSpec::new(SystemKind::SS, 2.0, 2.0, 1.0, 3).unwrap();
    ComparisonSystem::new(SystemId::SS2nd, spec, 0.0).unwrap()
}

#[test]
fn smaller_data_blows_up_later() {
    let sys = ss();
    let a = integrate(&sys, 1e-2, 1e12, 1e60).unwrap();
    let b = integrate(&sys, 1e-3, 1e12, 1e60).unwrap();
    let (ta, tb) = (a.status.t_star().unwrap(), b.status.t_star().unwrap());
    assert!(tb > ta);
    assert!(a.monotone && b.monotone);
    // one decade of eps is about two decades of T
    assert!((tb / ta).log10() > 1.5 && (tb / ta).log10() < 2.5);
}

#[test]
fn sweep_slope_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let eps = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4];
    let rep = epsilon_sweep(&ss(), &eps, 1e12, 1e60).unwrap();
    assert_relative_eq!(rep.fit.slope, -2.0, max_relative = 0.15);
    assert!(rep.monotone_in_eps);
    write_sweep_csv(&rep.rows, dir.path().join("s.csv")).unwrap();
    write_fit_json(&rep, dir.path().join("f.json")).unwrap();
    let text = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert_eq!(text.lines().count(), eps.len() + 1);
}

#[test]
fn too_short_horizon_is_reported_not_hidden() {
    let run = integrate(&ss(), 1e-3, 1.0, 1e60).unwrap();
    assert_eq!(run.status.label(), "no_blow_up");
    assert!(epsilon_sweep(&ss(), &[1e-2, 1e-3, 1e-4, 1e-5], 1.0, 1e60).is_err());
}

#[test]
fn kato_hand_instance_blows_up() {
    let h = KatoHypotheses::new(3.0, 3.0, 2.0, 2.0, 2.0).unwrap();
    let run = integrate_kato(&h, 1e6, 1e100).unwrap();
    assert!(run.status.t_star().is_some());
}

#[test]
fn kato_sampling_is_seeded() {
    let a = sample_kato_instances(7, 10, 1.0);
    let b = sample_kato_instances(7, 10, 1.0);
    let c = sample_kato_instances(8, 10, 1.0);
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
    assert_ne!(format!("{a:?}"), format!("{c:?}"));
    assert!(a.iter().all(|h| h.margin() >= 1.0));
}

proptest! {
    #[test]
    fn fit_recovers_exact_power_law(slope in -8.0f64..-0.2, log_a in -5.0f64..5.0) {
        let eps = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
        let t: Vec<f64> = eps.iter().map(|e: &f64| (log_a + slope * e.ln()).exp()).collect();
        let fit = fit_powerlaw(&eps, &t).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-9);
        prop_assert!((fit.r_squared - 1.0).abs() < 1e-9);
    }
}
