use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use blowup_core::critical_curves::*;

/// Positive root of `h p^2 - (h + 1) p - 1 = 0`, where Γ_SS(p, p, n) = 0.
fn ss_root_oracle(n: usize) -> f64 {
    let h = (n as f64 - 1.0) / 2.0;
    ((h + 1.0) + ((h + 1.0).powi(2) + 4.0 * h).sqrt()) / (2.0 * h)
}

#[test]
fn ss_diagonal_roots_match_quadratic_formula() {
    for n in 2..=6 {
        let root = diagonal_root(CurveId::GammaSs, n).unwrap();
        assert_abs_diff_eq!(root, ss_root_oracle(n), epsilon = 1e-10);
    }
}

#[test]
fn gg_diagonal_root_is_one_plus_two_over_n_minus_one() {
    for n in 2..=6 {
        let root = diagonal_root(CurveId::GammaGg, n).unwrap();
        assert_abs_diff_eq!(root, 1.0 + 2.0 / (n as f64 - 1.0), epsilon = 1e-10);
    }
}

#[test]
fn classification_follows_speeds() {
    let ss = classify(&SystemSpec::new(SystemKind::SS, 2.0, 2.0, 0.5, 3).unwrap());
    assert_eq!(ss.regime, Regime::SsAnySpeed);
    assert_abs_diff_eq!(ss.classification.exponent().unwrap(), 2.0, epsilon = 1e-12);

    // distinct speeds: 2/3 - 1 < 0
    let gg = classify(&SystemSpec::new(SystemKind::GG, 2.0, 2.0, 0.5, 3).unwrap());
    assert_eq!(gg.regime, Regime::GgDistinctSpeeds);
    assert!(!gg.classification.is_blow_up());

    let sg = classify(&SystemSpec::new(SystemKind::SG, 2.0, 2.0, 1.0, 2).unwrap());
    assert_eq!(sg.governing, CurveId::M);
    assert!(sg.classification.is_blow_up());
}

#[test]
fn region_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("region.csv");
    let ps = linspace(1.1, 4.0, 5);
    let rows = region_scan(&ps, &ps, 3, 0.5).unwrap();
    write_region_csv(&rows, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    // header + one line per row
    assert_eq!(text.lines().count(), rows.len() + 1);
}

#[test]
fn bad_specs_are_rejected() {
    assert!(SystemSpec::new(SystemKind::SS, 1.0, 2.0, 1.0, 3).is_err());
    assert!(SystemSpec::new(SystemKind::SS, 2.0, 2.0, 0.0, 3).is_err());
    assert!(SystemSpec::new(SystemKind::SS, 2.0, 2.0, 1.0, 1).is_err());
    assert!(diagonal_root(CurveId::GammaSs, 1).is_err());
}

proptest! {
    #[test]
    fn curves_ordered(p in 1.05f64..6.0, q in 1.05f64..6.0, n in 2usize..7) {
        prop_assert!((gamma_ss(p, q, n) - gamma_ss(q, p, n)).abs() < 1e-12);
        prop_assert!(gamma_ss(p, q, n) > gamma_sg(p, q, n));
        prop_assert!(gamma_gg_star(p, q, n) < gamma_gg(p, q, n));
        prop_assert!(m_star_curve(p, q, n) <= m_curve(p, q, n));
        // one more dimension lowers every curve by exactly 1/2
        prop_assert!((gamma_gg(p, q, n) - gamma_gg(p, q, n + 1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ss_iteration_matches_closed_form(p in 1.2f64..3.0, q in 1.2f64..3.0) {
        prop_assume!(gamma_ss(p, q, 3) > 0.05);
        let t = iterate_ss(p, q, 3, 1e-3, 1.0, 1.0, 12).unwrap();
        prop_assert!(t.closed_form_max_rel_err < 1e-9);
    }
}
