//! Canonical experiment configurations.
//!
//! | preset | experiment |
//! |--------|------------|
//! | `curves-n3-c05` | region scan, curve values, diagonal roots, iteration checks |
//! | `flat-eigen-n3` | eigenfunction vs `sinh(λr)/(λr)` |
//! | `flat-eigen-n2` | eigenfunction vs `I_0(λr)` |
//! | `long-range-eigen` | two-sided bound on `LongRange{0.1, 2}` |
//! | `lemma22-flat-n3-c1` | weighted integral slopes, equal speeds |
//! | `lemma22-flat-n3-c05` | weighted integral ratios, `c = 0.5` |
//! | `ss-n3-p2q2` | SS comparison ODE ε-sweep |
//! | `gg-n2-p2q2` | GG comparison ODE ε-sweep |
//! | `gg-multi-n2-c05` | GG two-speed ODE ε-sweep, `λ = 0.25` |
//! | `sg-n3-c05` | SG comparison ODE ε-sweep, `c = 0.5` |
//! | `kato-grid` | sampled Kato instances |
//! | `pde-ss-flat-n3` | PDE ε-sweep with reference problems |
//! | `validate-long-range` | structural checks of `LongRange{0.1, 2}` |
//! | `all` | every preset above |

use blowup_core::comparison_ode::{Form, SystemId};
use blowup_core::critical_curves::{CurveId, SystemKind};
use blowup_core::wave_sim::Shape;

use crate::config::*;
use crate::error::{LabError, LabResult};

const SINGLE: [&str; 13] = [
    "curves-n3-c05",
    "flat-eigen-n3",
    "flat-eigen-n2",
    "long-range-eigen",
    "lemma22-flat-n3-c1",
    "lemma22-flat-n3-c05",
    "ss-n3-p2q2",
    "gg-n2-p2q2",
    "gg-multi-n2-c05",
    "sg-n3-c05",
    "kato-grid",
    "pde-ss-flat-n3",
    "validate-long-range",
];

pub fn names() -> Vec<&'static str> {
    let mut v = SINGLE.to_vec();
    v.push("all");
    v
}

/// `count` values from `hi` down to `lo`, evenly spaced in `ln`; both
/// endpoints are exact.
pub fn geometric(hi: f64, lo: f64, count: usize) -> Vec<f64> {
    let step = (lo / hi).ln() / (count - 1) as f64;
    let mut v: Vec<f64> = (0..count).map(|i| hi * (step * i as f64).exp()).collect();
    v[count - 1] = lo;
    v
}

pub fn preset(name: &str) -> LabResult<ExperimentConfig> {
    let experiments = if name == "all" {
        SINGLE.iter().map(|n| single(n).unwrap()).collect()
    } else {
        vec![single(name).ok_or_else(|| LabError::UnknownPreset {
            name: name.to_string(),
            available: names().join(", "),
        })?]
    };
    Ok(ExperimentConfig {
        experiments,
        ..ExperimentConfig::default()
    })
}

fn single(name: &str) -> Option<Experiment> {
    let e = match name {
        "curves-n3-c05" => Experiment::CurvesScan(curves()),
        "flat-eigen-n3" => Experiment::EigenVerify(EigenVerify {
            name: name.into(),
            metric: MetricConfig::flat(0.5),
            ns: vec![3],
            lambdas: vec![0.1, 0.5],
            r_scale: 50.0,
            cells: 2000,
            oracle: EigenOracle::Sinh,
            tol: 1e-6,
        }),
        "flat-eigen-n2" => Experiment::EigenVerify(EigenVerify {
            name: name.into(),
            metric: MetricConfig::flat(0.5),
            ns: vec![2],
            lambdas: vec![0.1, 0.5],
            r_scale: 20.0,
            cells: 2000,
            oracle: EigenOracle::BesselI0,
            tol: 1e-6,
        }),
        "long-range-eigen" => Experiment::EigenVerify(EigenVerify {
            name: name.into(),
            metric: MetricConfig::long_range(0.1, 2.0, 0.5),
            ns: vec![2, 3],
            lambdas: vec![0.1],
            r_scale: 20.0,
            cells: 1000,
            oracle: EigenOracle::None,
            tol: 1e-6,
        }),
        "lemma22-flat-n3-c1" => Experiment::Lemma22Verify(lemma22(name, 1.0, Some(0.1))),
        "lemma22-flat-n3-c05" => Experiment::Lemma22Verify(lemma22(name, 0.5, None)),
        "ss-n3-p2q2" => Experiment::OdeSweep(OdeSweep {
            eps: geometric(1e-2, 1e-4, 7),
            t_max: 1e12,
            threshold: 1e60,
            tolerance: 0.15,
            ..ode(name, SystemId::SS2nd, 1.0, 3)
        }),
        "gg-n2-p2q2" => Experiment::OdeSweep(OdeSweep {
            eps: geometric(1e-1, 1e-3, 7),
            t_max: 1e9,
            threshold: 1e60,
            tolerance: 0.15,
            ..ode(name, SystemId::GG1st, 1.0, 2)
        }),
        "gg-multi-n2-c05" => Experiment::OdeSweep(OdeSweep {
            lambda: 0.25,
            form: Form::LowerBound,
            eps: geometric(1e-1, 1e-3, 7),
            t_max: 1e40,
            threshold: 1e60,
            tolerance: 0.25,
            ..ode(name, SystemId::GGMulti, 0.5, 2)
        }),
        "sg-n3-c05" => Experiment::OdeSweep(OdeSweep {
            eps: geometric(3e-1, 3e-3, 7),
            t_max: 1e40,
            threshold: 1e100,
            tolerance: 0.25,
            ..ode(name, SystemId::SG, 0.5, 3)
        }),
        "kato-grid" => Experiment::KatoGrid(KatoGrid {
            name: name.into(),
            count: 20,
            min_margin: 1.0,
            t_max: 1e6,
            threshold: 1e100,
            seed: None,
            hand_checks: true,
            agreement: Some(AgreementScan {
                ps: blowup_core::critical_curves::linspace(1.1, 4.0, 20),
                qs: blowup_core::critical_curves::linspace(1.1, 4.0, 20),
                n: 3,
            }),
        }),
        "pde-ss-flat-n3" => Experiment::PdeSweep(PdeSweep {
            name: name.into(),
            system: SystemKind::SS,
            p: 2.0,
            q: 2.0,
            c: 1.0,
            n: 3,
            metric: MetricConfig::flat(0.9),
            shape: Shape::PolyBump,
            support_radius: 1.0,
            eps: vec![10.0, 6.3, 4.0, 2.5, 1.6, 1.0],
            h: 0.1,
            refine_h: Some(0.05),
            t_max: 600.0,
            threshold: 1e8,
            cfl: 0.5,
            snapshots: 20,
            support_tol: 1e-2,
            tolerance: 0.3,
            refine_tolerance: 0.1,
            verify: Some(PdeVerify {
                manufactured_hs: vec![0.08, 0.04, 0.02],
                order_range: [1.8, 2.2],
                dalembert_hs: vec![0.04, 0.02],
                dalembert_t: 2.0,
                dalembert_min_order: 1.8,
                identity: IdentityCheck {
                    eps: 2.0,
                    h: 0.05,
                    t_max: 3.0,
                    tol: 5e-3,
                },
            }),
        }),
        "validate-long-range" => Experiment::ValidateMetric(ValidateMetric {
            name: name.into(),
            metric: MetricConfig::long_range(0.1, 2.0, 0.5),
            r_end: 100.0,
            cells: 1000,
            tol: 1.0,
        }),
        _ => return None,
    };
    Some(e)
}

fn curves() -> CurvesScan {
    let spot = |curve, p, q, n, expected| CurveSpot {
        curve,
        p,
        q,
        n,
        expected,
        tol: 1e-12,
    };
    let grid = vec![1.5, 2.0, 2.5, 3.0];
    CurvesScan {
        name: "curves-n3-c05".into(),
        n: 3,
        c: 0.5,
        p_range: [1.1, 4.0],
        q_range: [1.1, 4.0],
        count: 30,
        // c != 1 so GG is governed by max(p,q)/(pq-1) - 1 = 2/3 - 1
        region_spots: vec![RegionSpot {
            kind: SystemKind::GG,
            p: 2.0,
            q: 2.0,
            expected: -1.0 / 3.0,
            tol: 1e-12,
        }],
        spots: vec![
            // (2+2+1/2)/3 - 1
            spot(CurveId::GammaSs, 2.0, 2.0, 3, 0.5),
            // 3/3 - 1
            spot(CurveId::GammaGg, 2.0, 2.0, 3, 0.0),
            // 2/3 - 1/2
            spot(CurveId::GammaGgStar, 2.0, 2.0, 2, 1.0 / 6.0),
            // (2+1+1/2)/3 - 1
            spot(CurveId::GammaSg, 2.0, 2.0, 3, 1.0 / 6.0),
            // min(1/6, 7/6 - 1/2)
            spot(CurveId::MStar, 2.0, 2.0, 2, 1.0 / 6.0),
        ],
        roots: vec![
            // p^2 - 2p - 1 = 0
            RootCheck {
                curve: CurveId::GammaSs,
                n: 3,
                expected: 1.0 + 2f64.sqrt(),
                tol: 1e-10,
            },
            RootCheck {
                curve: CurveId::GammaGg,
                n: 3,
                expected: 2.0,
                tol: 1e-10,
            },
        ],
        iterations: Some(IterationCheck {
            ps: grid.clone(),
            qs: grid,
            ns: vec![2, 3, 4],
            j_max: 12,
            eps: 1e-3,
            tol: 1e-9,
            hand_unrolled: true,
        }),
        series: Some(SeriesCheck {
            p: 2.0,
            q: 2.0,
            weight: 6.0,
            m_const: 9f64.powi(-6),
            // 6 ln4 · 7/9 + 6 ln9 / 3
            expected: 10.8638,
            tol: 1e-3,
        }),
    }
}

fn lemma22(name: &str, c: f64, slope_tol: Option<f64>) -> Lemma22Verify {
    Lemma22Verify {
        name: name.into(),
        metric: MetricConfig::flat(0.5),
        n: 3,
        c,
        ps: vec![2.0, 3.0],
        lambda: 0.5,
        r1: 1.0,
        t_min: 1.0,
        t_max: 100.0,
        t_count: 41,
        h: 0.05,
        slope_tol,
    }
}

fn ode(name: &str, system: SystemId, c: f64, n: usize) -> OdeSweep {
    OdeSweep {
        name: name.into(),
        system,
        p: 2.0,
        q: 2.0,
        c,
        n,
        lambda: 0.0,
        form: Form::Raw,
        seed_forcing: true,
        eps: Vec::new(),
        t_max: 0.0,
        threshold: 0.0,
        tolerance: 0.0,
        min_decades: 2.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples() {
        let Experiment::OdeSweep(ss) = &preset("ss-n3-p2q2").unwrap().experiments[0] else {
            panic!()
        };
        assert_eq!(ss.system, SystemId::SS2nd);
        let Experiment::OdeSweep(gg) = &preset("gg-multi-n2-c05").unwrap().experiments[0] else {
            panic!()
        };
        assert_eq!((gg.system, gg.lambda), (SystemId::GGMulti, 0.25));
        assert!(matches!(
            preset("flat-eigen-n3").unwrap().experiments[0],
            Experiment::EigenVerify(_)
        ));
    }

    #[test]
    fn unknown_preset_lists_names() {
        let err = preset("nope").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("ss-n3-p2q2"));
    }

    #[test]
    fn every_preset_validates() {
        for n in names() {
            preset(n).unwrap().validate().unwrap();
        }
        assert_eq!(preset("all").unwrap().experiments.len(), SINGLE.len());
    }

    #[test]
    fn geometric_endpoints() {
        let g = geometric(1e-1, 1e-3, 5);
        assert_eq!(g[0], 1e-1);
        assert_eq!(g[4], 1e-3);
        assert_eq!((g[0] / g[4]).log10(), 2.0);
        assert!((g[2] / 1e-2 - 1.0).abs() < 1e-12);
    }
}
