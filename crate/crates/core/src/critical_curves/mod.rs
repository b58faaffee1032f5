//! Critical curves for the three coupled systems, blow-up classification,
//! the exponent/coefficient iterations behind the lifespan bounds, and the
//! vector Kato criterion.
//!
//! With `P = pq - 1` and `h = (n-1)/2`:
//!
//! | curve   | value                                       |
//! |---------|---------------------------------------------|
//! | `Γ_SS`  | `max(p+2+1/q, q+2+1/p)/P - h`               |
//! | `Γ_GG`  | `max(p+1, q+1)/P - h`                       |
//! | `Γ*_GG` | `max(p, q)/P - h`                           |
//! | `Γ_SG`  | `max(p+1+1/q, 2+1/p)/P - h`                 |
//! | `M`     | `min(Γ_GG, Γ_SG)`                           |
//! | `M*`    | `min(Γ*_GG, Γ_SG)`                          |

mod iteration;
mod kato;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

pub use iteration::{
    closed_form_b, iterate_gg, iterate_sg, iterate_ss, series_s_inf, GgVariant, IterationTrace,
    SeriesSum, SgBranch,
};
pub use kato::{kato_check, ss_agreement_scan, ss_kato_hypotheses, AgreementRow, KatoHypotheses};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SystemKind {
    /// `u_tt - c^2 Δ u = |v|^p`, `v_tt - Δ v = |u|^q`.
    SS,
    /// `u_tt - c^2 Δ u = |v_t|^p`, `v_tt - Δ v = |u_t|^q`.
    GG,
    /// `u_tt - c^2 Δ u = |v|^p`, `v_tt - Δ v = |u_t|^q`.
    SG,
}

impl std::fmt::Display for SystemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SystemKind::SS => "SS",
            SystemKind::GG => "GG",
            SystemKind::SG => "SG",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub kind: SystemKind,
    pub p: f64,
    pub q: f64,
    pub c: f64,
    pub n: usize,
}

impl SystemSpec {
    pub fn new(kind: SystemKind, p: f64, q: f64, c: f64, n: usize) -> Result<Self> {
        let spec = Self { kind, p, q, c, n };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.q > 1.0) {
            return Err(domain(format!(
                "exponents p = {}, q = {} must exceed 1",
                self.p, self.q
            )));
        }
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(domain(format!("speed c = {} must be positive", self.c)));
        }
        if self.n < 2 {
            return Err(domain(format!(
                "dimension n = {} must be at least 2",
                self.n
            )));
        }
        Ok(())
    }

    /// The same speeds.
    pub fn same_speed(&self) -> bool {
        self.c == 1.0
    }
}

fn half(n: usize) -> f64 {
    0.5 * (n as f64 - 1.0)
}

pub fn gamma_ss(p: f64, q: f64, n: usize) -> f64 {
    (p + 2.0 + 1.0 / q).max(q + 2.0 + 1.0 / p) / (p * q - 1.0) - half(n)
}

pub fn gamma_gg(p: f64, q: f64, n: usize) -> f64 {
    (p + 1.0).max(q + 1.0) / (p * q - 1.0) - half(n)
}

pub fn gamma_gg_star(p: f64, q: f64, n: usize) -> f64 {
    p.max(q) / (p * q - 1.0) - half(n)
}

pub fn gamma_sg(p: f64, q: f64, n: usize) -> f64 {
    (p + 1.0 + 1.0 / q).max(2.0 + 1.0 / p) / (p * q - 1.0) - half(n)
}

pub fn m_curve(p: f64, q: f64, n: usize) -> f64 {
    gamma_gg(p, q, n).min(gamma_sg(p, q, n))
}

pub fn m_star_curve(p: f64, q: f64, n: usize) -> f64 {
    gamma_gg_star(p, q, n).min(gamma_sg(p, q, n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveId {
    GammaSs,
    GammaGg,
    GammaGgStar,
    GammaSg,
    M,
    MStar,
}

impl CurveId {
    pub fn eval(self, p: f64, q: f64, n: usize) -> f64 {
        match self {
            CurveId::GammaSs => gamma_ss(p, q, n),
            CurveId::GammaGg => gamma_gg(p, q, n),
            CurveId::GammaGgStar => gamma_gg_star(p, q, n),
            CurveId::GammaSg => gamma_sg(p, q, n),
            CurveId::M => m_curve(p, q, n),
            CurveId::MStar => m_star_curve(p, q, n),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CurveId::GammaSs => "gamma_ss",
            CurveId::GammaGg => "gamma_gg",
            CurveId::GammaGgStar => "gamma_gg_star",
            CurveId::GammaSg => "gamma_sg",
            CurveId::M => "m",
            CurveId::MStar => "m_star",
        }
    }
}

/// Which blow-up statement covers the spec.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// SS system, any speed: `Γ_SS`.
    SsAnySpeed,
    /// GG system with equal speeds: `Γ_GG`.
    GgSameSpeed,
    /// GG system with distinct speeds: `Γ*_GG`.
    GgDistinctSpeeds,
    /// SG system with equal speeds: `M`.
    SgSameSpeed,
    /// SG system with distinct speeds: `M*`.
    SgDistinctSpeeds,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Classification {
    /// `T_ε ≲ ε^{-lifespan_exponent}`.
    BlowUp {
        lifespan_exponent: f64,
    },
    NotCovered,
}

impl Classification {
    pub fn is_blow_up(&self) -> bool {
        matches!(self, Classification::BlowUp { .. })
    }

    pub fn exponent(&self) -> Option<f64> {
        match self {
            Classification::BlowUp { lifespan_exponent } => Some(*lifespan_exponent),
            Classification::NotCovered => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveReport {
    pub spec: SystemSpec,
    pub gamma_ss: f64,
    pub gamma_gg: f64,
    pub gamma_gg_star: f64,
    pub gamma_sg: f64,
    pub m: f64,
    pub m_star: f64,
    pub governing: CurveId,
    pub governing_value: f64,
    pub classification: Classification,
    pub regime: Regime,
}

/// Curve governing the blow-up statement for `spec`.
pub fn governing_curve(spec: &SystemSpec) -> (CurveId, Regime) {
    match (spec.kind, spec.same_speed()) {
        (SystemKind::SS, _) => (CurveId::GammaSs, Regime::SsAnySpeed),
        (SystemKind::GG, true) => (CurveId::GammaGg, Regime::GgSameSpeed),
        (SystemKind::GG, false) => (CurveId::GammaGgStar, Regime::GgDistinctSpeeds),
        (SystemKind::SG, true) => (CurveId::M, Regime::SgSameSpeed),
        (SystemKind::SG, false) => (CurveId::MStar, Regime::SgDistinctSpeeds),
    }
}

pub fn classify(spec: &SystemSpec) -> CurveReport {
    let (p, q, n) = (spec.p, spec.q, spec.n);
    let (governing, regime) = governing_curve(spec);
    let value = governing.eval(p, q, n);
    let classification = if value > 0.0 {
        Classification::BlowUp {
            lifespan_exponent: 1.0 / value,
        }
    } else {
        Classification::NotCovered
    };
    CurveReport {
        spec: *spec,
        gamma_ss: gamma_ss(p, q, n),
        gamma_gg: gamma_gg(p, q, n),
        gamma_gg_star: gamma_gg_star(p, q, n),
        gamma_sg: gamma_sg(p, q, n),
        m: m_curve(p, q, n),
        m_star: m_star_curve(p, q, n),
        governing,
        governing_value: value,
        classification,
        regime,
    }
}

/// Root of `p -> curve(p, p, n)` on `(1, 100]` by bisection.
pub fn diagonal_root(curve: CurveId, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(domain("dimension must be at least 2"));
    }
    let f = |p: f64| curve.eval(p, p, n);
    let (mut lo, mut hi) = (1.0 + 1e-9, 100.0);
    if !(f(lo) > 0.0 && f(hi) < 0.0) {
        return Err(domain(format!(
            "{} has no sign change on the diagonal",
            curve.name()
        )));
    }
    while hi - lo > 1e-14 * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One row of a region scan.
#[derive(Debug, Clone, Serialize)]
pub struct RegionRow {
    pub p: f64,
    pub q: f64,
    pub n: usize,
    pub c: f64,
    pub kind: SystemKind,
    pub curve: CurveId,
    pub gamma: f64,
    pub classification: &'static str,
    pub exponent: Option<f64>,
}

/// Classifies every system kind over the `(p, q)` grid.
pub fn region_scan(ps: &[f64], qs: &[f64], n: usize, c: f64) -> Result<Vec<RegionRow>> {
    let mut rows = Vec::with_capacity(3 * ps.len() * qs.len());
    for &p in ps {
        for &q in qs {
            for kind in [SystemKind::SS, SystemKind::GG, SystemKind::SG] {
                let spec = SystemSpec::new(kind, p, q, c, n)?;
                let rep = classify(&spec);
                rows.push(RegionRow {
                    p,
                    q,
                    n,
                    c,
                    kind,
                    curve: rep.governing,
                    gamma: rep.governing_value,
                    classification: if rep.classification.is_blow_up() {
                        "blow_up"
                    } else {
                        "not_covered"
                    },
                    exponent: rep.classification.exponent(),
                });
            }
        }
    }
    Ok(rows)
}

/// Writes `p,q,n,c,kind,gamma,classification,exponent`.
pub fn write_region_csv(rows: &[RegionRow], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "p",
        "q",
        "n",
        "c",
        "kind",
        "gamma",
        "classification",
        "exponent",
    ])?;
    for r in rows {
        w.write_record([
            format!("{}", r.p),
            format!("{}", r.q),
            r.n.to_string(),
            format!("{}", r.c),
            r.kind.to_string(),
            format!("{:.15e}", r.gamma),
            r.classification.to_string(),
            r.exponent.map(|e| format!("{e:.15e}")).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Evenly spaced values on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}
