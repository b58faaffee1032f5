//! Sufficient condition for finite-time blow-up of
//! `M'' >= C (t+R)^{-α} N^e`, `N'' >= C (t+R)^{-β} M^l`
//! with `M >= C (t+R)`, `N >= C (t+R)^s`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KatoHypotheses {
    pub alpha: f64,
    pub beta: f64,
    pub e: f64,
    pub l: f64,
    pub s: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "R")]
    pub r: f64,
}

impl KatoHypotheses {
    pub fn new(alpha: f64, beta: f64, e: f64, l: f64, s: f64) -> Result<Self> {
        let h = Self {
            alpha,
            beta,
            e,
            l,
            s,
            c: 1.0,
            r: 1.0,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = [self.alpha, self.beta, self.e, self.l, self.c, self.r];
        if pos.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(domain("alpha, beta, e, l, C, R must be positive"));
        }
        if !(self.s >= 1.0) {
            return Err(domain(format!("s = {} must be at least 1", self.s)));
        }
        Ok(())
    }

    /// `s(el-1) - (l(α-2) + β - 2)`; positive when the strict inequality holds.
    pub fn margin(&self) -> f64 {
        self.s * (self.e * self.l - 1.0) - (self.l * (self.alpha - 2.0) + self.beta - 2.0)
    }
}

/// True iff `el > 1` and `l(α-2) + β - 2 < s(el-1)`.
pub fn kato_check(h: &KatoHypotheses) -> bool {
    h.e * h.l > 1.0 && h.margin() > 0.0
}

/// The SS instantiation `α = n(p-1)`, `β = n(q-1)`, `e = p`, `l = q`,
/// `s = n+1-(n-1)q/2`; `None` when `s < 1`.
pub fn ss_kato_hypotheses(p: f64, q: f64, n: usize) -> Option<KatoHypotheses> {
    let nf = n as f64;
    let s = nf + 1.0 - 0.5 * (nf - 1.0) * q;
    KatoHypotheses::new(nf * (p - 1.0), nf * (q - 1.0), p, q, s).ok()
}

/// One point of the comparison between the criterion and `Γ_SS > 0`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AgreementRow {
    pub p: f64,
    pub q: f64,
    pub n: usize,
    pub kato: bool,
    pub curve_positive: bool,
}

/// Evaluates both the SS instantiation of the criterion and the sign of
/// `Γ_SS` on the `p <= q` part of the grid where `s >= 1`. Disagreements are
/// expected: the criterion is sufficient, not necessary.
pub fn ss_agreement_scan(ps: &[f64], qs: &[f64], n: usize) -> Vec<AgreementRow> {
    let mut rows = Vec::new();
    for &p in ps {
        for &q in qs {
            if p > q {
                continue;
            }
            if let Some(h) = ss_kato_hypotheses(p, q, n) {
                rows.push(AgreementRow {
                    p,
                    q,
                    n,
                    kato: kato_check(&h),
                    curve_positive: super::gamma_ss(p, q, n) > 0.0,
                });
            }
        }
    }
    rows
}
