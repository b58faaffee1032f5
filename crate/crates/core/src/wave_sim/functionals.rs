//! Spatial functionals of the fields.
//!
//! With `ψ1 = e^{-cλt} φ_λ`, `ψ2 = e^{-λt} φ_λ`, `D1 = {r̃ <= ct + R1}`,
//! `D2 = {r̃ <= t + R1}`:
//!
//! | kind | F | G | H1 | H2 | L |
//! |------|---|---|----|----|---|
//! | SS | `∫u` | `∫v` | | | |
//! | GG | `∫_{D1}(u_t + cλu)ψ1` | `∫_{D2}(v_t + λv)ψ2` | `∫_{D1} u_t ψ1` | `∫_{D2} v_t ψ2` | |
//! | SG | `∫u_t` | `∫v` | `∫_{D1} u ψ1` | `∫_{D2} v ψ2` | `∫_{D1}(u_t + cλu)ψ1` |
//!
//! Unweighted integrals use the finite-volume cell weights of the solver, so
//! e.g. `F'' = ∫|v|^p` holds for SS at the discrete level. `source_u` and
//! `source_v` are independent trapezoid quadratures of the nonlinear terms.

use std::path::Path;

use serde::Serialize;

use crate::critical_curves::{SystemKind, SystemSpec};
use crate::eigenfunction::Eigenfunction;
use crate::error::{domain, Result};
use crate::metric::{MetricProfile, RadialGrid};
use crate::quadrature::unit_sphere_area;

use super::data::DataProfile;
use super::solver::RadialOperator;

#[derive(Debug, Clone, Default, Serialize)]
pub struct FunctionalSeries {
    pub times: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
    pub l: Vec<f64>,
    /// `∫ N_u dv_g` by the trapezoid rule.
    pub source_u: Vec<f64>,
    pub source_v: Vec<f64>,
    pub sup_u: Vec<f64>,
    pub sup_v: Vec<f64>,
    pub sup_ut: Vec<f64>,
    pub sup_vt: Vec<f64>,
}

impl FunctionalSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Columns `t, F, G, H1, H2, L, sup_u, sup_v`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["t", "F", "G", "H1", "H2", "L", "sup_u", "sup_v"])?;
        for i in 0..self.len() {
            let row = [
                self.times[i],
                self.f[i],
                self.g[i],
                self.h1[i],
                self.h2[i],
                self.l[i],
                self.sup_u[i],
                self.sup_v[i],
            ];
            w.write_record(row.iter().map(|v| format!("{v:.12e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Precomputed weights for one grid.
pub(crate) struct Quadrature {
    kind: SystemKind,
    c: f64,
    r1: f64,
    slack: f64,
    fv: Vec<f64>,
    trap: Vec<f64>,
    rtilde: Vec<f64>,
    weighted: Option<(f64, Vec<f64>)>,
}

impl Quadrature {
    pub(crate) fn new(
        metric: &MetricProfile,
        grid: &RadialGrid,
        op: &RadialOperator,
        spec: &SystemSpec,
        data: &DataProfile,
        eig: Option<&Eigenfunction>,
    ) -> Result<Self> {
        let omega = unit_sphere_area(spec.n);
        let h = grid.spacing;
        let last = grid.len() - 1;
        let fv = op.cell_weight.iter().map(|w| omega * w).collect();
        let trap = grid
            .r_points
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let end = if i == 0 || i == last { 0.5 } else { 1.0 };
                end * h * omega * metric.volume_density(r, spec.n)
            })
            .collect();
        let rtilde = grid.r_points.iter().map(|&r| metric.rtilde_at(r)).collect();
        let weighted = match eig {
            Some(e) => {
                if e.r_end() < grid.r_end() {
                    return Err(domain(format!(
                        "eigenfunction grid ends at {} before the simulation grid {}",
                        e.r_end(),
                        grid.r_end()
                    )));
                }
                let logs = grid
                    .r_points
                    .iter()
                    .map(|&r| e.log_phi(r))
                    .collect::<Result<Vec<_>>>()?;
                Some((e.lambda(), logs))
            }
            None => None,
        };
        Ok(Self {
            kind: spec.kind,
            c: spec.c,
            r1: data.r1,
            slack: 2.0 * h / metric.delta0,
            fv,
            trap,
            rtilde,
            weighted,
        })
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn record(
        &self,
        s: &mut FunctionalSeries,
        t: f64,
        u: &[f64],
        v: &[f64],
        u_prev: &[f64],
        v_prev: &[f64],
        u_next: &[f64],
        v_next: &[f64],
        nu: &[f64],
        nv: &[f64],
        dt: f64,
    ) {
        let len = u.len();
        let ut: Vec<f64> = (0..len)
            .map(|i| (u_next[i] - u_prev[i]) / (2.0 * dt))
            .collect();
        let vt: Vec<f64> = (0..len)
            .map(|i| (v_next[i] - v_prev[i]) / (2.0 * dt))
            .collect();
        let sum = |w: &[f64], f: &dyn Fn(usize) -> f64| (0..len).map(|i| w[i] * f(i)).sum::<f64>();
        let c = self.c;
        // cone-restricted weighted integral with ψ = e^{-σλt} φ
        let cone = |sigma: f64, f: &dyn Fn(usize, f64) -> f64| -> f64 {
            match &self.weighted {
                Some((lam, logs)) => {
                    let edge = sigma * t + self.r1 + self.slack;
                    (0..len)
                        .take_while(|&i| self.rtilde[i] <= edge)
                        .map(|i| self.fv[i] * f(i, (logs[i] - sigma * lam * t).exp()))
                        .sum()
                }
                None => f64::NAN,
            }
        };
        let lam = self.weighted.as_ref().map_or(f64::NAN, |w| w.0);
        let (f, g, h1, h2, l) = match self.kind {
            SystemKind::SS => (
                sum(&self.fv, &|i| u[i]),
                sum(&self.fv, &|i| v[i]),
                f64::NAN,
                f64::NAN,
                f64::NAN,
            ),
            SystemKind::GG => (
                cone(c, &|i, psi| (ut[i] + c * lam * u[i]) * psi),
                cone(1.0, &|i, psi| (vt[i] + lam * v[i]) * psi),
                cone(c, &|i, psi| ut[i] * psi),
                cone(1.0, &|i, psi| vt[i] * psi),
                f64::NAN,
            ),
            SystemKind::SG => (
                sum(&self.fv, &|i| ut[i]),
                sum(&self.fv, &|i| v[i]),
                cone(c, &|i, psi| u[i] * psi),
                cone(1.0, &|i, psi| v[i] * psi),
                cone(c, &|i, psi| (ut[i] + c * lam * u[i]) * psi),
            ),
        };
        let sup = |x: &[f64]| x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        s.times.push(t);
        s.f.push(f);
        s.g.push(g);
        s.h1.push(h1);
        s.h2.push(h2);
        s.l.push(l);
        s.source_u.push(sum(&self.trap, &|i| nu[i]));
        s.source_v.push(sum(&self.trap, &|i| nv[i]));
        s.sup_u.push(sup(u));
        s.sup_v.push(sup(v));
        s.sup_ut.push(sup(&ut));
        s.sup_vt.push(sup(&vt));
    }
}
