//! Finite speed of propagation: the support of `u` stays in
//! `{r̃ <= ct + R1}` and that of `v` in `{r̃ <= t + R1}`.

use serde::Serialize;

use crate::critical_curves::SystemSpec;
use crate::metric::{MetricProfile, RadialGrid};

use super::data::DataProfile;
use super::solver::Snapshot;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SupportRow {
    pub t: f64,
    /// Radius outside which at most `tol` of the mass of `|u|` lies; `None`
    /// for a zero field.
    pub edge_u: Option<f64>,
    pub edge_v: Option<f64>,
    /// `ct + R1 - r̃(edge_u)`.
    pub gap_u: f64,
    /// `t + R1 - r̃(edge_v)`.
    pub gap_v: f64,
    /// `ct + R1 - edge_u`: the same test against the Euclidean cone.
    pub euclidean_gap_u: f64,
    pub euclidean_gap_v: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SupportReport {
    pub tol: f64,
    /// Grid allowance `2h/δ0`.
    pub slack: f64,
    pub rows: Vec<SupportRow>,
    pub pass: bool,
}

/// Smallest grid radius beyond which at most a `tol` fraction of `∫|f| dv_g`
/// lies. A pointwise level would pick up the scheme's dispersive tail, whose
/// width grows with `t`; its mass stays small.
fn edge(field: &[f64], grid: &RadialGrid, weight: &[f64], tol: f64) -> Option<f64> {
    let total: f64 = field.iter().zip(weight).map(|(f, w)| f.abs() * w).sum();
    if total == 0.0 || !total.is_finite() {
        return None;
    }
    let mut beyond = 0.0;
    for i in (0..field.len()).rev() {
        beyond += field[i].abs() * weight[i];
        if beyond > tol * total {
            return Some(grid.r_points[i]);
        }
    }
    Some(grid.r_points[0])
}

pub fn check_support(
    snapshots: &[Snapshot],
    grid: &RadialGrid,
    metric: &MetricProfile,
    spec: &SystemSpec,
    data: &DataProfile,
    tol: f64,
) -> SupportReport {
    let slack = 2.0 * grid.spacing / metric.delta0;
    let weight: Vec<f64> = grid
        .r_points
        .iter()
        .map(|&r| metric.volume_density(r, spec.n))
        .collect();
    let rows: Vec<SupportRow> = snapshots
        .iter()
        .map(|s| {
            let bu = spec.c * s.t + data.r1;
            let bv = s.t + data.r1;
            let eu = edge(&s.u, grid, &weight, tol);
            let ev = edge(&s.v, grid, &weight, tol);
            let gap = |e: Option<f64>, b: f64| e.map_or(f64::INFINITY, |r| b - metric.rtilde_at(r));
            let egap = |e: Option<f64>, b: f64| e.map_or(f64::INFINITY, |r| b - r);
            let gap_u = gap(eu, bu);
            let gap_v = gap(ev, bv);
            SupportRow {
                t: s.t,
                edge_u: eu,
                edge_v: ev,
                gap_u,
                gap_v,
                euclidean_gap_u: egap(eu, bu),
                euclidean_gap_v: egap(ev, bv),
                pass: gap_u >= -slack && gap_v >= -slack,
            }
        })
        .collect();
    let pass = rows.iter().all(|r| r.pass);
    SupportReport {
        tol,
        slack,
        rows,
        pass,
    }
}
