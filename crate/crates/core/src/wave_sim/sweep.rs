//! Blow-up times of the PDE across data amplitudes.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::critical_curves::{classify, SystemSpec};
use crate::error::{Error, Result};
use crate::fit::{fit_powerlaw, PowerLawFit};
use crate::metric::MetricProfile;

use super::data::DataProfile;
use super::solver::{light_cone_grid, run_simulation, SimOptions, SimStatus, Wiring};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PdeSweepSettings {
    pub h: f64,
    pub t_max: f64,
    pub threshold: f64,
    pub cfl: f64,
    /// Snapshots per run for the support check.
    pub snapshots: usize,
    pub support_tol: f64,
}

impl Default for PdeSweepSettings {
    fn default() -> Self {
        Self {
            h: 0.05,
            t_max: 200.0,
            threshold: super::solver::DEFAULT_PDE_THRESHOLD,
            cfl: super::solver::DEFAULT_CFL,
            snapshots: 20,
            support_tol: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PdeSweepRow {
    pub eps: f64,
    pub t_star: f64,
    pub steps: usize,
    pub support_pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PdeSweepReport {
    pub spec: SystemSpec,
    pub settings: PdeSweepSettings,
    pub rows: Vec<PdeSweepRow>,
    pub fit: PowerLawFit,
    pub predicted_slope: Option<f64>,
    pub relative_error: Option<f64>,
}

/// Runs the nonlinear system for every ε (in parallel), scaling the template
/// data, and fits `ln T` against `ln ε`. The predicted slope is `-1/Γ` of the
/// curve from [`classify`].
pub fn sweep_blowup_times(
    spec: &SystemSpec,
    metric: &MetricProfile,
    template: &DataProfile,
    eps_list: &[f64],
    settings: &PdeSweepSettings,
) -> Result<PdeSweepReport> {
    let grid = light_cone_grid(metric, spec.c, settings.t_max, template.r1, settings.h)?;
    let dt = super::solver::stable_dt(metric, settings.h, spec.c, settings.cfl);
    let total_steps = (settings.t_max / dt).ceil() as usize;
    let snapshot_every = total_steps
        .checked_div(settings.snapshots)
        .map_or(0, |k| k.max(1));
    let runs: Vec<Result<(f64, SimStatus, usize, bool)>> = eps_list
        .par_iter()
        .map(|&eps| {
            let data = template.with_eps(eps);
            let opts = SimOptions {
                cfl: settings.cfl,
                threshold: settings.threshold,
                wiring: Wiring::Nonlinear,
                snapshot_every,
                support_tol: settings.support_tol,
                ..SimOptions::default()
            };
            let out = run_simulation(spec, metric, &data, &grid, settings.t_max, &opts)?;
            let support = out.support_report.as_ref().is_none_or(|r| r.pass);
            Ok((eps, out.status, out.convergence.steps, support))
        })
        .collect();
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    for r in runs {
        let (eps, status, steps, support_pass) = r?;
        match status.t_star() {
            Some(t_star) => rows.push(PdeSweepRow {
                eps,
                t_star,
                steps,
                support_pass,
            }),
            None => failed.push(eps),
        }
    }
    if !failed.is_empty() {
        return Err(Error::Sweep { eps: failed });
    }
    rows.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    let eps: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let ts: Vec<f64> = rows.iter().map(|r| r.t_star).collect();
    let fit = fit_powerlaw(&eps, &ts)?;
    let predicted_slope = classify(spec).classification.exponent().map(|e| -e);
    Ok(PdeSweepReport {
        spec: *spec,
        settings: *settings,
        relative_error: predicted_slope.map(|p| fit.relative_error(p)),
        rows,
        fit,
        predicted_slope,
    })
}

pub fn write_pde_sweep_csv(rows: &[PdeSweepRow], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
