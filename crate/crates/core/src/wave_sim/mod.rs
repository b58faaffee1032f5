//! Radial finite-difference solver for the coupled systems
//!
//! * SS: `u_tt - c^2 Δ_g u = |v|^p`, `v_tt - Δ_g v = |u|^q`
//! * GG: `u_tt - c^2 Δ_g u = |v_t|^p`, `v_tt - Δ_g v = |u_t|^q`
//! * SG: `u_tt - c^2 Δ_g u = |v|^p`, `v_tt - Δ_g v = |u_t|^q`
//!
//! on `K(r)^2 dr^2 + r^2 dω^2`, with functionals, support checks,
//! ε-sweeps of the blow-up time and reference problems with known answers.

mod data;
mod functionals;
mod solver;
mod support;
mod sweep;
mod verify;

use std::path::Path;

use crate::error::Result;

pub use data::{
    check_data_conditions, make_initial_data, Component, ConditionItem, ConditionReport,
    DataProfile, Shape,
};
pub use functionals::FunctionalSeries;
pub use solver::{
    light_cone_grid, nonlinear_sources, run_simulation, stable_dt, step, ConvergenceMetadata,
    FieldState, Forcing, RadialOperator, SimOptions, SimOutcome, SimStatus, Snapshot, Wiring,
    DEFAULT_CFL, DEFAULT_PDE_THRESHOLD,
};
pub use support::{check_support, SupportReport, SupportRow};
pub use sweep::{
    sweep_blowup_times, write_pde_sweep_csv, PdeSweepReport, PdeSweepRow, PdeSweepSettings,
};
pub use verify::{
    dalembert_error, dalembert_n3, dalembert_order, manufactured_error, manufactured_order,
    source_identity, IdentityReport, OrderReport,
};

/// Long-format snapshot export with columns `t, r, u, v`.
pub fn write_snapshots_csv(outcome: &SimOutcome, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "r", "u", "v"])?;
    for s in &outcome.snapshots {
        for (i, r) in outcome.grid.r_points.iter().enumerate() {
            w.write_record([
                format!("{:.12e}", s.t),
                format!("{r:.12e}"),
                format!("{:.12e}", s.u[i]),
                format!("{:.12e}", s.v[i]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests;
