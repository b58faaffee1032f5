//! Leapfrog time stepping for the radial wave operator
//! `L_g u = (1/(K r^{n-1})) ∂_r((r^{n-1}/K) ∂_r u)`.

use serde::Serialize;

use crate::critical_curves::{SystemKind, SystemSpec};
use crate::eigenfunction::Eigenfunction;
use crate::error::{Error, Result};
use crate::metric::{MetricProfile, RadialGrid};

use super::data::DataProfile;
use super::functionals::{FunctionalSeries, Quadrature};
use super::support::{check_support, SupportReport};

pub const DEFAULT_CFL: f64 = 0.5;
pub const DEFAULT_PDE_THRESHOLD: f64 = 1e8;
// cells updated past the light cone
const ACTIVE_PAD: usize = 24;

/// Conservative finite-volume discretisation of `L_g` on a uniform grid.
/// Cell `i` spans `[r_i - h/2, r_i + h/2] ∩ [0, ∞)`; the flux through
/// `r = 0` vanishes, which is the even-reflection regularity condition.
/// The last grid point is held at zero.
#[derive(Debug, Clone)]
pub struct RadialOperator {
    pub n: usize,
    pub h: f64,
    /// Coefficient of `u_{i+1}`.
    upper: Vec<f64>,
    /// Coefficient of `u_{i-1}`.
    lower: Vec<f64>,
    /// `K_i · |cell_i|`, the quadrature weight (without `|S^{n-1}|`).
    pub cell_weight: Vec<f64>,
}

impl RadialOperator {
    pub fn new(metric: &MetricProfile, grid: &RadialGrid, n: usize) -> Result<Self> {
        if grid.len() < 3 {
            return Err(Error::Config("grid needs at least three points".into()));
        }
        if grid.r_end() > metric.r_max {
            return Err(Error::Config(format!(
                "grid extends to {} beyond the metric range {}",
                grid.r_end(),
                metric.r_max
            )));
        }
        let h = grid.spacing;
        let nn = n as i32;
        let len = grid.len();
        let mut upper = vec![0.0; len];
        let mut lower = vec![0.0; len];
        let mut cell_weight = vec![0.0; len];
        let flux = |r: f64| r.powi(nn - 1) / metric.k_at(r);
        for i in 0..len {
            let r = grid.r_points[i];
            let rp = r + 0.5 * h;
            let rm = (r - 0.5 * h).max(0.0);
            let vol = (rp.powi(nn) - rm.powi(nn)) / n as f64;
            let kw = metric.k_at(r) * vol;
            cell_weight[i] = kw;
            upper[i] = flux(rp) / (h * kw);
            lower[i] = if i == 0 { 0.0 } else { flux(rm) / (h * kw) };
        }
        Ok(Self {
            n,
            h,
            upper,
            lower,
            cell_weight,
        })
    }

    pub fn len(&self) -> usize {
        self.upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.upper.is_empty()
    }

    /// `L_h u` at interior point `i < len - 1`.
    #[inline]
    pub fn apply_at(&self, u: &[f64], i: usize) -> f64 {
        let left = if i == 0 { 0.0 } else { u[i - 1] };
        self.upper[i] * (u[i + 1] - u[i]) - self.lower[i] * (u[i] - left)
    }
}

/// Which source terms drive the fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Wiring {
    /// Nonlinearities of the system kind.
    Nonlinear,
    /// Free waves (plus any external forcing).
    Linear,
}

/// External forcing `(f_u, f_v)` at `(t, r)`.
pub type Forcing<'a> = &'a (dyn Fn(f64, f64) -> (f64, f64) + Sync);

#[derive(Debug, Clone)]
pub struct FieldState {
    pub grid: RadialGrid,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub u_prev: Vec<f64>,
    pub v_prev: Vec<f64>,
    pub t: f64,
    pub dt: f64,
}

/// Largest stable step under the policy `cfl · δ0^2 · h / max(1, c)`.
pub fn stable_dt(metric: &MetricProfile, h: f64, c: f64, cfl: f64) -> f64 {
    cfl * metric.delta0 * metric.delta0 * h / c.max(1.0)
}

// sources at time level m; u_t by the backward pair
fn sources(spec: &SystemSpec, wiring: Wiring, u: f64, v: f64, ut: f64, vt: f64) -> (f64, f64) {
    if wiring == Wiring::Linear {
        return (0.0, 0.0);
    }
    let (p, q) = (spec.p, spec.q);
    match spec.kind {
        SystemKind::SS => (v.abs().powf(p), u.abs().powf(q)),
        SystemKind::GG => (vt.abs().powf(p), ut.abs().powf(q)),
        SystemKind::SG => (v.abs().powf(p), ut.abs().powf(q)),
    }
}

/// `(N_u, N_v)` on the whole grid at the current level of `state`.
pub fn nonlinear_sources(
    state: &FieldState,
    spec: &SystemSpec,
    wiring: Wiring,
) -> (Vec<f64>, Vec<f64>) {
    let len = state.u.len();
    let mut nu = vec![0.0; len];
    let mut nv = vec![0.0; len];
    for i in 0..len {
        let ut = (state.u[i] - state.u_prev[i]) / state.dt;
        let vt = (state.v[i] - state.v_prev[i]) / state.dt;
        let (a, b) = sources(spec, wiring, state.u[i], state.v[i], ut, vt);
        nu[i] = a;
        nv[i] = b;
    }
    (nu, nv)
}

impl FieldState {
    /// Level 0 from the data, with a fictitious level -1 chosen so that the
    /// first leapfrog step is the second-order Taylor start.
    pub fn initialize(
        data: &DataProfile,
        grid: &RadialGrid,
        op: &RadialOperator,
        spec: &SystemSpec,
        wiring: Wiring,
        dt: f64,
        forcing: Option<Forcing<'_>>,
    ) -> Self {
        let len = grid.len();
        let mut u: Vec<f64> = grid.r_points.iter().map(|&r| data.u0(r)).collect();
        let mut v: Vec<f64> = grid.r_points.iter().map(|&r| data.v0(r)).collect();
        u[len - 1] = 0.0;
        v[len - 1] = 0.0;
        let c2 = spec.c * spec.c;
        let mut u_prev = vec![0.0; len];
        let mut v_prev = vec![0.0; len];
        for i in 0..len - 1 {
            let r = grid.r_points[i];
            let (u1, v1) = (data.u1(r), data.v1(r));
            let (nu, nv) = sources(spec, wiring, u[i], v[i], u1, v1);
            let (fu, fv) = forcing.map_or((0.0, 0.0), |f| f(0.0, r));
            let utt = c2 * op.apply_at(&u, i) + nu + fu;
            let vtt = op.apply_at(&v, i) + nv + fv;
            u_prev[i] = u[i] - dt * u1 + 0.5 * dt * dt * utt;
            v_prev[i] = v[i] - dt * v1 + 0.5 * dt * dt * vtt;
        }
        Self {
            grid: grid.clone(),
            u,
            v,
            u_prev,
            v_prev,
            t: 0.0,
            dt,
        }
    }

    pub fn sup_norms(&self) -> (f64, f64) {
        let sup = |x: &[f64]| x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        (sup(&self.u), sup(&self.v))
    }
}

/// One leapfrog step: `u^{m+1} = 2u^m - u^{m-1} + dt^2 (c^2 L_h u^m + N_u^m)`,
/// `v` likewise with speed 1. Returns `false` if a non-finite value appeared.
pub fn step(
    state: &mut FieldState,
    op: &RadialOperator,
    spec: &SystemSpec,
    wiring: Wiring,
    forcing: Option<Forcing<'_>>,
) -> bool {
    let len = state.u.len();
    step_upto(state, op, spec, wiring, forcing, len - 1)
}

// updates points `0..end`; points at and beyond `end` stay as they are
fn step_upto(
    state: &mut FieldState,
    op: &RadialOperator,
    spec: &SystemSpec,
    wiring: Wiring,
    forcing: Option<Forcing<'_>>,
    end: usize,
) -> bool {
    let dt = state.dt;
    let dt2 = dt * dt;
    let c2 = spec.c * spec.c;
    let mut finite = true;
    // the new level overwrites the previous one in place
    for i in 0..end {
        let (u, v) = (state.u[i], state.v[i]);
        let ut = (u - state.u_prev[i]) / dt;
        let vt = (v - state.v_prev[i]) / dt;
        let (nu, nv) = sources(spec, wiring, u, v, ut, vt);
        let (fu, fv) = forcing.map_or((0.0, 0.0), |f| f(state.t, state.grid.r_points[i]));
        let un = 2.0 * u - state.u_prev[i] + dt2 * (c2 * op.apply_at(&state.u, i) + nu + fu);
        let vn = 2.0 * v - state.v_prev[i] + dt2 * (op.apply_at(&state.v, i) + nv + fv);
        finite &= un.is_finite() && vn.is_finite();
        state.u_prev[i] = un;
        state.v_prev[i] = vn;
    }
    std::mem::swap(&mut state.u, &mut state.u_prev);
    std::mem::swap(&mut state.v, &mut state.v_prev);
    state.t += dt;
    finite
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SimStatus {
    BlowUp { t_star: f64 },
    Completed,
}

impl SimStatus {
    pub fn t_star(&self) -> Option<f64> {
        match self {
            SimStatus::BlowUp { t_star } => Some(*t_star),
            SimStatus::Completed => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceMetadata {
    pub h: f64,
    pub dt: f64,
    pub cfl: f64,
    pub steps: usize,
    pub grid_points: usize,
    pub threshold: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimOutcome {
    pub status: SimStatus,
    #[serde(skip)]
    pub functional_series: FunctionalSeries,
    pub support_report: Option<SupportReport>,
    pub convergence: ConvergenceMetadata,
    #[serde(skip)]
    pub snapshots: Vec<Snapshot>,
    #[serde(skip)]
    pub grid: RadialGrid,
}

impl SimOutcome {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Clone, Copy)]
pub struct SimOptions<'a> {
    pub cfl: f64,
    /// Explicit step; must respect the stability policy. `None` uses it.
    pub dt: Option<f64>,
    pub threshold: f64,
    pub wiring: Wiring,
    /// Record functionals every this many steps (0 disables).
    pub record_every: usize,
    /// Keep a field snapshot every this many steps (0 disables).
    pub snapshot_every: usize,
    pub eig: Option<&'a Eigenfunction>,
    pub forcing: Option<Forcing<'a>>,
    /// Mass fraction of a field allowed outside its measured support edge.
    pub support_tol: f64,
}

impl Default for SimOptions<'_> {
    fn default() -> Self {
        Self {
            cfl: DEFAULT_CFL,
            dt: None,
            threshold: DEFAULT_PDE_THRESHOLD,
            wiring: Wiring::Nonlinear,
            record_every: 0,
            snapshot_every: 0,
            eig: None,
            forcing: None,
            support_tol: 1e-2,
        }
    }
}

/// Grid on `[0, r_end]` with spacing about `h` and
/// `r_end >= r̃^{-1}(max(1, c) t_max + R1) + 8h`, so that no signal reaches the
/// outer point before `t_max`.
pub fn light_cone_grid(
    metric: &MetricProfile,
    c: f64,
    t_max: f64,
    r1: f64,
    h: f64,
) -> Result<RadialGrid> {
    let reach = metric.rtilde_inverse(c.max(1.0) * t_max + r1)?;
    let cells = ((reach + 8.0 * h) / h).ceil() as usize;
    Ok(RadialGrid::from_spacing(h, cells + 1))
}

pub fn run_simulation(
    spec: &SystemSpec,
    metric: &MetricProfile,
    data: &DataProfile,
    grid: &RadialGrid,
    t_max: f64,
    opts: &SimOptions<'_>,
) -> Result<SimOutcome> {
    spec.validate()?;
    data.validate(metric)?;
    let h = grid.spacing;
    let needed = metric.rtilde_inverse(spec.c.max(1.0) * t_max + data.r1)? + 2.0 * h;
    if grid.r_end() < needed {
        return Err(Error::Config(format!(
            "grid ends at {} but the light cone reaches {needed} by t = {t_max}",
            grid.r_end()
        )));
    }
    let limit = stable_dt(metric, h, spec.c, opts.cfl);
    // default: the largest step <= limit that divides t_max
    let dt = opts.dt.unwrap_or_else(|| t_max / (t_max / limit).ceil());
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::Config(format!(
            "dt = {dt} violates the stability bound {limit}"
        )));
    }
    let op = RadialOperator::new(metric, grid, spec.n)?;
    let quad = Quadrature::new(metric, grid, &op, spec, data, opts.eig)?;
    let mut state = FieldState::initialize(data, grid, &op, spec, opts.wiring, dt, opts.forcing);
    let mut series = FunctionalSeries::default();
    let mut snapshots = Vec::new();
    let steps_total = (t_max / dt).round() as usize;

    let mut status = SimStatus::Completed;
    let mut steps = 0;
    // the level before `state.u_prev` is needed for centred u_t; keep copies
    let mut older_u = state.u_prev.clone();
    let mut older_v = state.v_prev.clone();
    while steps < steps_total {
        let snap = opts.snapshot_every > 0 && steps % opts.snapshot_every == 0;
        if snap {
            snapshots.push(Snapshot {
                t: state.t,
                u: state.u.clone(),
                v: state.v.clone(),
            });
        }
        let record = opts.record_every > 0 && steps % opts.record_every == 0;
        if record {
            older_u.copy_from_slice(&state.u_prev);
            older_v.copy_from_slice(&state.v_prev);
        }
        let (nu, nv) = if record {
            nonlinear_sources(&state, spec, opts.wiring)
        } else {
            (Vec::new(), Vec::new())
        };
        // beyond the light cone plus a pad the fields are zero to round-off
        let front = metric.rtilde_inverse(spec.c.max(1.0) * (state.t + dt) + data.r1)?;
        let end = (((front / h).ceil() as usize) + ACTIVE_PAD).min(grid.len() - 1);
        let finite = step_upto(&mut state, &op, spec, opts.wiring, opts.forcing, end);
        steps += 1;
        if record {
            // state.u_prev now holds level m, state.u level m+1
            quad.record(
                &mut series,
                state.t - dt,
                &state.u_prev,
                &state.v_prev,
                &older_u,
                &older_v,
                &state.u,
                &state.v,
                &nu,
                &nv,
                dt,
            );
        }
        let (su, sv) = state.sup_norms();
        if !finite || su.max(sv) > opts.threshold || su.is_nan() || sv.is_nan() {
            status = SimStatus::BlowUp { t_star: state.t };
            break;
        }
    }
    if opts.snapshot_every > 0 && status == SimStatus::Completed {
        snapshots.push(Snapshot {
            t: state.t,
            u: state.u.clone(),
            v: state.v.clone(),
        });
    }
    let support_report = (!snapshots.is_empty())
        .then(|| check_support(&snapshots, grid, metric, spec, data, opts.support_tol));
    Ok(SimOutcome {
        status,
        functional_series: series,
        support_report,
        convergence: ConvergenceMetadata {
            h,
            dt,
            cfl: opts.cfl,
            steps,
            grid_points: grid.len(),
            threshold: opts.threshold,
        },
        snapshots,
        grid: grid.clone(),
    })
}
