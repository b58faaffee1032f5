//! Comparison ODE systems taken with equality, blow-up detection, ε-sweeps
//! and lifespan power-law fits.
//!
//! With `R` the shift in the `(t+R)` weights (default 1):
//!
//! * `SS2nd`: `F'' = c0 G^p/(t+R)^{n(p-1)}`, `G'' = c1 F^q/(t+R)^{n(q-1)}`,
//!   data `(F, F') = (G, G') = (ε, ε)`.
//! * `GG1st`: `F' = c0 G^p/(t+R)^{(n-1)(p-1)/2}`, `G' = c1 F^q/(t+R)^{(n-1)(q-1)/2}`,
//!   data `F = G = ε`.
//! * `GGMulti`: `GG1st` with weights `e^{μt}` on `F'` and `e^{-μt}` on `G'`,
//!   `μ = λ(1-c)`.
//! * `SG`: `F' = c0 G^p/(t+R)^{n(p-1)}`, `G'' = c1 F^q/(t+R)^{n(q-1)}`.
//! * `SGMulti`: `SG` with `G'' + 2λG'` on the left.
//!
//! `SS2nd`, `SG` and `SGMulti` also carry the seed source
//! `c ε^p (t+R)^{n-1-(n-1)p/2}` on each equation when `n - (n-1)p/2 > 0`
//! (see [`ComparisonSystem::seed_forcing`]).

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::critical_curves::{kato_check, CurveId, KatoHypotheses, SystemKind, SystemSpec};
use crate::error::{domain, Error, Result};
use crate::fit::{fit_powerlaw, linear_slope, PowerLawFit};
use crate::rk::{DormandPrince, OdeSystem, Termination};

pub const DEFAULT_THRESHOLD: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SystemId {
    SS2nd,
    GG1st,
    GGMulti,
    SG,
    SGMulti,
}

impl SystemId {
    fn kind(self) -> SystemKind {
        match self {
            SystemId::SS2nd => SystemKind::SS,
            SystemId::GG1st | SystemId::GGMulti => SystemKind::GG,
            SystemId::SG | SystemId::SGMulti => SystemKind::SG,
        }
    }

    fn is_multi(self) -> bool {
        matches!(self, SystemId::GGMulti | SystemId::SGMulti)
    }
}

/// Which equivalent form of a system gets integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    /// The equations as written, exponential weights explicit.
    #[default]
    Raw,
    /// Exponential-weight substitution (`GGMulti`: `G = H e^{-μt/p}`;
    /// `SGMulti`: `P = e^{2λt} G'`).
    Substituted,
    /// `GGMulti` only: the single equation obtained by inserting the lower
    /// bound `H >= c2 (ε + G^p/(t+R)^{(n-1)(p-1)/2})`,
    /// `c2 = c0 (1 - e^{-2μ})/(2μ 2^p)`, into `G' = c1 H^q/(t+R)^{(n-1)(q-1)/2}`.
    LowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSystem {
    pub id: SystemId,
    pub spec: SystemSpec,
    pub c0: f64,
    pub c1: f64,
    pub lambda: f64,
    #[serde(default)]
    pub form: Form,
    #[serde(default = "default_true")]
    pub seed_forcing: bool,
    #[serde(default = "default_shift")]
    pub r_shift: f64,
}

fn default_true() -> bool {
    true
}

fn default_shift() -> f64 {
    1.0
}

impl ComparisonSystem {
    /// Defaults: `c0 = c1 = 1`, raw form, seed forcing on, `R = 1`. `lambda`
    /// only enters the multi-speed systems.
    pub fn new(id: SystemId, spec: SystemSpec, lambda: f64) -> Result<Self> {
        let sys = Self {
            id,
            spec,
            c0: 1.0,
            c1: 1.0,
            lambda,
            form: Form::Raw,
            seed_forcing: true,
            r_shift: 1.0,
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn with_constants(mut self, c0: f64, c1: f64) -> Result<Self> {
        self.c0 = c0;
        self.c1 = c1;
        self.validate()?;
        Ok(self)
    }

    pub fn with_form(mut self, form: Form) -> Result<Self> {
        self.form = form;
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed_forcing(mut self, on: bool) -> Self {
        self.seed_forcing = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.spec.kind != self.id.kind() {
            return Err(domain(format!(
                "{:?} needs a {} spec, got {}",
                self.id,
                self.id.kind(),
                self.spec.kind
            )));
        }
        for (name, v) in [("c0", self.c0), ("c1", self.c1), ("R", self.r_shift)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(domain(format!("{name} = {v} must be positive")));
            }
        }
        if self.id.is_multi() {
            if self.spec.c > 1.0 {
                return Err(domain(format!(
                    "{:?} requires c <= 1, got {}",
                    self.id, self.spec.c
                )));
            }
            if !(self.lambda > 0.0) || !self.lambda.is_finite() {
                return Err(domain(format!("{:?} requires λ > 0", self.id)));
            }
        }
        match (self.form, self.id) {
            (Form::Raw, _) => {}
            (Form::Substituted, SystemId::GGMulti | SystemId::SGMulti) => {}
            (Form::LowerBound, SystemId::GGMulti) => {
                if self.spec.c >= 1.0 {
                    return Err(domain("lower-bound form needs c < 1"));
                }
            }
            (form, id) => return Err(domain(format!("form {form:?} is not defined for {id:?}"))),
        }
        Ok(())
    }

    /// `μ = λ(1-c)` for `GGMulti`.
    pub fn mu(&self) -> f64 {
        self.lambda * (1.0 - self.spec.c)
    }

    /// `c2 = c0 (1 - e^{-2μ})/(2μ 2^p)`; `c0/2^p` in the limit `μ -> 0`.
    pub fn c2(&self) -> f64 {
        let mu = self.mu();
        let avg = if mu == 0.0 {
            1.0
        } else {
            -(-2.0 * mu).exp_m1() / (2.0 * mu)
        };
        self.c0 * avg / 2f64.powf(self.spec.p)
    }

    /// Time after which the explicit exponential weights of this form exceed
    /// `e^350`; beyond it an overflow could masquerade as blow-up.
    pub fn exp_horizon(&self) -> Option<f64> {
        const LN_MAX: f64 = 350.0;
        match (self.id, self.form) {
            (SystemId::GGMulti, Form::Raw) if self.mu() > 0.0 => Some(LN_MAX / self.mu()),
            (SystemId::SGMulti, Form::Substituted) => Some(LN_MAX / (2.0 * self.lambda)),
            _ => None,
        }
    }

    /// Exponent `n-1-(n-1)p/2` of the seed source for power `p`, when the
    /// source is active (`n - (n-1)p/2 > 0`).
    pub fn seed_forcing_exponent(n: usize, p: f64) -> Option<f64> {
        let nf = n as f64;
        let h = 0.5 * (nf - 1.0) * p;
        (nf - h > 0.0).then_some(nf - 1.0 - h)
    }

    /// Curve whose reciprocal predicts the lifespan exponent of this system.
    /// The first-order `SG` systems are driven by `Γ_SG` directly.
    pub fn governing_curve(&self) -> CurveId {
        match self.id {
            SystemId::SS2nd => CurveId::GammaSs,
            SystemId::GG1st => CurveId::GammaGg,
            SystemId::GGMulti => CurveId::GammaGgStar,
            SystemId::SG | SystemId::SGMulti => CurveId::GammaSg,
        }
    }

    /// `-1/Γ` for the governing curve, `None` when `Γ <= 0`.
    pub fn predicted_slope(&self) -> Option<f64> {
        let g = self
            .governing_curve()
            .eval(self.spec.p, self.spec.q, self.spec.n);
        (g > 0.0).then(|| -1.0 / g)
    }

    /// Names of the state components, in order.
    pub fn state_names(&self) -> Vec<&'static str> {
        match (self.id, self.form) {
            (SystemId::SS2nd, _) => vec!["F", "dF", "G", "dG"],
            (SystemId::GG1st, _) | (SystemId::GGMulti, Form::Raw) => vec!["F", "G"],
            (SystemId::GGMulti, Form::Substituted) => vec!["F", "H"],
            (SystemId::GGMulti, Form::LowerBound) => vec!["G"],
            (SystemId::SG, _) | (SystemId::SGMulti, Form::Raw) => vec!["F", "G", "dG"],
            (SystemId::SGMulti, _) => vec!["F", "G", "P"],
        }
    }

    /// Indices of the components checked against the threshold.
    pub fn tracked(&self) -> Vec<usize> {
        match (self.id, self.form) {
            (SystemId::SS2nd, _) => vec![0, 2],
            (SystemId::GGMulti, Form::LowerBound) => vec![0],
            (SystemId::GG1st, _) | (SystemId::GGMulti, _) => vec![0, 1],
            (SystemId::SG, _) | (SystemId::SGMulti, _) => vec![0, 1],
        }
    }

    /// Seed initial data for amplitude `eps`.
    pub fn initial_state(&self, eps: f64) -> Vec<f64> {
        vec![eps; self.state_names().len()]
    }

    fn forcing(&self, eps: f64, pow: f64, t: f64) -> f64 {
        if !self.seed_forcing || eps == 0.0 {
            return 0.0;
        }
        match Self::seed_forcing_exponent(self.spec.n, pow) {
            Some(e) => eps.powf(pow) * (t + self.r_shift).powf(e),
            None => 0.0,
        }
    }

    fn rhs(&self, eps: f64, t: f64, y: &[f64], dy: &mut [f64]) {
        let SystemSpec { p, q, n, .. } = self.spec;
        let nf = n as f64;
        let tr = t + self.r_shift;
        let pw = |x: f64, e: f64| x.max(0.0).powf(e);
        // weights of the second-order/SG family and of the GG family
        let ws = |e: f64| tr.powf(-nf * (e - 1.0));
        let wg = |e: f64| tr.powf(-0.5 * (nf - 1.0) * (e - 1.0));
        let (c0, c1) = (self.c0, self.c1);
        match (self.id, self.form) {
            (SystemId::SS2nd, _) => {
                dy[0] = y[1];
                dy[1] = c0 * pw(y[2], p) * ws(p) + c0 * self.forcing(eps, p, t);
                dy[2] = y[3];
                dy[3] = c1 * pw(y[0], q) * ws(q) + c1 * self.forcing(eps, q, t);
            }
            (SystemId::GG1st, _) => {
                dy[0] = c0 * pw(y[1], p) * wg(p);
                dy[1] = c1 * pw(y[0], q) * wg(q);
            }
            (SystemId::GGMulti, Form::Raw) => {
                let mu = self.mu();
                dy[0] = c0 * (mu * t).exp() * pw(y[1], p) * wg(p);
                dy[1] = c1 * (-mu * t).exp() * pw(y[0], q) * wg(q);
            }
            (SystemId::GGMulti, Form::Substituted) => {
                let mu = self.mu();
                dy[0] = c0 * pw(y[1], p) * wg(p);
                dy[1] = mu / p * y[1] + c1 * (-mu * t * (p - 1.0) / p).exp() * pw(y[0], q) * wg(q);
            }
            (SystemId::GGMulti, Form::LowerBound) => {
                let h = self.c2() * (eps + pw(y[0], p) * wg(p));
                dy[0] = c1 * pw(h, q) * wg(q);
            }
            (SystemId::SG, _) => {
                dy[0] = c0 * pw(y[1], p) * ws(p) + c0 * self.forcing(eps, p, t);
                dy[1] = y[2];
                dy[2] = c1 * pw(y[0], q) * ws(q) + c1 * self.forcing(eps, q, t);
            }
            (SystemId::SGMulti, Form::Raw) => {
                dy[0] = c0 * pw(y[1], p) * ws(p) + c0 * self.forcing(eps, p, t);
                dy[1] = y[2];
                dy[2] = -2.0 * self.lambda * y[2]
                    + c1 * pw(y[0], q) * ws(q)
                    + c1 * self.forcing(eps, q, t);
            }
            (SystemId::SGMulti, _) => {
                // P = e^{2λt} G'
                let e2 = (2.0 * self.lambda * t).exp();
                dy[0] = c0 * pw(y[1], p) * ws(p) + c0 * self.forcing(eps, p, t);
                dy[1] = y[2] / e2;
                dy[2] = e2 * (c1 * pw(y[0], q) * ws(q) + c1 * self.forcing(eps, q, t));
            }
        }
    }
}

/// `reduce_multi_speed`: the form with the exponential weights substituted
/// away. Same speeds need no reduction and return the system unchanged.
pub fn reduce_multi_speed(system: &ComparisonSystem) -> Result<ComparisonSystem> {
    if !system.id.is_multi() {
        return Err(domain(format!(
            "{:?} has no multi-speed reduction",
            system.id
        )));
    }
    if system.spec.c == 1.0 {
        return Ok(*system);
    }
    system.with_form(Form::Substituted)
}

struct Bound<'a> {
    sys: &'a ComparisonSystem,
    eps: f64,
}

impl OdeSystem for Bound<'_> {
    fn dim(&self) -> usize {
        self.sys.state_names().len()
    }
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        self.sys.rhs(self.eps, t, y, dy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    /// A tracked component crossed the threshold at `t_star`.
    BlowUp {
        t_star: f64,
    },
    /// The integrator could not continue (step underflow or non-finite
    /// values) before the threshold; treated as blow-up at `t_star`.
    NumericalBlowUp {
        t_star: f64,
    },
    NoBlowUpWithin {
        t_max: f64,
    },
}

impl RunStatus {
    pub fn t_star(&self) -> Option<f64> {
        match self {
            RunStatus::BlowUp { t_star } | RunStatus::NumericalBlowUp { t_star } => Some(*t_star),
            RunStatus::NoBlowUpWithin { .. } => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            RunStatus::BlowUp { .. } => "blow_up",
            RunStatus::NumericalBlowUp { .. } => "numerical_blow_up",
            RunStatus::NoBlowUpWithin { .. } => "no_blow_up",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OdeSample {
    pub t: f64,
    pub state: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OdeRun {
    pub trajectory: Vec<OdeSample>,
    pub status: RunStatus,
    pub threshold_used: f64,
    /// Blow-up time from a linear fit of `y/y'` over the last decade of the
    /// dominant tracked component; equals `t_star` when the fit is unusable.
    pub extrapolated_t: Option<f64>,
    /// Every tracked component was nondecreasing along the trajectory.
    pub monotone: bool,
}

/// Runs `sys` from `y0` until a tracked component exceeds `threshold` or
/// `t_max` is reached.
fn run<S: OdeSystem>(
    sys: &S,
    y0: &[f64],
    tracked: &[usize],
    t_max: f64,
    threshold: f64,
    solver: &DormandPrince,
) -> Result<OdeRun> {
    if !(t_max > 0.0) || !(threshold > 0.0) {
        return Err(domain("t_max and threshold must be positive"));
    }
    let norm = |y: &[f64]| tracked.iter().map(|&i| y[i].abs()).fold(0.0, f64::max);
    let mut trajectory = vec![OdeSample {
        t: 0.0,
        state: y0.to_vec(),
    }];
    let mut monotone = true;
    let out = solver.integrate(sys, 0.0, y0, t_max, 0.0, |t, y| {
        let prev = &trajectory.last().unwrap().state;
        if tracked.iter().any(|&i| y[i] < prev[i]) {
            monotone = false;
        }
        trajectory.push(OdeSample {
            t,
            state: y.to_vec(),
        });
        norm(y) <= threshold
    });
    let status = match out.termination {
        Termination::Stopped => RunStatus::BlowUp { t_star: out.t },
        Termination::Reached => RunStatus::NoBlowUpWithin { t_max },
        Termination::StepUnderflow | Termination::NonFinite => {
            RunStatus::NumericalBlowUp { t_star: out.t }
        }
        Termination::MaxSteps => {
            return Err(Error::Solver(format!(
                "step budget exhausted at t = {}",
                out.t
            )))
        }
    };
    let extrapolated_t = status
        .t_star()
        .map(|ts| extrapolate(sys, &trajectory, tracked).unwrap_or(ts));
    Ok(OdeRun {
        trajectory,
        status,
        threshold_used: threshold,
        extrapolated_t,
        monotone,
    })
}

/// For `y ~ (T - t)^{-γ}`, `y/y' = (T - t)/γ` is linear in `t` with root `T`.
fn extrapolate<S: OdeSystem>(sys: &S, traj: &[OdeSample], tracked: &[usize]) -> Option<f64> {
    let last = traj.last()?;
    let (&idx, top) = tracked
        .iter()
        .map(|i| (i, last.state[*i].abs()))
        .max_by(|a, b| a.1.total_cmp(&b.1))?;
    let mut dy = vec![0.0; last.state.len()];
    let mut ts = Vec::new();
    let mut zs = Vec::new();
    for s in traj.iter().rev() {
        let y = s.state[idx];
        if y < top / 10.0 && ts.len() >= 3 {
            break;
        }
        sys.rhs(s.t, &s.state, &mut dy);
        if y > 0.0 && dy[idx] > 0.0 {
            ts.push(s.t);
            zs.push(y / dy[idx]);
        }
    }
    if ts.len() < 2 {
        return None;
    }
    let b = linear_slope(&ts, &zs)?;
    let n = ts.len() as f64;
    let a = zs.iter().sum::<f64>() / n - b * ts.iter().sum::<f64>() / n;
    let t_fit = -a / b;
    (b < 0.0 && t_fit.is_finite() && t_fit >= last.t * (1.0 - 1e-3)).then_some(t_fit)
}

/// Integrates `system` with seed amplitude `eps` and default tolerances.
pub fn integrate(
    system: &ComparisonSystem,
    eps: f64,
    t_max: f64,
    threshold: f64,
) -> Result<OdeRun> {
    integrate_with(system, eps, t_max, threshold, &DormandPrince::default())
}

pub fn integrate_with(
    system: &ComparisonSystem,
    eps: f64,
    t_max: f64,
    threshold: f64,
    solver: &DormandPrince,
) -> Result<OdeRun> {
    system.validate()?;
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(domain(format!("eps = {eps} must be nonnegative")));
    }
    let horizon = system.exp_horizon().unwrap_or(f64::INFINITY);
    let sys = Bound { sys: system, eps };
    let out = run(
        &sys,
        &system.initial_state(eps),
        &system.tracked(),
        t_max.min(horizon),
        threshold,
        solver,
    )?;
    if horizon < t_max && out.status.t_star().is_none() {
        return Err(domain(format!(
            "{:?} in {:?} form cannot be integrated past t = {horizon:.4e} without overflow; \
             no blow-up before it (t_max = {t_max:e})",
            system.id, system.form
        )));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    pub t_star: f64,
    pub extrapolated_t: f64,
    pub status: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub system: ComparisonSystem,
    pub t_max: f64,
    pub threshold: f64,
    pub rows: Vec<SweepRow>,
    pub fit: PowerLawFit,
    pub governing_curve: &'static str,
    pub predicted_slope: Option<f64>,
    pub relative_error: Option<f64>,
    /// Blow-up time nonincreasing in ε.
    pub monotone_in_eps: bool,
}

/// Runs one integration per ε in parallel and fits `ln T` against `ln ε`
/// using the extrapolated blow-up times.
pub fn epsilon_sweep(
    system: &ComparisonSystem,
    eps_list: &[f64],
    t_max: f64,
    threshold: f64,
) -> Result<SweepReport> {
    if eps_list.len() < 4 {
        return Err(domain("an ε-sweep needs at least four values"));
    }
    let runs: Vec<(f64, Result<OdeRun>)> = eps_list
        .par_iter()
        .map(|&e| (e, integrate(system, e, t_max, threshold)))
        .collect();
    let mut by_eps = BTreeMap::new();
    let mut failed = Vec::new();
    for (e, r) in runs {
        let r = r?;
        match (r.status.t_star(), r.extrapolated_t) {
            (Some(ts), Some(te)) => {
                by_eps.insert(ordered(e), (e, ts, te, r.status.label()));
            }
            _ => failed.push(e),
        }
    }
    if !failed.is_empty() {
        return Err(Error::Sweep { eps: failed });
    }
    let rows: Vec<SweepRow> = by_eps
        .into_values()
        .map(|(eps, t_star, extrapolated_t, status)| SweepRow {
            eps,
            t_star,
            extrapolated_t,
            status,
        })
        .collect();
    let eps: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let ts: Vec<f64> = rows.iter().map(|r| r.extrapolated_t).collect();
    let fit = fit_powerlaw(&eps, &ts)?;
    let predicted_slope = system.predicted_slope();
    // rows run from large to small ε
    let monotone_in_eps = ts.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9));
    Ok(SweepReport {
        system: *system,
        t_max,
        threshold,
        relative_error: predicted_slope.map(|p| fit.relative_error(p)),
        governing_curve: system.governing_curve().name(),
        predicted_slope,
        rows,
        fit,
        monotone_in_eps,
    })
}

// total-order key for ε, sorted descending so T increases down the table
fn ordered(e: f64) -> std::cmp::Reverse<u64> {
    std::cmp::Reverse(e.to_bits())
}

pub fn write_sweep_csv(rows: &[SweepRow], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_fit_json(report: &SweepReport, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(report)?)?;
    Ok(())
}

/// Canonical system `M'' = C(t+R)^{-α} N^e`,
/// `N'' = C(t+R)^{-β} M^l + C s(s-1)(t+R)^{s-2}` with data
/// `M = C(t+R)`, `N = C(t+R)^s` at `t = 0`. The extra source keeps
/// `N >= C(t+R)^s` for all time.
pub struct KatoSystem {
    pub h: KatoHypotheses,
}

impl OdeSystem for KatoSystem {
    fn dim(&self) -> usize {
        4
    }
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let KatoHypotheses {
            alpha,
            beta,
            e,
            l,
            s,
            c,
            r,
        } = self.h;
        let tr = t + r;
        dy[0] = y[1];
        dy[1] = c * tr.powf(-alpha) * y[2].max(0.0).powf(e);
        dy[2] = y[3];
        dy[3] = c * tr.powf(-beta) * y[0].max(0.0).powf(l) + c * s * (s - 1.0) * tr.powf(s - 2.0);
    }
}

impl KatoSystem {
    pub fn initial_state(&self) -> [f64; 4] {
        let KatoHypotheses { s, c, r, .. } = self.h;
        [c * r, c, c * r.powf(s), c * s * r.powf(s - 1.0)]
    }
}

pub fn integrate_kato(h: &KatoHypotheses, t_max: f64, threshold: f64) -> Result<OdeRun> {
    h.validate()?;
    let sys = KatoSystem { h: *h };
    run(
        &sys,
        &sys.initial_state(),
        &[0, 2],
        t_max,
        threshold,
        &DormandPrince::default(),
    )
}

/// Draws `count` hypothesis sets with `kato_check = true` and margin at least
/// `min_margin`: `α, β ∈ [0, 4)`, `e, l ∈ [1, 3)`, `s ∈ [1, 3)`, `C = R = 1`.
pub fn sample_kato_instances(seed: u64, count: usize, min_margin: f64) -> Vec<KatoHypotheses> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let alpha = rng.gen_range(0.0..4.0);
        let beta = rng.gen_range(0.0..4.0);
        let e = rng.gen_range(1.0..3.0);
        let l = rng.gen_range(1.0..3.0);
        let s = rng.gen_range(1.0..3.0);
        // alpha or beta can be drawn as exactly 0, which `new` rejects
        if let Ok(h) = KatoHypotheses::new(alpha, beta, e, l, s) {
            if kato_check(&h) && h.margin() >= min_margin {
                out.push(h);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct KatoRunRow {
    pub hypotheses: KatoHypotheses,
    pub margin: f64,
    pub status: RunStatus,
    pub extrapolated_t: Option<f64>,
}

/// Integrates each instance in parallel.
pub fn kato_cross_validate(
    instances: &[KatoHypotheses],
    t_max: f64,
    threshold: f64,
) -> Result<Vec<KatoRunRow>> {
    instances
        .par_iter()
        .map(|h| {
            let run = integrate_kato(h, t_max, threshold)?;
            Ok(KatoRunRow {
                hypotheses: *h,
                margin: h.margin(),
                status: run.status,
                extrapolated_t: run.extrapolated_t,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec(kind: SystemKind, c: f64, n: usize) -> SystemSpec {
        SystemSpec::new(kind, 2.0, 2.0, c, n).unwrap()
    }

    fn gg1_exact(eps: f64) -> f64 {
        (1.0 + 0.5 / eps).powi(2) - 1.0
    }

    #[test]
    fn zero_data_stays_zero() {
        let sys =
            ComparisonSystem::new(SystemId::SS2nd, spec(SystemKind::SS, 1.0, 3), 0.0).unwrap();
        let run = integrate(&sys, 0.0, 1e3, DEFAULT_THRESHOLD).unwrap();
        assert_eq!(run.status, RunStatus::NoBlowUpWithin { t_max: 1e3 });
        assert!(run
            .trajectory
            .iter()
            .all(|s| s.state.iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn gg1st_matches_closed_form() {
        // F = G, F' = F^2/sqrt(t+1): blow-up at (1 + 1/(2ε))^2 - 1
        let sys =
            ComparisonSystem::new(SystemId::GG1st, spec(SystemKind::GG, 1.0, 2), 0.0).unwrap();
        for eps in [1e-1, 1e-2] {
            let run = integrate(&sys, eps, 1e8, DEFAULT_THRESHOLD).unwrap();
            assert!(matches!(run.status, RunStatus::BlowUp { .. }));
            assert!(run.monotone);
            assert_relative_eq!(
                run.extrapolated_t.unwrap(),
                gg1_exact(eps),
                max_relative = 1e-6
            );
        }
    }

    #[test]
    fn gg1st_halving_ratio() {
        let sys =
            ComparisonSystem::new(SystemId::GG1st, spec(SystemKind::GG, 1.0, 2), 0.0).unwrap();
        let t1 = integrate(&sys, 1e-2, 1e8, DEFAULT_THRESHOLD)
            .unwrap()
            .extrapolated_t
            .unwrap();
        let t2 = integrate(&sys, 5e-3, 1e8, DEFAULT_THRESHOLD)
            .unwrap()
            .extrapolated_t
            .unwrap();
        assert!((t2 / t1 / 4.0 - 1.0).abs() < 0.2, "{}", t2 / t1);
    }

    #[test]
    fn ss2nd_regression_anchor() {
        // independent DOP853 runs, rtol 1e-10, event at threshold 1e60
        let sys =
            ComparisonSystem::new(SystemId::SS2nd, spec(SystemKind::SS, 1.0, 3), 0.0).unwrap();
        for (eps, t_ref) in [(1e-2, 1.740_674_978_78e5), (1e-3, 1.760_588_261_1e7)] {
            let run = integrate(&sys, eps, 1e12, 1e60).unwrap();
            assert!(run.status.t_star().is_some());
            assert!(run.monotone);
            assert_relative_eq!(run.extrapolated_t.unwrap(), t_ref, max_relative = 1e-6);
        }
    }

    #[test]
    fn threshold_insensitive() {
        let sys =
            ComparisonSystem::new(SystemId::SS2nd, spec(SystemKind::SS, 1.0, 3), 0.0).unwrap();
        let a = integrate(&sys, 1e-1, 1e8, 1e8)
            .unwrap()
            .extrapolated_t
            .unwrap();
        let b = integrate(&sys, 1e-1, 1e8, 1e12)
            .unwrap()
            .extrapolated_t
            .unwrap();
        assert!((a / b - 1.0).abs() < 0.01, "{a} {b}");
    }

    #[test]
    fn tolerance_halving_is_stable() {
        let sys =
            ComparisonSystem::new(SystemId::SS2nd, spec(SystemKind::SS, 1.0, 3), 0.0).unwrap();
        let a = integrate_with(
            &sys,
            1e-1,
            1e8,
            1e10,
            &DormandPrince::with_tolerances(1e-9, 1e-30),
        )
        .unwrap();
        let b = integrate_with(
            &sys,
            1e-1,
            1e8,
            1e10,
            &DormandPrince::with_tolerances(5e-10, 1e-30),
        )
        .unwrap();
        let (a, b) = (a.extrapolated_t.unwrap(), b.extrapolated_t.unwrap());
        assert!((a / b - 1.0).abs() < 1e-4);
    }

    #[test]
    fn gg_multi_raw_and_substituted_agree() {
        let sys =
            ComparisonSystem::new(SystemId::GGMulti, spec(SystemKind::GG, 0.5, 2), 0.25).unwrap();
        let red = reduce_multi_speed(&sys).unwrap();
        assert_eq!(red.form, Form::Substituted);
        let a = integrate(&sys, 1e-2, 1e8, DEFAULT_THRESHOLD).unwrap();
        let b = integrate(&red, 1e-2, 1e8, DEFAULT_THRESHOLD).unwrap();
        let (a, b) = (a.extrapolated_t.unwrap(), b.extrapolated_t.unwrap());
        assert!((a / b - 1.0).abs() < 0.01, "{a} {b}");
    }

    #[test]
    fn same_speed_reduction_is_identity() {
        let sys =
            ComparisonSystem::new(SystemId::GGMulti, spec(SystemKind::GG, 1.0, 2), 0.25).unwrap();
        assert_eq!(reduce_multi_speed(&sys).unwrap(), sys);
        let plain =
            ComparisonSystem::new(SystemId::GG1st, spec(SystemKind::GG, 1.0, 2), 0.0).unwrap();
        assert!(reduce_multi_speed(&plain).is_err());
    }

    #[test]
    fn sg_multi_integrating_factor_linear_case() {
        // with F frozen at zero the G equation is G'' + 2λG' = source; drive it
        // through a linear test system in both forms
        let lam = 0.3;
        let raw = (2usize, move |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -2.0 * lam * y[1] + 1.0;
        });
        let sub = (2usize, move |t: f64, y: &[f64], dy: &mut [f64]| {
            let e2 = (2.0 * lam * t).exp();
            dy[0] = y[1] / e2;
            dy[1] = e2;
        });
        let dp = DormandPrince::with_tolerances(1e-12, 1e-14);
        let exact = |t: f64| t / (2.0 * lam) - (1.0 - (-2.0 * lam * t).exp()) / (4.0 * lam * lam);
        let a = dp.integrate(&raw, 0.0, &[0.0, 0.0], 5.0, 0.0, |_, _| true);
        let b = dp.integrate(&sub, 0.0, &[0.0, 0.0], 5.0, 0.0, |_, _| true);
        assert_relative_eq!(a.y[0], exact(5.0), max_relative = 1e-9);
        assert_relative_eq!(b.y[0], exact(5.0), max_relative = 1e-9);
    }

    #[test]
    fn sg_multi_forms_agree() {
        let sys =
            ComparisonSystem::new(SystemId::SGMulti, spec(SystemKind::SG, 0.5, 2), 0.05).unwrap();
        let red = reduce_multi_speed(&sys).unwrap();
        let a = integrate(&sys, 2.0, 1e3, DEFAULT_THRESHOLD).unwrap();
        let b = integrate(&red, 2.0, 1e3, DEFAULT_THRESHOLD).unwrap();
        assert!(a.status.t_star().is_some(), "{:?}", a.status);
        let (a, b) = (a.extrapolated_t.unwrap(), b.extrapolated_t.unwrap());
        assert!((a / b - 1.0).abs() < 0.01, "{a} {b}");
    }

    #[test]
    fn exponential_weights_bound_the_horizon() {
        let sg =
            ComparisonSystem::new(SystemId::SGMulti, spec(SystemKind::SG, 0.5, 2), 0.5).unwrap();
        let sub = reduce_multi_speed(&sg).unwrap();
        assert_eq!(sub.exp_horizon(), Some(350.0));
        // tiny data: no blow-up before the horizon
        assert!(integrate(&sub, 1e-12, 1e4, DEFAULT_THRESHOLD).is_err());
        assert!(integrate(&sg, 1e-12, 1e4, DEFAULT_THRESHOLD).is_ok());
        let gg =
            ComparisonSystem::new(SystemId::GGMulti, spec(SystemKind::GG, 0.5, 2), 0.25).unwrap();
        // μ = λ(1-c) = 0.125
        assert_eq!(gg.exp_horizon(), Some(2800.0));
        assert!(gg
            .with_form(Form::LowerBound)
            .unwrap()
            .exp_horizon()
            .is_none());
    }

    #[test]
    fn rejects_inconsistent_systems() {
        assert!(ComparisonSystem::new(SystemId::SS2nd, spec(SystemKind::GG, 1.0, 3), 0.0).is_err());
        let multi = ComparisonSystem::new(SystemId::GGMulti, spec(SystemKind::GG, 2.0, 2), 0.0);
        assert!(multi.is_err());
        let gg = ComparisonSystem::new(SystemId::GG1st, spec(SystemKind::GG, 1.0, 2), 0.0).unwrap();
        assert!(gg.with_form(Form::LowerBound).is_err());
        assert!(integrate(&gg, -1.0, 1.0, 1e10).is_err());
    }

    #[test]
    fn seed_forcing_exponent() {
        assert_eq!(ComparisonSystem::seed_forcing_exponent(3, 2.0), Some(0.0));
        assert_eq!(ComparisonSystem::seed_forcing_exponent(3, 3.0), None);
        assert_eq!(ComparisonSystem::seed_forcing_exponent(2, 2.0), Some(0.0));
    }

    #[test]
    fn c2_limit() {
        let sys =
            ComparisonSystem::new(SystemId::GGMulti, spec(SystemKind::GG, 0.5, 2), 0.25).unwrap();
        let mu: f64 = 0.125;
        assert_relative_eq!(sys.c2(), (1.0 - (-2.0 * mu).exp()) / (2.0 * mu) / 4.0);
    }

    #[test]
    fn sweep_needs_four_and_reports_failures() {
        let sys =
            ComparisonSystem::new(SystemId::GG1st, spec(SystemKind::GG, 1.0, 2), 0.0).unwrap();
        assert!(epsilon_sweep(&sys, &[0.1, 0.01, 0.001], 1e8, 1e10).is_err());
        match epsilon_sweep(&sys, &[0.1, 0.05, 0.02, 1e-4], 100.0, 1e10) {
            Err(Error::Sweep { eps }) => assert_eq!(eps, vec![0.05, 0.02, 1e-4]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gg1st_sweep_fits_exact_law() {
        let sys =
            ComparisonSystem::new(SystemId::GG1st, spec(SystemKind::GG, 1.0, 2), 0.0).unwrap();
        let eps = [1e-1, 1e-2, 1e-3, 1e-4];
        let rep = epsilon_sweep(&sys, &eps, 1e12, 1e10).unwrap();
        let exact: Vec<f64> = eps.iter().map(|e| gg1_exact(*e)).collect();
        let oracle = fit_powerlaw(&eps, &exact).unwrap();
        assert_relative_eq!(rep.fit.slope, oracle.slope, max_relative = 1e-5);
        assert!(rep.monotone_in_eps);
        assert_eq!(rep.rows[0].eps, 1e-1);
    }

    #[test]
    fn kato_samples_blow_up() {
        let inst = sample_kato_instances(11, 5, 1.0);
        assert_eq!(inst.len(), 5);
        assert!(inst.iter().all(|h| kato_check(h) && h.margin() >= 1.0));
        for row in kato_cross_validate(&inst, 1e6, 1e100).unwrap() {
            assert!(row.status.t_star().is_some(), "{row:?}");
        }
    }

    #[test]
    fn kato_lower_bound_is_preserved() {
        let h = KatoHypotheses::new(3.0, 3.0, 2.0, 2.0, 2.0).unwrap();
        let run = integrate_kato(&h, 1e6, 1e100).unwrap();
        for s in &run.trajectory {
            assert!(s.state[0] >= s.t + 1.0 - 1e-9);
            assert!(s.state[2] >= (s.t + 1.0).powi(2) * (1.0 - 1e-9));
        }
    }
}
