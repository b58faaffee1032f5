//! Reference problems with known answers: the free radial wave in three
//! dimensions (d'Alembert after the `r u` reduction), a manufactured
//! solution on a long-range metric, and the discrete identity `F'' = ∫|v|^p`.

use serde::Serialize;

use crate::critical_curves::{SystemKind, SystemSpec};
use crate::error::{domain, Result};
use crate::metric::{MetricProfile, RadialGrid};

use super::data::{make_initial_data, Component, DataProfile, Shape};
use super::solver::{light_cone_grid, run_simulation, SimOptions, SimStatus, Wiring};

#[derive(Debug, Clone, Serialize)]
pub struct OrderReport {
    pub hs: Vec<f64>,
    /// Max-norm error at the final time for each `h`.
    pub errors: Vec<f64>,
    /// `log2(e[k-1]/e[k])` for successive halvings.
    pub orders: Vec<f64>,
}

impl OrderReport {
    fn from_errors(hs: &[f64], errors: Vec<f64>) -> Self {
        let orders = errors
            .windows(2)
            .zip(hs.windows(2))
            .map(|(e, h)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
            .collect();
        Self {
            hs: hs.to_vec(),
            errors,
            orders,
        }
    }

    /// Order observed on the finest pair.
    pub fn finest_order(&self) -> f64 {
        self.orders.last().copied().unwrap_or(f64::NAN)
    }
}

fn flat() -> MetricProfile {
    MetricProfile::flat(1e4).with_delta0(0.9)
}

fn bump(metric: &MetricProfile, eps: f64, big_r: f64) -> Result<DataProfile> {
    let g = RadialGrid::uniform(10.0 * big_r, 10)?;
    make_initial_data(Shape::PolyBump, eps, big_r, &g, metric)
}

fn check_hs(hs: &[f64]) -> Result<()> {
    if hs.len() < 2 || hs.iter().any(|h| !(*h > 0.0)) {
        return Err(domain("need at least two positive grid spacings"));
    }
    Ok(())
}

/// `u(t, r)` for `u_tt = Δu` in three dimensions with `u(0) = u0`, `u_t(0) = 0`.
pub fn dalembert_n3(u0: impl Fn(f64) -> f64, t: f64, r: f64) -> f64 {
    let w = |x: f64| x * u0(x.abs());
    if r == 0.0 {
        let d = 1e-6;
        return (w(t + d) - w(t - d)) / (2.0 * d);
    }
    (w(r + t) + w(r - t)) / (2.0 * r)
}

/// Linear flat `n = 3` run from a unit bump in `u0` against [`dalembert_n3`].
pub fn dalembert_error(h: f64, t_max: f64) -> Result<f64> {
    let m = flat();
    let mut d = bump(&m, 1.0, 1.0)?;
    d.u1 = Component::zero();
    d.v0 = Component::zero();
    d.v1 = Component::zero();
    let spec = SystemSpec::new(SystemKind::SS, 2.0, 2.0, 1.0, 3)?;
    let grid = light_cone_grid(&m, 1.0, t_max, d.r1, h)?;
    let opts = SimOptions {
        wiring: Wiring::Linear,
        snapshot_every: usize::MAX,
        ..SimOptions::default()
    };
    let out = run_simulation(&spec, &m, &d, &grid, t_max, &opts)?;
    let last = out
        .snapshots
        .last()
        .ok_or_else(|| domain("run produced no final snapshot"))?;
    Ok(grid
        .r_points
        .iter()
        .zip(&last.u)
        .map(|(&r, u)| (u - dalembert_n3(|x| d.u0(x), last.t, r)).abs())
        .fold(0.0, f64::max))
}

pub fn dalembert_order(hs: &[f64], t_max: f64) -> Result<OrderReport> {
    check_hs(hs)?;
    let errors = hs
        .iter()
        .map(|&h| dalembert_error(h, t_max))
        .collect::<Result<Vec<_>>>()?;
    Ok(OrderReport::from_errors(hs, errors))
}

/// Error of the SS system (`n = 3`, `c = 0.5`, `p = q = 2`) on
/// `LongRange{0.3, 2}` against `u* = v* = (1+t) P(r)`, `P` the bump of radius
/// 2, with the residual supplied as forcing.
pub fn manufactured_error(h: f64) -> Result<f64> {
    let m = MetricProfile::long_range(0.3, 2.0, 0.5, 1e4)?;
    let big_r = 2.0;
    let spec = SystemSpec::new(SystemKind::SS, 2.0, 2.0, 0.5, 3)?;
    let d = bump(&m, 1.0, big_r)?;
    let mk = m.clone();
    // Δ_g P = K^{-2}(P'' + 2P'/r) - K' K^{-3} P'
    let lap = move |r: f64| {
        let x = r / big_r;
        if x >= 1.0 {
            return 0.0;
        }
        let s = 1.0 - x * x;
        let (dp, ddp) = Shape::PolyBump.derivs(r, big_r);
        let dp_over_r = -8.0 / (big_r * big_r) * s.powi(3);
        let k = mk.k_at(r);
        (ddp + 2.0 * dp_over_r) / (k * k) - mk.k_prime(r) / (k * k * k) * dp
    };
    let forcing = move |t: f64, r: f64| {
        let u = (1.0 + t) * Shape::PolyBump.eval(r, big_r);
        let fu = -0.25 * (1.0 + t) * lap(r) - u * u;
        let fv = -(1.0 + t) * lap(r) - u * u;
        (fu, fv)
    };
    let t_max = 1.0;
    let grid = light_cone_grid(&m, 1.0, t_max, d.r1, h)?;
    let opts = SimOptions {
        snapshot_every: usize::MAX,
        forcing: Some(&forcing),
        ..SimOptions::default()
    };
    let out = run_simulation(&spec, &m, &d, &grid, t_max, &opts)?;
    let last = out
        .snapshots
        .last()
        .ok_or_else(|| domain("run produced no final snapshot"))?;
    Ok(grid
        .r_points
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let exact = (1.0 + last.t) * Shape::PolyBump.eval(r, big_r);
            (last.u[i] - exact).abs().max((last.v[i] - exact).abs())
        })
        .fold(0.0, f64::max))
}

pub fn manufactured_order(hs: &[f64]) -> Result<OrderReport> {
    check_hs(hs)?;
    let errors = hs
        .iter()
        .map(|&h| manufactured_error(h))
        .collect::<Result<Vec<_>>>()?;
    Ok(OrderReport::from_errors(hs, errors))
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub eps: f64,
    pub h: f64,
    pub t_max: f64,
    /// `max |D²F - ∫|v|^p| / ∫|v|^p` over recorded steps, same for `G`.
    pub max_relative_error: f64,
    /// `F` and `G` nondecreasing.
    pub monotone: bool,
}

/// SS flat `n = 3`, `p = q = 2`: second differences of `F = ∫u`, `G = ∫v`
/// against the trapezoid quadratures of the sources.
pub fn source_identity(eps: f64, h: f64, t_max: f64) -> Result<IdentityReport> {
    let m = flat();
    let d = bump(&m, eps, 1.0)?;
    let spec = SystemSpec::new(SystemKind::SS, 2.0, 2.0, 1.0, 3)?;
    let grid = light_cone_grid(&m, 1.0, t_max, d.r1, h)?;
    let opts = SimOptions {
        record_every: 1,
        ..SimOptions::default()
    };
    let out = run_simulation(&spec, &m, &d, &grid, t_max, &opts)?;
    if out.status != SimStatus::Completed {
        return Err(domain("identity check needs a run that stays bounded"));
    }
    let s = &out.functional_series;
    let dt = out.convergence.dt;
    let mut worst: f64 = 0.0;
    for k in 1..s.len().saturating_sub(1) {
        let fdd = (s.f[k + 1] - 2.0 * s.f[k] + s.f[k - 1]) / (dt * dt);
        let gdd = (s.g[k + 1] - 2.0 * s.g[k] + s.g[k - 1]) / (dt * dt);
        worst = worst
            .max((fdd - s.source_u[k]).abs() / s.source_u[k])
            .max((gdd - s.source_v[k]).abs() / s.source_v[k]);
    }
    let monotone = s.f.windows(2).all(|w| w[1] >= w[0]) && s.g.windows(2).all(|w| w[1] >= w[0]);
    Ok(IdentityReport {
        eps,
        h,
        t_max,
        max_relative_error: worst,
        monotone,
    })
}
