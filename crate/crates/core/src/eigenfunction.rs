//! Positive radial solution of `Δ_g φ = λ^2 φ` with `φ(0) = 1`, and the
//! weighted cone integrals of the test functions `e^{-σλt} φ`.
//!
//! The radial equation is
//! `φ'' + ((n-1)/r - K'/K) φ' = λ^2 K^2 φ`. To keep the numbers bounded the
//! shooting integrates `w = e^{-λ r̃} φ`, which satisfies
//! `w'' + (2λK + (n-1)/r - K'/K) w' + λ(n-1)K/r w = 0`.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::critical_curves::SystemSpec;
use crate::error::{domain, Error, Result};
use crate::fit::linear_slope;
use crate::metric::{japanese, MetricProfile, RadialGrid};
use crate::quadrature::{unit_sphere_area, LogSum};
use crate::rk::{DormandPrince, OdeSystem, Termination};

pub const DEFAULT_LAMBDA0: f64 = 0.5;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenSolverConfig {
    pub lambda: f64,
    pub lambda0: f64,
    pub grid: RadialGrid,
    pub ode_tol: f64,
}

impl EigenSolverConfig {
    /// Grid `[0, r_end]` with spacing close to `h`, `λ0 = 0.5`, tolerance `1e-11`.
    pub fn new(lambda: f64, r_end: f64, h: f64) -> Result<Self> {
        let cells = (r_end / h).ceil().max(1.0) as usize;
        Ok(Self {
            lambda,
            lambda0: DEFAULT_LAMBDA0,
            grid: RadialGrid::uniform(r_end, cells)?,
            ode_tol: 1e-11,
        })
    }

    pub fn with_lambda0(mut self, lambda0: f64) -> Self {
        self.lambda0 = lambda0;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) {
            return Err(domain(format!("lambda = {} must be positive", self.lambda)));
        }
        if self.lambda > self.lambda0 {
            return Err(domain(format!(
                "lambda = {} exceeds the ceiling lambda0 = {}",
                self.lambda, self.lambda0
            )));
        }
        if self.grid.len() < 2 {
            return Err(domain("eigenfunction grid needs at least two points"));
        }
        if !(self.ode_tol > 0.0) {
            return Err(domain("ode_tol must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Eigenfunction {
    pub config: EigenSolverConfig,
    pub n: usize,
    /// `φ` on the grid (may be `inf` where `λ r̃` exceeds the f64 range).
    pub values: Vec<f64>,
    /// `φ'` on the grid.
    pub derivs: Vec<f64>,
    /// `ln φ` on the grid; always finite.
    pub log_values: Vec<f64>,
    /// `φ'/φ` on the grid.
    pub log_derivs: Vec<f64>,
    /// `r̃` on the grid.
    pub rtilde: Vec<f64>,
    pub c0_measured: f64,
}

struct RescaledEq<'a> {
    profile: &'a MetricProfile,
    lambda: f64,
    nm1: f64,
}

impl OdeSystem for RescaledEq<'_> {
    fn dim(&self) -> usize {
        2
    }
    fn rhs(&self, r: f64, y: &[f64], dy: &mut [f64]) {
        let k = self.profile.k_at(r);
        let kp = self.profile.k_prime(r);
        dy[0] = y[1];
        dy[1] = -(2.0 * self.lambda * k + self.nm1 / r - kp / k) * y[1]
            - self.lambda * self.nm1 * k / r * y[0];
    }
}

/// Shoots the regular solution outward from `r = 0`.
pub fn solve_eigenfunction(
    profile: &MetricProfile,
    n: usize,
    config: EigenSolverConfig,
) -> Result<Eigenfunction> {
    if n < 2 {
        return Err(domain("dimension must be at least 2"));
    }
    config.validate()?;
    let grid = &config.grid;
    if grid.r_end() > profile.r_max * (1.0 + 1e-14) {
        return Err(domain(format!(
            "grid end {} beyond metric range {}",
            grid.r_end(),
            profile.r_max
        )));
    }
    let lambda = config.lambda;
    let len = grid.len();
    let h = grid.spacing;
    let rt: Vec<f64> = grid
        .r_points
        .iter()
        .map(|&r| profile.rtilde_at(r))
        .collect();

    let eq = RescaledEq {
        profile,
        lambda,
        nm1: (n - 1) as f64,
    };
    let dp = DormandPrince::with_tolerances(config.ode_tol, 1e-24);

    // series start: φ ≈ 1 + a r^2 with a = λ^2 K(0)^2 / (2n)
    let k0 = profile.k_at(0.0);
    let a = lambda * lambda * k0 * k0 / (2.0 * n as f64);
    let r_s = (0.5 * h).min(1e-3 / lambda.max(1.0)).min(1e-3);
    let phi_s = 1.0 + a * r_s * r_s;
    let dphi_s = 2.0 * a * r_s;
    let decay = (-lambda * profile.rtilde_at(r_s)).exp();
    let mut y = vec![
        decay * phi_s,
        decay * (dphi_s - lambda * profile.k_at(r_s) * phi_s),
    ];

    let mut log_values = vec![0.0; len];
    let mut log_derivs = vec![0.0; len];
    let mut r = r_s;
    let mut step = 0.0;
    for i in 1..len {
        let target = grid.r_points[i];
        let out = dp.integrate(&eq, r, &y, target, step, |_, _| true);
        if out.termination != Termination::Reached {
            return Err(Error::Solver(format!(
                "integration stopped at r = {} ({:?})",
                out.t, out.termination
            )));
        }
        y = out.y;
        r = target;
        step = out.next_h;
        if !(y[0] > 0.0) {
            return Err(Error::Solver(format!(
                "non-positive eigenfunction at r = {target}; lambda may exceed the admissible range"
            )));
        }
        log_values[i] = lambda * rt[i] + y[0].ln();
        log_derivs[i] = y[1] / y[0] + lambda * profile.k_at(target);
    }

    let values: Vec<f64> = log_values.iter().map(|l| l.exp()).collect();
    let derivs: Vec<f64> = values.iter().zip(&log_derivs).map(|(v, d)| v * d).collect();
    let mut eig = Eigenfunction {
        config,
        n,
        values,
        derivs,
        log_values,
        log_derivs,
        rtilde: rt,
        c0_measured: 0.0,
    };
    eig.c0_measured = check_bounds(&eig, profile, n)?;
    Ok(eig)
}

/// Largest `c0 ∈ (0, 1]` with `c0 <= φ` and `φ <r λ>^{(n-1)/2} e^{-λ r̃} <= 1/c0` on the grid.
pub fn check_bounds(eig: &Eigenfunction, profile: &MetricProfile, n: usize) -> Result<f64> {
    let lambda = eig.config.lambda;
    let mut c0: f64 = 1.0;
    let mut worst_upper = f64::NEG_INFINITY;
    for (i, &r) in eig.config.grid.r_points.iter().enumerate() {
        let log_phi = eig.log_values[i];
        if !log_phi.is_finite() {
            return Err(Error::Bound(format!("non-finite eigenfunction at r = {r}")));
        }
        c0 = c0.min(log_phi.exp());
        let upper = log_phi + 0.5 * (n as f64 - 1.0) * japanese(lambda * r).ln()
            - lambda * profile.rtilde_at(r);
        worst_upper = worst_upper.max(upper);
    }
    c0 = c0.min((-worst_upper).exp());
    if !(c0 > 0.0) {
        return Err(Error::Bound("no positive c0 fits the grid".into()));
    }
    Ok(c0)
}

impl Eigenfunction {
    pub fn lambda(&self) -> f64 {
        self.config.lambda
    }

    pub fn r_end(&self) -> f64 {
        self.config.grid.r_end()
    }

    /// `ln φ(r)` by cubic Hermite interpolation in `ln φ`.
    pub fn log_phi(&self, r: f64) -> Result<f64> {
        let grid = &self.config.grid;
        if !(r >= 0.0 && r <= grid.r_end() * (1.0 + 1e-14)) {
            return Err(domain(format!(
                "r = {r} beyond eigenfunction grid {}",
                grid.r_end()
            )));
        }
        let h = grid.spacing;
        let i = ((r / h).floor() as usize).min(grid.len() - 2);
        let s = ((r - grid.r_points[i]) / h).clamp(0.0, 1.0);
        let (y0, y1) = (self.log_values[i], self.log_values[i + 1]);
        let (m0, m1) = (self.log_derivs[i] * h, self.log_derivs[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        Ok((2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1)
    }

    pub fn phi(&self, r: f64) -> Result<f64> {
        Ok(self.log_phi(r)?.exp())
    }

    /// Writes `r,phi,dphi`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["r", "phi", "dphi"])?;
        for (i, r) in self.config.grid.r_points.iter().enumerate() {
            w.write_record([
                format!("{r:.12e}"),
                format!("{:.12e}", self.values[i]),
                format!("{:.12e}", self.derivs[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Max over interior grid points of `|Δ_h φ - λ^2 φ| / (λ^2 φ)` with the
    /// conservative finite-volume stencil (cell volume `(r+^n - r-^n)/n`).
    /// Decreases like `h^2`.
    pub fn discrete_residual(&self, profile: &MetricProfile) -> f64 {
        let grid = &self.config.grid;
        let h = grid.spacing;
        let lam2 = self.lambda() * self.lambda();
        let nm1 = self.n as i32 - 1;
        let mut worst: f64 = 0.0;
        for i in 1..grid.len() - 1 {
            let r = grid.r_points[i];
            let rp = r + 0.5 * h;
            let rm = r - 0.5 * h;
            let wp = rp.powi(nm1) / profile.k_at(rp);
            let wm = rm.powi(nm1) / profile.k_at(rm);
            // divide through by φ_i to stay in range
            let ratio_p = (self.log_values[i + 1] - self.log_values[i]).exp();
            let ratio_m = (self.log_values[i - 1] - self.log_values[i]).exp();
            let vol = (rp.powi(nm1 + 1) - rm.powi(nm1 + 1)) / (nm1 + 1) as f64;
            let lap = (wp * (ratio_p - 1.0) - wm * (1.0 - ratio_m)) / (h * profile.k_at(r) * vol);
            worst = worst.max((lap - lam2).abs() / lam2);
        }
        worst
    }
}

/// `e^{-σλt} φ(r)`.
pub fn psi(eig: &Eigenfunction, sigma: f64, t: f64, r: f64) -> Result<f64> {
    Ok((eig.log_phi(r)? - sigma * eig.lambda() * t).exp())
}

/// The weighted integrals over the cones `D_1 = {r̃ <= ct + R1}` and
/// `D_2 = {r̃ <= t + R1}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Lemma22Integrals {
    pub t: f64,
    /// `∫_{D_1} ψ_1^p dv_g`.
    pub psi1_p: f64,
    /// `∫_{D_2} ψ_2^p dv_g`.
    pub psi2_p: f64,
    /// `∫_{D_2} ψ_1^{-p'/p} ψ_2^{p'} dv_g`.
    pub mixed_p: f64,
    /// `∫_{D_1} ψ_2^{-q'/q} ψ_1^{q'} dv_g`.
    pub mixed_q: f64,
}

/// Composite trapezoid of `exp(log_f(r)) K r^{n-1} |S^{n-1}|` over `[0, r_c]`.
/// The last partial cell uses the interpolated endpoint value.
fn cone_integral(
    eig: &Eigenfunction,
    profile: &MetricProfile,
    r_c: f64,
    log_f: impl Fn(f64) -> f64,
) -> Result<f64> {
    let grid = &eig.config.grid;
    if r_c > grid.r_end() * (1.0 + 1e-12) {
        return Err(domain(format!(
            "cone radius {r_c} beyond eigenfunction grid {}; extend the grid",
            grid.r_end()
        )));
    }
    if r_c <= 0.0 {
        return Ok(0.0);
    }
    let h = grid.spacing;
    let n = eig.n;
    let mut sum = LogSum::default();
    let mut last = 0;
    for (i, &r) in grid.r_points.iter().enumerate() {
        if r > r_c {
            break;
        }
        last = i;
    }
    for i in 0..=last {
        let r = grid.r_points[i];
        let w = if i == 0 || i == last { 0.5 * h } else { h };
        sum.add(w * profile.volume_density(r, n), log_f(eig.log_values[i]));
    }
    let r_last = grid.r_points[last];
    let tail = r_c - r_last;
    if tail > 0.0 {
        sum.add(
            0.5 * tail * profile.volume_density(r_last, n),
            log_f(eig.log_values[last]),
        );
        sum.add(
            0.5 * tail * profile.volume_density(r_c, n),
            log_f(eig.log_phi(r_c)?),
        );
    }
    Ok(sum.value() * unit_sphere_area(n))
}

/// Evaluates the four weighted integrals at time `t`.
pub fn lemma22_integrals(
    eig: &Eigenfunction,
    profile: &MetricProfile,
    spec: &SystemSpec,
    r1: f64,
    t: f64,
) -> Result<Lemma22Integrals> {
    let (p, q, c) = (spec.p, spec.q, spec.c);
    if !(c > 0.0 && c <= 1.0) {
        return Err(domain("cone integrals assume 0 < c <= 1"));
    }
    let lam = eig.lambda();
    let cone = |sigma: f64| -> Result<f64> {
        let s = sigma * t + r1;
        profile.rtilde_inverse(s)
    };
    let (r_d1, r_d2) = (cone(c)?, cone(1.0)?);
    let pp = p / (p - 1.0);
    let qp = q / (q - 1.0);

    // ψ_1^{-p'/p} ψ_2^{p'} = φ e^{λt(c-p)/(p-1)} and
    // ψ_2^{-q'/q} ψ_1^{q'} = φ e^{λt(1-cq)/(q-1)}
    let psi1_p = cone_integral(eig, profile, r_d1, |l| p * (l - c * lam * t))?;
    let psi2_p = cone_integral(eig, profile, r_d2, |l| p * (l - lam * t))?;
    let mixed_p = cone_integral(eig, profile, r_d2, |l| {
        -pp / p * (l - c * lam * t) + pp * (l - lam * t)
    })?;
    let mixed_q = cone_integral(eig, profile, r_d1, |l| {
        -qp / q * (l - lam * t) + qp * (l - c * lam * t)
    })?;
    Ok(Lemma22Integrals {
        t,
        psi1_p,
        psi2_p,
        mixed_p,
        mixed_q,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub name: String,
    /// Polynomial exponent of the stated bound.
    pub predicted_exponent: f64,
    /// Log-log slope of `integral / exponential factor` over the last decade
    /// of the time grid; `None` with fewer than two points there.
    pub fitted_slope: Option<f64>,
    /// `sup_t integral / bound`.
    pub sup_ratio: f64,
    pub ratios: Vec<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub times: Vec<f64>,
    pub estimates: Vec<EstimateReport>,
    pub pass: bool,
}

impl BoundReport {
    pub fn estimate(&self, name: &str) -> Option<&EstimateReport> {
        self.estimates.iter().find(|e| e.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(Error::from)
    }
}

/// Slope tolerance above the predicted exponent.
pub const SLOPE_SLACK: f64 = 0.1;

/// Compares each integral with its stated bound along `t_grid`.
pub fn check_lemma22(
    eig: &Eigenfunction,
    profile: &MetricProfile,
    spec: &SystemSpec,
    r1: f64,
    t_grid: &[f64],
) -> Result<BoundReport> {
    let n1 = spec.n as f64 - 1.0;
    let (p, q, c) = (spec.p, spec.q, spec.c);
    let lam = eig.lambda();
    let samples = t_grid
        .iter()
        .map(|&t| lemma22_integrals(eig, profile, spec, r1, t))
        .collect::<Result<Vec<_>>>()?;

    let first_p = n1 - n1 * p / 2.0;
    // (name, polynomial exponent, exponential rate in t, value)
    type Pick = fn(&Lemma22Integrals) -> f64;
    let rows: [(&str, f64, f64, Pick); 4] = [
        ("psi1_p", first_p, 0.0, |s| s.psi1_p),
        ("psi2_p", first_p, 0.0, |s| s.psi2_p),
        ("mixed_p", n1 / 2.0, lam * (c - 1.0) / (p - 1.0), |s| {
            s.mixed_p
        }),
        ("mixed_q", n1 / 2.0, lam * (1.0 - c) / (q - 1.0), |s| {
            s.mixed_q
        }),
    ];
    let t_top = t_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut estimates = Vec::new();
    for (name, expo, rate, pick) in rows {
        let mut ratios = Vec::new();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for s in &samples {
            let v = pick(s);
            let lt = (s.t + 1.0).ln();
            let log_ratio = v.ln() - rate * s.t - expo * lt;
            ratios.push(log_ratio.exp());
            if s.t >= t_top / 10.0 && v > 0.0 {
                xs.push(lt);
                ys.push(v.ln() - rate * s.t);
            }
        }
        let fitted_slope = linear_slope(&xs, &ys);
        let sup_ratio = ratios.iter().copied().fold(0.0, f64::max);
        let pass = sup_ratio.is_finite() && fitted_slope.is_none_or(|s| s <= expo + SLOPE_SLACK);
        estimates.push(EstimateReport {
            name: name.to_string(),
            predicted_exponent: expo,
            fitted_slope,
            sup_ratio,
            ratios,
            pass,
        });
    }
    let pass = estimates.iter().all(|e| e.pass);
    Ok(BoundReport {
        times: t_grid.to_vec(),
        estimates,
        pass,
    })
}

/// Writes the bound report as JSON.
pub fn write_bound_report(report: &BoundReport, path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(report.to_json()?.as_bytes())?;
    Ok(())
}
