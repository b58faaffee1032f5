//! Compactly supported radial initial data and the sign conditions on it.

use serde::{Deserialize, Serialize};

use crate::critical_curves::SystemSpec;
use crate::eigenfunction::Eigenfunction;
use crate::error::{domain, Result};
use crate::metric::{MetricProfile, RadialGrid};
use crate::quadrature::{gauss_legendre8, unit_sphere_area};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    /// `(1 - (r/R)^2)^4` on `r < R`.
    PolyBump,
    /// `e^{-4(r/R)^2} (1 - (r/R)^2)^4` on `r < R`.
    GaussianTruncated,
    Zero,
}

impl Shape {
    /// Value at `r` for support radius `big_r`, peak normalised to 1.
    pub fn eval(self, r: f64, big_r: f64) -> f64 {
        let x = r / big_r;
        if x >= 1.0 {
            return 0.0;
        }
        let s = x * x;
        match self {
            Shape::PolyBump => (1.0 - s).powi(4),
            Shape::GaussianTruncated => (-4.0 * s).exp() * (1.0 - s).powi(4),
            Shape::Zero => 0.0,
        }
    }

    /// First and second `r`-derivatives.
    pub fn derivs(self, r: f64, big_r: f64) -> (f64, f64) {
        let x = r / big_r;
        if x >= 1.0 || self == Shape::Zero {
            return (0.0, 0.0);
        }
        let r2 = big_r * big_r;
        let s = x * x;
        let b = (1.0 - s).powi(4);
        let db = -8.0 * r / r2 * (1.0 - s).powi(3);
        let ddb = -8.0 / r2 * (1.0 - s).powi(3) + 48.0 * r * r / (r2 * r2) * (1.0 - s).powi(2);
        match self {
            Shape::PolyBump => (db, ddb),
            Shape::GaussianTruncated => {
                let g = (-4.0 * s).exp();
                let dg = -8.0 * r / r2 * g;
                let ddg = (-8.0 / r2 + 64.0 * r * r / (r2 * r2)) * g;
                (dg * b + g * db, ddg * b + 2.0 * dg * db + g * ddb)
            }
            Shape::Zero => unreachable!(),
        }
    }
}

/// One data field: `ε · coef · shape(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub shape: Shape,
    pub coef: f64,
}

impl Component {
    pub fn new(shape: Shape, coef: f64) -> Self {
        Self { shape, coef }
    }

    pub fn zero() -> Self {
        Self::new(Shape::Zero, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataProfile {
    pub eps: f64,
    /// Support radius `R`.
    pub r_support: f64,
    /// Cone offset `R1 >= r̃(R)`.
    pub r1: f64,
    pub u0: Component,
    pub u1: Component,
    pub v0: Component,
    pub v1: Component,
}

impl DataProfile {
    fn value(&self, c: &Component, r: f64) -> f64 {
        self.eps * c.coef * c.shape.eval(r, self.r_support)
    }

    pub fn u0(&self, r: f64) -> f64 {
        self.value(&self.u0, r)
    }
    pub fn u1(&self, r: f64) -> f64 {
        self.value(&self.u1, r)
    }
    pub fn v0(&self, r: f64) -> f64 {
        self.value(&self.v0, r)
    }
    pub fn v1(&self, r: f64) -> f64 {
        self.value(&self.v1, r)
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn validate(&self, metric: &MetricProfile) -> Result<()> {
        if !(self.eps >= 0.0) || !(self.r_support > 0.0) {
            return Err(domain("data needs eps >= 0 and R > 0"));
        }
        if [self.u0, self.u1, self.v0, self.v1]
            .iter()
            .any(|c| !(c.coef >= 0.0) || !c.coef.is_finite())
        {
            return Err(domain("data coefficients must be nonnegative"));
        }
        let rt = metric.rtilde(self.r_support)?;
        if self.r1 < rt * (1.0 - 1e-12) {
            return Err(domain(format!("R1 = {} is below r̃(R) = {rt}", self.r1)));
        }
        Ok(())
    }
}

/// All four fields equal to `eps · shape`, `R1 = r̃(R)`.
pub fn make_initial_data(
    shape: Shape,
    eps: f64,
    r_support: f64,
    grid: &RadialGrid,
    metric: &MetricProfile,
) -> Result<DataProfile> {
    if !(eps > 0.0) {
        return Err(domain(format!("eps = {eps} must be positive")));
    }
    if !(r_support > 0.0) || r_support > grid.r_end() {
        return Err(domain(format!(
            "support radius {r_support} must lie in (0, {}]",
            grid.r_end()
        )));
    }
    let c = Component::new(shape, 1.0);
    let data = DataProfile {
        eps,
        r_support,
        r1: metric.rtilde(r_support)?,
        u0: c,
        u1: c,
        v0: c,
        v1: c,
    };
    data.validate(metric)?;
    Ok(data)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionItem {
    pub name: &'static str,
    pub value: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub lambda: f64,
    pub items: Vec<ConditionItem>,
    pub pass: bool,
}

impl ConditionReport {
    pub fn item(&self, name: &str) -> Option<&ConditionItem> {
        self.items.iter().find(|i| i.name == name)
    }
}

// |S^{n-1}| ∫_0^R f K r^{n-1} dr, 64 Gauss panels
fn ball_integral(f: impl Fn(f64) -> f64, metric: &MetricProfile, n: usize, big_r: f64) -> f64 {
    let panels = 64;
    let w = big_r / panels as f64;
    let sum: f64 = (0..panels)
        .map(|k| {
            let a = k as f64 * w;
            gauss_legendre8(|r| f(r) * metric.volume_density(r, n), a, a + w)
        })
        .sum();
    unit_sphere_area(n) * sum
}

/// Sign conditions on the data: `∫u_i > 0`, `∫u0 φ > 0`,
/// `∫(u1 - cλ u0) φ > 0`, and the `v` analogues with `λ` in place of `cλ`.
pub fn check_data_conditions(
    data: &DataProfile,
    eig: &Eigenfunction,
    metric: &MetricProfile,
    spec: &SystemSpec,
) -> Result<ConditionReport> {
    let big_r = data.r_support;
    if eig.r_end() < big_r {
        return Err(domain("eigenfunction grid does not cover the data support"));
    }
    let n = spec.n;
    let lam = eig.lambda();
    let phi = |r: f64| eig.phi(r).unwrap_or(f64::NAN);
    let int = |f: &dyn Fn(f64) -> f64| ball_integral(f, metric, n, big_r);
    let c = spec.c;
    let values = [
        ("int_u0", int(&|r| data.u0(r))),
        ("int_u1", int(&|r| data.u1(r))),
        ("int_u0_phi", int(&|r| data.u0(r) * phi(r))),
        (
            "int_u1_minus_c_lambda_u0_phi",
            int(&|r| (data.u1(r) - c * lam * data.u0(r)) * phi(r)),
        ),
        ("int_v0", int(&|r| data.v0(r))),
        ("int_v1", int(&|r| data.v1(r))),
        ("int_v0_phi", int(&|r| data.v0(r) * phi(r))),
        (
            "int_v1_minus_lambda_v0_phi",
            int(&|r| (data.v1(r) - lam * data.v0(r)) * phi(r)),
        ),
    ];
    let items: Vec<ConditionItem> = values
        .into_iter()
        .map(|(name, value)| ConditionItem {
            name,
            value,
            pass: value > 0.0,
        })
        .collect();
    let pass = items.iter().all(|i| i.pass);
    Ok(ConditionReport {
        lambda: lam,
        items,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::critical_curves::SystemKind;
    use crate::eigenfunction::{solve_eigenfunction, EigenSolverConfig};
    use approx::assert_relative_eq;

    fn setup() -> (MetricProfile, RadialGrid, Eigenfunction, SystemSpec) {
        let metric = MetricProfile::flat(100.0);
        let grid = RadialGrid::uniform(10.0, 100).unwrap();
        let eig = solve_eigenfunction(&metric, 3, EigenSolverConfig::new(0.5, 5.0, 0.05).unwrap())
            .unwrap();
        let spec = SystemSpec::new(SystemKind::GG, 2.0, 2.0, 0.5, 3).unwrap();
        (metric, grid, eig, spec)
    }

    #[test]
    fn poly_bump_values() {
        let (m, g, ..) = setup();
        let d = make_initial_data(Shape::PolyBump, 0.1, 1.0, &g, &m).unwrap();
        assert_eq!(d.u0(0.0), 0.1);
        assert_eq!(d.u0(1.0), 0.0);
        let d = make_initial_data(Shape::PolyBump, 1.0, 2.0, &g, &m).unwrap();
        assert_relative_eq!(d.u0(1.0), 0.316_406_25, max_relative = 1e-15);
        assert!(make_initial_data(Shape::PolyBump, 1.0, 20.0, &g, &m).is_err());
    }

    #[test]
    fn shape_derivatives_match_differences() {
        for shape in [Shape::PolyBump, Shape::GaussianTruncated] {
            for r in [0.1, 0.7, 1.3] {
                let h = 1e-5;
                let d1 = (shape.eval(r + h, 1.5) - shape.eval(r - h, 1.5)) / (2.0 * h);
                let d2 = (shape.eval(r + h, 1.5) - 2.0 * shape.eval(r, 1.5)
                    + shape.eval(r - h, 1.5))
                    / (h * h);
                let (a, b) = shape.derivs(r, 1.5);
                assert_relative_eq!(a, d1, epsilon = 1e-8);
                assert_relative_eq!(b, d2, epsilon = 1e-4);
            }
        }
    }

    #[test]
    fn conditions_zero_position() {
        let (m, g, eig, spec) = setup();
        let mut d = make_initial_data(Shape::PolyBump, 1.0, 1.0, &g, &m).unwrap();
        d.u0 = Component::zero();
        let rep = check_data_conditions(&d, &eig, &m, &spec).unwrap();
        assert!(rep.item("int_u1").unwrap().pass);
        assert!(rep.item("int_u1_minus_c_lambda_u0_phi").unwrap().pass);
        assert!(!rep.item("int_u0_phi").unwrap().pass);
        assert!(!rep.pass);
    }

    #[test]
    fn conditions_linearity() {
        let (m, g, eig, spec) = setup();
        let mut d = make_initial_data(Shape::PolyBump, 1.0, 1.0, &g, &m).unwrap();
        let cl = spec.c * eig.lambda();
        d.u1 = Component::new(Shape::PolyBump, 2.0 * cl);
        let rep = check_data_conditions(&d, &eig, &m, &spec).unwrap();
        let mixed = rep.item("int_u1_minus_c_lambda_u0_phi").unwrap().value;
        let base = rep.item("int_u0_phi").unwrap().value;
        assert_relative_eq!(mixed, cl * base, max_relative = 1e-12);
        assert!(mixed > 0.0);
        // flat n = 3: ∫ bump dv = 4π ∫ (1-r^2)^4 r^2 dr = 4π · 128/3465
        let int_u0 = rep.item("int_u0").unwrap().value;
        assert_relative_eq!(
            int_u0,
            4.0 * std::f64::consts::PI * 128.0 / 3465.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn all_zero_data_fails_everything() {
        let (m, g, eig, spec) = setup();
        let mut d = make_initial_data(Shape::PolyBump, 1.0, 1.0, &g, &m).unwrap();
        for c in [&mut d.u0, &mut d.u1, &mut d.v0, &mut d.v1] {
            *c = Component::zero();
        }
        let rep = check_data_conditions(&d, &eig, &m, &spec).unwrap();
        assert!(rep.items.iter().all(|i| !i.pass));
    }
}
