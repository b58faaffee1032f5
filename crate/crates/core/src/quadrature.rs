//! Small quadrature helpers shared by the metric, eigenfunction and wave modules.

use std::f64::consts::PI;

/// Surface measure of the unit sphere `S^{n-1}` in `R^n`.
pub fn unit_sphere_area(n: usize) -> f64 {
    assert!(n >= 1, "dimension must be positive");
    // |S^0| = 2, |S^1| = 2π, |S^{k}| = 2π/(k-1) |S^{k-2}|
    let mut area = if n % 2 == 1 { 2.0 } else { 2.0 * PI };
    let mut k = if n % 2 == 1 { 1 } else { 2 };
    while k < n {
        k += 2;
        area *= 2.0 * PI / (k as f64 - 2.0);
    }
    area
}

// 8-point Gauss-Legendre nodes/weights on [-1, 1].
const GL8_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_W: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// 8-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre8(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL8_X.iter().zip(GL8_W.iter()) {
        acc += w * (f(mid - half * x) + f(mid + half * x));
    }
    acc * half
}

/// Integral of a smooth, slowly decaying integrand over `[0, r]`.
///
/// Uses unit panels on `[0, 1]` and geometrically growing panels beyond, each
/// split in `sub` Gauss-Legendre cells.
pub fn integrate_decaying(f: impl Fn(f64) -> f64, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let sub = 4;
    let mut acc = 0.0;
    let mut a = 0.0;
    let mut b = r.min(1.0);
    loop {
        let step = (b - a) / sub as f64;
        for k in 0..sub {
            let lo = a + step * k as f64;
            acc += gauss_legendre8(&f, lo, lo + step);
        }
        if b >= r {
            break;
        }
        a = b;
        b = (2.0 * b).min(r);
    }
    acc
}

/// Numerically stable accumulator for `Σ exp(log_terms)`.
#[derive(Debug, Clone, Copy)]
pub struct LogSum {
    max: f64,
    scaled: f64,
}

impl Default for LogSum {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }
}

impl LogSum {
    /// Adds `weight * exp(log_value)` with `weight >= 0`.
    pub fn add(&mut self, weight: f64, log_value: f64) {
        if weight <= 0.0 || log_value == f64::NEG_INFINITY {
            return;
        }
        let term = weight.ln() + log_value;
        if term > self.max {
            self.scaled = self.scaled * (self.max - term).exp() + 1.0;
            self.max = term;
        } else {
            self.scaled += (term - self.max).exp();
        }
    }

    pub fn ln(&self) -> f64 {
        if self.scaled == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }

    pub fn value(&self) -> f64 {
        self.ln().exp()
    }
}
