//! Radial metrics `K(r)^2 dr^2 + r^2 dω^2` on `R^n` and their structural checks.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quadrature::integrate_decaying;

/// Shape of the radial factor `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MetricKind {
    Flat,
    /// `K(r) = 1 + delta <r>^{-rho}`.
    LongRange {
        delta: f64,
        rho: f64,
    },
    /// Linear interpolation through `(r_samples[i], k_samples[i])`.
    Tabulated {
        r_samples: Vec<f64>,
        k_samples: Vec<f64>,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricProfile {
    pub kind: MetricKind,
    pub delta0: f64,
    pub rho: f64,
    pub r_max: f64,
    // cumulative trapezoid of K at the tabulated knots
    #[serde(skip)]
    cumulative: Vec<f64>,
}

/// `<r> = sqrt(1 + r^2)`.
pub fn japanese(r: f64) -> f64 {
    (1.0 + r * r).sqrt()
}

impl MetricProfile {
    pub fn new(kind: MetricKind, delta0: f64, rho: f64, r_max: f64) -> Result<Self> {
        if !(delta0 > 0.0 && delta0 < 1.0) {
            return Err(domain(format!("delta0 = {delta0} must lie in (0, 1)")));
        }
        if !(rho > 0.0) {
            return Err(domain(format!("rho = {rho} must be positive")));
        }
        let mut r_max = r_max;
        let mut cumulative = Vec::new();
        match &kind {
            MetricKind::Flat => {}
            MetricKind::LongRange { delta, rho: decay } => {
                if !(*decay > 0.0) || !delta.is_finite() {
                    return Err(domain("long-range profile needs finite delta and rho > 0"));
                }
                if 1.0 + delta.min(0.0) <= 0.0 {
                    return Err(domain(format!("delta = {delta} makes K non-positive")));
                }
            }
            MetricKind::Tabulated {
                r_samples,
                k_samples,
            } => {
                if r_samples.len() < 2 || r_samples.len() != k_samples.len() {
                    return Err(domain(
                        "tabulated profile needs >= 2 matching (r, k) samples",
                    ));
                }
                if r_samples[0] != 0.0 {
                    return Err(domain("tabulated profile must start at r = 0"));
                }
                if r_samples.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(domain("tabulated radii must be strictly increasing"));
                }
                if k_samples.iter().any(|k| !(*k > 0.0) || !k.is_finite()) {
                    return Err(domain("tabulated K must be finite and positive"));
                }
                cumulative.push(0.0);
                for i in 1..r_samples.len() {
                    let h = r_samples[i] - r_samples[i - 1];
                    let prev = cumulative[i - 1];
                    cumulative.push(prev + 0.5 * h * (k_samples[i] + k_samples[i - 1]));
                }
                r_max = r_max.min(*r_samples.last().unwrap());
            }
        }
        if !(r_max > 0.0) {
            return Err(domain("r_max must be positive"));
        }
        Ok(Self {
            kind,
            delta0,
            rho,
            r_max,
            cumulative,
        })
    }

    pub fn flat(r_max: f64) -> Self {
        Self::new(MetricKind::Flat, 0.5, 1.0, r_max).expect("flat profile is always valid")
    }

    pub fn long_range(delta: f64, rho: f64, delta0: f64, r_max: f64) -> Result<Self> {
        Self::new(MetricKind::LongRange { delta, rho }, delta0, rho, r_max)
    }

    /// Loads a tabulated profile from a CSV with header `r,k`.
    pub fn from_csv(path: impl AsRef<Path>, delta0: f64, rho: f64) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            r: f64,
            k: f64,
        }
        let mut rdr = csv::Reader::from_path(path)?;
        let mut r_samples = Vec::new();
        let mut k_samples = Vec::new();
        for row in rdr.deserialize() {
            let row: Row = row?;
            r_samples.push(row.r);
            k_samples.push(row.k);
        }
        let r_max = r_samples.last().copied().unwrap_or(0.0);
        Self::new(
            MetricKind::Tabulated {
                r_samples,
                k_samples,
            },
            delta0,
            rho,
            r_max,
        )
    }

    /// Same profile with a different ellipticity constant.
    pub fn with_delta0(mut self, delta0: f64) -> Self {
        self.delta0 = delta0;
        self
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.kind, MetricKind::Flat)
    }

    fn check_r(&self, r: f64) -> Result<()> {
        if r >= 0.0 && r <= self.r_max * (1.0 + 1e-14) {
            Ok(())
        } else {
            Err(domain(format!("r = {r} outside [0, {}]", self.r_max)))
        }
    }

    /// `K(r)` with range checking.
    pub fn k_of_r(&self, r: f64) -> Result<f64> {
        self.check_r(r)?;
        Ok(self.k_at(r))
    }

    /// `K(r)` without range checking (tabulated profiles clamp to the end values).
    pub fn k_at(&self, r: f64) -> f64 {
        match &self.kind {
            MetricKind::Flat => 1.0,
            MetricKind::LongRange { delta, rho } => 1.0 + delta * (1.0 + r * r).powf(-0.5 * rho),
            MetricKind::Tabulated {
                r_samples,
                k_samples,
            } => {
                let (i, w) = locate(r_samples, r);
                k_samples[i] * (1.0 - w) + k_samples[i + 1] * w
            }
        }
    }

    /// `K'(r)`; for tabulated profiles the slope of the containing segment.
    pub fn k_prime(&self, r: f64) -> f64 {
        match &self.kind {
            MetricKind::Flat => 0.0,
            MetricKind::LongRange { delta, rho } => {
                -delta * rho * r * (1.0 + r * r).powf(-0.5 * rho - 1.0)
            }
            MetricKind::Tabulated {
                r_samples,
                k_samples,
            } => {
                let (i, _) = locate(r_samples, r);
                (k_samples[i + 1] - k_samples[i]) / (r_samples[i + 1] - r_samples[i])
            }
        }
    }

    /// Geodesic radius `∫_0^r K`.
    pub fn rtilde(&self, r: f64) -> Result<f64> {
        self.check_r(r)?;
        Ok(self.rtilde_at(r))
    }

    pub fn rtilde_at(&self, r: f64) -> f64 {
        match &self.kind {
            MetricKind::Flat => r,
            MetricKind::LongRange { delta, rho } => {
                if *rho == 1.0 {
                    r + delta * r.asinh()
                } else if *rho == 2.0 {
                    r + delta * r.atan()
                } else {
                    let rho = *rho;
                    r + delta * integrate_decaying(|t| (1.0 + t * t).powf(-0.5 * rho), r)
                }
            }
            MetricKind::Tabulated {
                r_samples,
                k_samples,
            } => {
                let (i, w) = locate(r_samples, r);
                let h = (r - r_samples[i]).max(0.0);
                let k_r = k_samples[i] * (1.0 - w) + k_samples[i + 1] * w;
                self.cumulative[i] + 0.5 * h * (k_samples[i] + k_r)
            }
        }
    }

    /// Solves `rtilde(r) = s` for `r`.
    pub fn rtilde_inverse(&self, s: f64) -> Result<f64> {
        let top = self.rtilde_at(self.r_max);
        if !(s >= 0.0 && s <= top * (1.0 + 1e-14)) {
            return Err(domain(format!("geodesic radius {s} outside [0, {top}]")));
        }
        if self.is_flat() {
            return Ok(s);
        }
        let (mut lo, mut hi) = (0.0, self.r_max);
        let mut r = (s / self.k_at(0.0)).clamp(lo, hi);
        for _ in 0..200 {
            let f = self.rtilde_at(r) - s;
            if f.abs() <= 1e-13 * (1.0 + s) {
                return Ok(r);
            }
            if f > 0.0 {
                hi = r;
            } else {
                lo = r;
            }
            let newton = r - f / self.k_at(r);
            r = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= 1e-15 * (1.0 + hi) {
                return Ok(r);
            }
        }
        Ok(r)
    }

    /// Radial volume density `K(r) r^{n-1}` (times `|S^{n-1}|` gives `dv_g`).
    pub fn volume_density(&self, r: f64, n: usize) -> f64 {
        self.k_at(r) * r.powi(n as i32 - 1)
    }
}

// index i with r_samples[i] <= r <= r_samples[i+1] and the weight of the right node
fn locate(xs: &[f64], r: f64) -> (usize, f64) {
    let last = xs.len() - 2;
    let i = match xs.partition_point(|&x| x <= r) {
        0 => 0,
        k => (k - 1).min(last),
    };
    let w = ((r - xs[i]) / (xs[i + 1] - xs[i])).clamp(0.0, 1.0);
    (i, w)
}

/// Uniform radial grid `r_i = i h`, `i = 0..len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub r_points: Vec<f64>,
    pub spacing: f64,
}

impl RadialGrid {
    /// Grid on `[0, r_end]` with `cells` equal cells.
    pub fn uniform(r_end: f64, cells: usize) -> Result<Self> {
        if !(r_end > 0.0) || cells == 0 {
            return Err(domain("grid needs r_end > 0 and at least one cell"));
        }
        let h = r_end / cells as f64;
        Ok(Self::from_spacing(h, cells + 1))
    }

    /// `len` points with spacing `h`.
    pub fn from_spacing(h: f64, len: usize) -> Self {
        Self {
            r_points: (0..len).map(|i| i as f64 * h).collect(),
            spacing: h,
        }
    }

    pub fn len(&self) -> usize {
        self.r_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r_points.is_empty()
    }

    pub fn r_end(&self) -> f64 {
        *self.r_points.last().unwrap_or(&0.0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EllipticityCheck {
    pub k_min: f64,
    pub k_max: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

/// Smallest `C` with `|∂^m (K-1)| <= C <r>^{-m-rho}` on the grid.
#[derive(Debug, Clone, Serialize)]
pub struct DecayBound {
    pub m: u32,
    pub constant: f64,
    /// Same constant restricted to the outer half of the grid.
    pub tail_constant: f64,
    /// Constant restricted to the inner half.
    pub inner_constant: f64,
    /// Decay holds when the weighted quantity does not grow toward the
    /// outer end: `tail <= 2 * inner` (or both vanish).
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuityCheck {
    /// `max |K_{i+1} - K_i| / h` over the grid.
    pub max_ratio: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub ellipticity: EllipticityCheck,
    pub decay: Vec<DecayBound>,
    pub continuity: ContinuityCheck,
    pub grid_within_range: bool,
    pub pass: bool,
}

impl ValidationReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(Error::from)
    }
}

/// Checks ellipticity, decay (m = 0, 1, 2) and continuity of `K` on `grid`.
pub fn validate_profile(profile: &MetricProfile, grid: &RadialGrid, tol: f64) -> ValidationReport {
    let in_range = grid.r_end() <= profile.r_max * (1.0 + 1e-14);
    let pts: Vec<f64> = grid
        .r_points
        .iter()
        .copied()
        .filter(|&r| r <= profile.r_max)
        .collect();
    let k: Vec<f64> = pts.iter().map(|&r| profile.k_at(r)).collect();
    let h = grid.spacing;

    let k_min = k.iter().copied().fold(f64::INFINITY, f64::min);
    let k_max = k.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lower = profile.delta0;
    let upper = 1.0 / profile.delta0;
    let ellipticity = EllipticityCheck {
        k_min,
        k_max,
        lower,
        upper,
        pass: k_min > lower && k_max < upper,
    };

    let half = pts.last().copied().unwrap_or(0.0) * 0.5;
    let mut decay = Vec::new();
    for m in 0..3u32 {
        let mut all: f64 = 0.0;
        let mut inner: f64 = 0.0;
        let mut tail: f64 = 0.0;
        let range = if m == 0 {
            0..pts.len()
        } else {
            1..pts.len().saturating_sub(1)
        };
        for i in range {
            let d = match m {
                0 => k[i] - 1.0,
                1 => (k[i + 1] - k[i - 1]) / (2.0 * h),
                _ => (k[i + 1] - 2.0 * k[i] + k[i - 1]) / (h * h),
            };
            let weighted = d.abs() * japanese(pts[i]).powf(m as f64 + profile.rho);
            all = all.max(weighted);
            if pts[i] <= half {
                inner = inner.max(weighted);
            } else {
                tail = tail.max(weighted);
            }
        }
        decay.push(DecayBound {
            m,
            constant: all,
            tail_constant: tail,
            inner_constant: inner,
            pass: all.is_finite() && tail <= 2.0 * inner + 1e-12,
        });
    }

    let max_ratio = k
        .windows(2)
        .map(|w| (w[1] - w[0]).abs() / h)
        .fold(0.0, f64::max);
    let continuity = ContinuityCheck {
        max_ratio,
        tol,
        pass: max_ratio <= tol,
    };

    let pass = in_range && ellipticity.pass && continuity.pass && decay.iter().all(|d| d.pass);
    ValidationReport {
        ellipticity,
        decay,
        continuity,
        grid_within_range: in_range,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn lr(delta: f64, rho: f64) -> MetricProfile {
        MetricProfile::long_range(delta, rho, 0.5, 1e4).unwrap()
    }

    #[test]
    fn k_examples() {
        assert_eq!(MetricProfile::flat(10.0).k_of_r(3.7).unwrap(), 1.0);
        assert_relative_eq!(lr(0.5, 1.0).k_of_r(0.0).unwrap(), 1.5);
        assert_relative_eq!(
            lr(0.1, 2.0).k_of_r(1.0).unwrap(),
            1.05,
            max_relative = 1e-15
        );
        assert!(lr(0.1, 2.0).k_of_r(2e4).is_err());
        assert!(lr(0.1, 2.0).k_of_r(-1.0).is_err());
    }

    #[test]
    fn k_prime_matches_difference_quotient() {
        let p = lr(0.3, 1.7);
        assert_eq!(p.k_prime(0.0), 0.0);
        for r in [0.4, 2.0, 30.0] {
            let h = 1e-5;
            let fd = (p.k_at(r + h) - p.k_at(r - h)) / (2.0 * h);
            assert_relative_eq!(p.k_prime(r), fd, epsilon = 1e-9);
        }
    }

    #[test]
    fn rtilde_examples() {
        assert_eq!(MetricProfile::flat(10.0).rtilde(2.5).unwrap(), 2.5);
        assert_relative_eq!(
            lr(0.1, 1.0).rtilde(1.0).unwrap(),
            1.0881373587019543,
            max_relative = 1e-12
        );
        assert_eq!(lr(0.1, 1.0).rtilde(0.0).unwrap(), 0.0);
    }

    #[test]
    fn rtilde_quadrature_matches_closed_forms() {
        // rho = 1 and 2 have closed forms; perturb rho slightly and compare
        // against the panel quadrature through continuity in rho.
        for r in [0.5, 3.0, 80.0, 5000.0] {
            let q = lr(0.2, 1.0 + 1e-9).rtilde(r).unwrap();
            assert_relative_eq!(
                q,
                lr(0.2, 1.0).rtilde(r).unwrap(),
                epsilon = 1e-10 * (1.0 + r)
            );
            let q = lr(0.2, 2.0 - 1e-9).rtilde(r).unwrap();
            assert_relative_eq!(
                q,
                lr(0.2, 2.0).rtilde(r).unwrap(),
                epsilon = 1e-10 * (1.0 + r)
            );
        }
    }

    #[test]
    fn rtilde_inverse_examples() {
        assert_eq!(MetricProfile::flat(10.0).rtilde_inverse(4.0).unwrap(), 4.0);
        let r = lr(0.1, 1.0).rtilde_inverse(1.0881374).unwrap();
        assert!((r - 1.0).abs() < 1e-7);
        assert_eq!(lr(0.1, 1.0).rtilde_inverse(0.0).unwrap(), 0.0);
        assert!(lr(0.1, 1.0).rtilde_inverse(1e6).is_err());
    }

    #[test]
    fn validation_examples() {
        let grid = RadialGrid::uniform(50.0, 500).unwrap();
        let flat = MetricProfile::new(MetricKind::Flat, 0.5, 1.0, 100.0).unwrap();
        let rep = validate_profile(&flat, &grid, 10.0);
        assert!(rep.pass);
        assert_eq!(rep.decay[0].constant, 0.0);

        let rep = validate_profile(&lr(0.5, 1.0).with_delta0(0.6), &grid, 10.0);
        assert!(rep.pass, "{rep:?}");
        assert_relative_eq!(rep.ellipticity.k_max, 1.5);

        let rep = validate_profile(&lr(2.0, 1.0), &grid, 10.0);
        assert!(!rep.ellipticity.pass);
        assert!(!rep.pass);
        assert_relative_eq!(rep.ellipticity.k_max, 3.0);
    }

    #[test]
    fn validation_flags_slow_decay() {
        // actual decay rate 0.5 but the profile claims rho = 2
        let grid = RadialGrid::uniform(200.0, 2000).unwrap();
        let slow = MetricProfile::new(
            MetricKind::LongRange {
                delta: 0.3,
                rho: 0.5,
            },
            0.5,
            2.0,
            1e3,
        )
        .unwrap();
        let rep = validate_profile(&slow, &grid, 10.0);
        assert!(!rep.decay[0].pass);
        let json = rep.to_json().unwrap();
        assert!(json.contains("\"ellipticity\""));
    }

    #[test]
    fn volume_density_examples() {
        assert_eq!(MetricProfile::flat(10.0).volume_density(2.0, 3), 4.0);
        assert_eq!(lr(0.5, 1.0).volume_density(0.0, 2), 0.0);
        assert_relative_eq!(
            lr(0.1, 2.0).volume_density(1.0, 3),
            1.05,
            max_relative = 1e-15
        );
    }

    #[test]
    fn tabulated_linear_profile() {
        let r: Vec<f64> = (0..=10).map(|i| i as f64).collect();
        let k: Vec<f64> = r.iter().map(|x| 1.0 + 0.01 * x).collect();
        let p = MetricProfile::new(
            MetricKind::Tabulated {
                r_samples: r,
                k_samples: k,
            },
            0.5,
            1.0,
            10.0,
        )
        .unwrap();
        assert_relative_eq!(p.k_of_r(2.5).unwrap(), 1.025, max_relative = 1e-15);
        // trapezoid is exact for linear K
        assert_relative_eq!(
            p.rtilde(7.3).unwrap(),
            7.3 + 0.005 * 7.3 * 7.3,
            max_relative = 1e-14
        );
        assert_relative_eq!(p.k_prime(4.2), 0.01, max_relative = 1e-12);
        let back = p.rtilde_inverse(p.rtilde_at(6.1)).unwrap();
        assert_relative_eq!(back, 6.1, epsilon = 1e-10);
        assert!(p.k_of_r(10.5).is_err());
    }

    #[test]
    fn tabulated_rejects_bad_samples() {
        let bad = MetricKind::Tabulated {
            r_samples: vec![0.0, 1.0, 1.0],
            k_samples: vec![1.0, 1.0, 1.0],
        };
        assert!(MetricProfile::new(bad, 0.5, 1.0, 1.0).is_err());
        assert!(MetricProfile::new(MetricKind::Flat, 1.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = std::env::temp_dir().join(format!("metric-csv-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("k.csv");
        std::fs::write(&path, "r,k\n0,1.2\n1,1.1\n2,1.0\n").unwrap();
        let p = MetricProfile::from_csv(&path, 0.5, 1.0).unwrap();
        assert_eq!(p.r_max, 2.0);
        assert_relative_eq!(p.k_at(0.5), 1.15, max_relative = 1e-15);
        std::fs::remove_dir_all(&dir).ok();
    }

    fn profile_strategy() -> impl Strategy<Value = MetricProfile> {
        (0.0f64..0.8, 0.3f64..3.0).prop_map(|(delta, rho)| {
            MetricProfile::long_range(delta, rho, 1.0 / (1.0 + delta) - 0.05, 500.0).unwrap()
        })
    }

    proptest! {
        #[test]
        fn rtilde_monotone_and_sandwiched(p in profile_strategy(), a in 0.0f64..400.0, b in 0.0f64..400.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-9);
            let (ra, rb) = (p.rtilde_at(lo), p.rtilde_at(hi));
            prop_assert!(rb > ra);
            prop_assert!(p.delta0 * hi <= rb && rb <= hi / p.delta0);
        }

        #[test]
        fn inverse_is_identity(p in profile_strategy(), r in 0.0f64..450.0) {
            let back = p.rtilde_inverse(p.rtilde_at(r)).unwrap();
            prop_assert!((back - r).abs() <= 1e-8 * (1.0 + r));
        }
    }
}
