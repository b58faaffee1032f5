//! Adaptive Dormand-Prince 5(4) integrator with an observer hook.
//!
//! The observer is called after every accepted step and may stop the
//! integration; this is how blow-up thresholds are detected.

/// Right-hand side of a first-order system `y' = f(t, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]);
}

impl<F: Fn(f64, &[f64], &mut [f64])> OdeSystem for (usize, F) {
    fn dim(&self) -> usize {
        self.0
    }
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        (self.1)(t, y, dy)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-30,
        }
    }
}

/// Why an integration call returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Reached the requested end time.
    Reached,
    /// The observer asked to stop.
    Stopped,
    /// The step size collapsed below the representable resolution at `t`.
    StepUnderflow,
    /// A non-finite value appeared in the state.
    NonFinite,
    /// The step budget ran out.
    MaxSteps,
}

#[derive(Debug, Clone)]
pub struct Integration {
    pub t: f64,
    pub y: Vec<f64>,
    pub termination: Termination,
    pub accepted: usize,
    pub rejected: usize,
    /// Step size proposed for the next step.
    pub next_h: f64,
}

// Dormand-Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b* (fifth minus fourth order weights)
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone)]
pub struct DormandPrince {
    pub tol: Tolerances,
    pub max_steps: usize,
    /// Upper bound on |h|; `f64::INFINITY` disables it.
    pub h_max: f64,
}

impl Default for DormandPrince {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            max_steps: 5_000_000,
            h_max: f64::INFINITY,
        }
    }
}

impl DormandPrince {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            tol: Tolerances { rtol, atol },
            ..Self::default()
        }
    }

    /// Integrates from `t0` to `t_end` (> t0). `h0` is the initial step
    /// (pass 0 to let the integrator choose). The observer sees every
    /// accepted `(t, y)` and returns `false` to stop.
    pub fn integrate<S, O>(
        &self,
        sys: &S,
        t0: f64,
        y0: &[f64],
        t_end: f64,
        h0: f64,
        mut observer: O,
    ) -> Integration
    where
        S: OdeSystem + ?Sized,
        O: FnMut(f64, &[f64]) -> bool,
    {
        let n = sys.dim();
        assert_eq!(y0.len(), n);
        let mut t = t0;
        let mut y = y0.to_vec();
        let mut k1 = vec![0.0; n];
        let mut k2 = vec![0.0; n];
        let mut k3 = vec![0.0; n];
        let mut k4 = vec![0.0; n];
        let mut k5 = vec![0.0; n];
        let mut k6 = vec![0.0; n];
        let mut k7 = vec![0.0; n];
        let mut tmp = vec![0.0; n];
        let mut y_new = vec![0.0; n];

        sys.rhs(t, &y, &mut k1);
        let span = t_end - t0;
        let mut h = if h0 > 0.0 {
            h0
        } else {
            self.initial_step(sys, t, &y, &k1, span)
        };
        h = h.min(self.h_max).min(span);
        let mut accepted = 0;
        let mut rejected = 0;

        let result = |t, y, termination, accepted, rejected, next_h| Integration {
            t,
            y,
            termination,
            accepted,
            rejected,
            next_h,
        };

        if span <= 0.0 {
            return result(t, y, Termination::Reached, 0, 0, h);
        }

        loop {
            if accepted + rejected >= self.max_steps {
                return result(t, y, Termination::MaxSteps, accepted, rejected, h);
            }
            let remaining = t_end - t;
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            if h <= f64::EPSILON * 4.0 * t.abs().max(1e-300) {
                return result(t, y, Termination::StepUnderflow, accepted, rejected, h);
            }

            for i in 0..n {
                tmp[i] = y[i] + h * A21 * k1[i];
            }
            sys.rhs(t + C2 * h, &tmp, &mut k2);
            for i in 0..n {
                tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            sys.rhs(t + C3 * h, &tmp, &mut k3);
            for i in 0..n {
                tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            sys.rhs(t + C4 * h, &tmp, &mut k4);
            for i in 0..n {
                tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            sys.rhs(t + C5 * h, &tmp, &mut k5);
            for i in 0..n {
                tmp[i] = y[i]
                    + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            sys.rhs(t + h, &tmp, &mut k6);
            for i in 0..n {
                y_new[i] =
                    y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
            }
            let t_new = if last { t_end } else { t + h };
            sys.rhs(t_new, &y_new, &mut k7);

            let mut err = 0.0;
            let mut finite = true;
            for i in 0..n {
                if !y_new[i].is_finite() || !k7[i].is_finite() {
                    finite = false;
                    break;
                }
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.tol.atol + self.tol.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / sc).powi(2);
            }

            if !finite {
                // shrink hard; if the step cannot shrink any more this is a singularity
                rejected += 1;
                h *= 0.1;
                if h <= f64::EPSILON * 4.0 * t.abs().max(1e-300) {
                    return result(t, y, Termination::NonFinite, accepted, rejected, h);
                }
                continue;
            }

            let err = (err / n as f64).sqrt();
            if err <= 1.0 {
                t = t_new;
                std::mem::swap(&mut y, &mut y_new);
                std::mem::swap(&mut k1, &mut k7);
                accepted += 1;
                let factor = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                let proposed = (h * factor).min(self.h_max);
                if !observer(t, &y) {
                    return result(t, y, Termination::Stopped, accepted, rejected, proposed);
                }
                if last {
                    return result(t, y, Termination::Reached, accepted, rejected, proposed);
                }
                h = proposed;
            } else {
                rejected += 1;
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            }
        }
    }

    fn initial_step<S: OdeSystem + ?Sized>(
        &self,
        sys: &S,
        t: f64,
        y: &[f64],
        f0: &[f64],
        span: f64,
    ) -> f64 {
        let n = y.len();
        let sc: Vec<f64> = y
            .iter()
            .map(|v| self.tol.atol + self.tol.rtol * v.abs())
            .collect();
        let d0 = rms(y.iter().zip(&sc).map(|(v, s)| v / s), n);
        let d1 = rms(f0.iter().zip(&sc).map(|(v, s)| v / s), n);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6 * span.max(1e-6)
        } else {
            0.01 * d0 / d1
        };
        let y1: Vec<f64> = y.iter().zip(f0).map(|(v, f)| v + h0 * f).collect();
        let mut f1 = vec![0.0; n];
        sys.rhs(t + h0, &y1, &mut f1);
        let d2 = rms(f1.iter().zip(f0).zip(&sc).map(|((a, b), s)| (a - b) / s), n) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span)
    }
}

fn rms(it: impl Iterator<Item = f64>, n: usize) -> f64 {
    (it.map(|v| v * v).sum::<f64>() / n as f64).sqrt()
}
