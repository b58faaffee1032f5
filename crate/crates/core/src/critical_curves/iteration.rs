//! Lower-bound iterations `F >= A_j (t+1)^{a_j}`, `G >= B_j (t+1)^{b_j}`.
//!
//! Coefficients are carried as logarithms. Each trace tracks one coefficient
//! sequence `X_j` obeying `X_j >= M X_{j-1}^{pq} / (pq)^{j w}`, which gives
//! `ln X_j >= (pq)^{j-1} (ln X_1 - S)` with `S = Σ_k ((k+1) w ln(pq) + |ln M|)/(pq)^k`.

use serde::Serialize;

use crate::error::{domain, Error, Result};

/// Which coefficient sequence the key inequality is stated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tracked {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesSum {
    pub partial: f64,
    /// Exact remainder of the geometric tail after the partial sum.
    pub tail: f64,
    pub terms: usize,
}

impl SeriesSum {
    pub fn total(&self) -> f64 {
        self.partial + self.tail
    }
}

/// `Σ_{k=1}^{K} ((k+1) w ln(pq) + |ln M|)/(pq)^k` and the remainder `Σ_{k>K}`.
pub fn series_s_inf(
    p: f64,
    q: f64,
    weight: f64,
    m_const: f64,
    k_terms: usize,
) -> Result<SeriesSum> {
    let pq = p * q;
    if !(pq > 1.0) {
        return Err(domain("series needs pq > 1"));
    }
    if !(m_const > 0.0) {
        return Err(domain("M must be positive"));
    }
    let l = pq.ln();
    let lm = m_const.ln().abs();
    let x = 1.0 / pq;
    let mut partial = 0.0;
    let mut xk = 1.0;
    for k in 1..=k_terms {
        xk *= x;
        partial += ((k as f64 + 1.0) * weight * l + lm) * xk;
    }
    // Σ_{k>K} (k+1) x^k = x^{K+1}((K+2)/(1-x) + x/(1-x)^2)
    let xk1 = xk * x;
    let kk = k_terms as f64;
    let tail =
        weight * l * xk1 * ((kk + 2.0) / (1.0 - x) + x / (1.0 - x).powi(2)) + lm * xk1 / (1.0 - x);
    Ok(SeriesSum {
        partial,
        tail,
        terms: k_terms,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationTrace {
    pub label: &'static str,
    /// True when `(p, c0)` and `(q, c1)` were exchanged to follow the larger
    /// branch of the curve; then `a, A` describe the second component.
    pub swapped: bool,
    pub p: f64,
    pub q: f64,
    pub n: usize,
    pub eps: f64,
    /// Value of the curve branch driving the iteration.
    pub gamma_branch: f64,
    /// `a[j-1] = a_j`; NaN where the recursion has no such term.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// `ln A_j`, `ln B_j`.
    pub ln_a: Vec<f64>,
    pub ln_b: Vec<f64>,
    pub tracked: Tracked,
    /// Closed form of the tracked exponent sequence (`a` when tracking `A`).
    pub closed_form: Vec<f64>,
    pub closed_form_max_rel_err: f64,
    pub weight: f64,
    pub m_const: f64,
    pub series: SeriesSum,
    /// `ln X_j >= (pq)^{j-1}(ln X_1 - S)` per computed `j`.
    pub key_inequality: Vec<bool>,
    /// First index from which all later `a_j, b_j >= 2` within the trace.
    pub n0: Option<usize>,
    /// Small-data conditions per `j`.
    pub admissible: Vec<bool>,
}

impl IterationTrace {
    pub fn tracked_exponents(&self) -> &[f64] {
        match self.tracked {
            Tracked::A => &self.a,
            Tracked::B => &self.b,
        }
    }

    pub fn key_inequality_holds(&self) -> bool {
        self.key_inequality.iter().all(|b| *b)
    }

    /// Strictly increasing exponents from `n0` on.
    pub fn increasing_past_n0(&self) -> bool {
        let Some(n0) = self.n0 else { return false };
        let inc = |v: &[f64]| v[n0 - 1..].windows(2).all(|w| w[0].is_nan() || w[1] > w[0]);
        inc(&self.a) && inc(&self.b)
    }

    pub fn all_admissible(&self) -> bool {
        self.admissible.iter().all(|b| *b)
    }
}

const SERIES_TERMS: usize = 80;

struct Raw {
    a: Vec<f64>,
    b: Vec<f64>,
    ln_a: Vec<f64>,
    ln_b: Vec<f64>,
}

impl Raw {
    fn with_capacity(j: usize) -> Self {
        Self {
            a: Vec::with_capacity(j),
            b: Vec::with_capacity(j),
            ln_a: Vec::with_capacity(j),
            ln_b: Vec::with_capacity(j),
        }
    }
}

fn positive(x: f64, what: &str, j: usize) -> Result<f64> {
    if x > 0.0 {
        Ok(x.ln())
    } else {
        Err(Error::Iteration(format!(
            "non-positive denominator {what} = {x} at j = {j}"
        )))
    }
}

fn check_args(eps: f64, c0: f64, c1: f64, j_max: usize) -> Result<()> {
    if !(eps > 0.0) || !(c0 > 0.0) || !(c1 > 0.0) {
        return Err(domain("eps, c0, c1 must be positive"));
    }
    if j_max == 0 {
        return Err(domain("need at least one iteration"));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn finish(
    label: &'static str,
    swapped: bool,
    (p, q, n, eps): (f64, f64, usize, f64),
    gamma_branch: f64,
    raw: Raw,
    tracked: Tracked,
    closed_form: Vec<f64>,
    weight: f64,
    m_const: f64,
    admissible: impl Fn(usize, &Raw) -> bool,
) -> Result<IterationTrace> {
    let seq = match tracked {
        Tracked::A => &raw.a,
        Tracked::B => &raw.b,
    };
    let closed_form_max_rel_err = seq
        .iter()
        .zip(&closed_form)
        .filter(|(x, _)| !x.is_nan())
        .map(|(x, c)| (x - c).abs() / c.abs().max(1e-300).max(x.abs()).max(1.0))
        .fold(0.0, f64::max);

    let series = series_s_inf(p, q, weight, m_const, SERIES_TERMS)?;
    let s = series.total();
    let logs = match tracked {
        Tracked::A => &raw.ln_a,
        Tracked::B => &raw.ln_b,
    };
    let pq = p * q;
    let base = logs[0];
    let key_inequality = logs
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let rhs = pq.powi(i as i32) * (base - s);
            *l >= rhs - 1e-9 * rhs.abs()
        })
        .collect();

    let len = raw.a.len();
    let big = |i: usize| {
        let ok = |v: f64| v.is_nan() || v >= 2.0;
        ok(raw.a[i]) && ok(raw.b[i])
    };
    let mut n0 = None;
    for start in 0..len {
        if (start..len).all(big) {
            n0 = Some(start + 1);
            break;
        }
    }
    let admissible = (0..len).map(|i| admissible(i, &raw)).collect();

    Ok(IterationTrace {
        label,
        swapped,
        p,
        q,
        n,
        eps,
        gamma_branch,
        a: raw.a,
        b: raw.b,
        ln_a: raw.ln_a,
        ln_b: raw.ln_b,
        tracked,
        closed_form,
        closed_form_max_rel_err,
        weight,
        m_const,
        series,
        key_inequality,
        n0,
        admissible,
    })
}

// (a+1)A <= eps and (b+1)B <= eps, skipping absent terms
fn small_data(eps: f64) -> impl Fn(usize, &Raw) -> bool {
    move |i, r: &Raw| {
        let ok = |x: f64, lx: f64| x.is_nan() || (x + 1.0).ln() + lx <= eps.ln();
        ok(r.a[i], r.ln_a[i]) && ok(r.b[i], r.ln_b[i])
    }
}

/// Closed form `b_j = Γ (pq)^j + n - (2q+2)/(pq-1)` of the SS recursion,
/// `Γ = (q+2+1/p)/(pq-1) - (n-1)/2`.
pub fn closed_form_b(p: f64, q: f64, n: usize, j: usize) -> f64 {
    let pq1 = p * q - 1.0;
    let g = (q + 2.0 + 1.0 / p) / pq1 - 0.5 * (n as f64 - 1.0);
    g * (p * q).powi(j as i32) + n as f64 - (2.0 * q + 2.0) / pq1
}

/// SS iteration with seed `A_1 = ε^p`, `a_1 = n+1-(n-1)p/2`:
/// `b_j = q a_j - n(q-1) + 2`, `B_j = c1 A_j^q / ((b_j-1) b_j)`,
/// `a_j = p b_{j-1} - n(p-1) + 2`, `A_j = c0 B_{j-1}^p / ((a_j-1) a_j)`.
/// If `p > q` the roles are swapped so the larger branch drives it.
pub fn iterate_ss(
    p: f64,
    q: f64,
    n: usize,
    eps: f64,
    c0: f64,
    c1: f64,
    j_max: usize,
) -> Result<IterationTrace> {
    check_args(eps, c0, c1, j_max)?;
    let swapped = p > q;
    let (p, q, c0, c1) = if swapped {
        (q, p, c1, c0)
    } else {
        (p, q, c0, c1)
    };
    let nf = n as f64;
    let pq1 = p * q - 1.0;
    let gamma = (q + 2.0 + 1.0 / p) / pq1 - 0.5 * (nf - 1.0);
    if !(gamma > 0.0) {
        return Err(domain(format!("SS branch value {gamma} is not positive")));
    }
    let mut raw = Raw::with_capacity(j_max);
    let mut a = nf + 1.0 - 0.5 * (nf - 1.0) * p;
    let mut ln_a = p * eps.ln();
    for j in 1..=j_max {
        if j > 1 {
            let b_prev = raw.b[j - 2];
            a = p * b_prev - nf * (p - 1.0) + 2.0;
            ln_a = c0.ln() + p * raw.ln_b[j - 2] - positive((a - 1.0) * a, "(a-1)a", j)?;
        }
        let b = q * a - nf * (q - 1.0) + 2.0;
        let ln_b = c1.ln() + q * ln_a - positive((b - 1.0) * b, "(b-1)b", j)?;
        raw.a.push(a);
        raw.ln_a.push(ln_a);
        raw.b.push(b);
        raw.ln_b.push(ln_b);
    }
    let closed = (1..=j_max).map(|j| closed_form_b(p, q, n, j)).collect();
    let d = 2.0 + (nf + 1.0) * p / 2.0 + (1.0 + p * q + 2.0 * p) / pq1;
    let w = 2.0 * q + 2.0;
    let m = c1 * c0.powf(q) * d.powf(-w);
    finish(
        "ss",
        swapped,
        (p, q, n, eps),
        gamma,
        raw,
        Tracked::B,
        closed,
        w,
        m,
        small_data(eps),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum GgVariant {
    /// Equal speeds.
    SameSpeed,
    /// Distinct speeds after the exponential-weight reduction, with the
    /// constant `c2` of the reduced system.
    DistinctSpeeds { c2: f64 },
}

/// GG iterations.
///
/// Equal speeds: `b_1 = 1-(n-1)(q-1)/2`, `B_1 = c1 (c0 ε)^q / b_1`,
/// `a_j = 1 + p b_j - (n-1)(p-1)/2`, `A_j = c0 B_j^p / a_j`,
/// `b_{j+1} = 1 + q a_j - (n-1)(q-1)/2`, `B_{j+1} = c1 A_j^q / b_{j+1}`.
///
/// Distinct speeds: `A_1 = c2 ε`, `a_1 = 0`,
/// `b_j = 1 + q a_j - (n-1)(q-1)/2`, `B_j = c1 A_j^q / b_j`,
/// `a_{j+1} = p b_j - (n-1)(p-1)/2`, `A_{j+1} = c2 B_j^p`.
///
/// Roles are swapped when `q > p`.
#[allow(clippy::too_many_arguments)]
pub fn iterate_gg(
    p: f64,
    q: f64,
    n: usize,
    variant: GgVariant,
    eps: f64,
    c0: f64,
    c1: f64,
    j_max: usize,
) -> Result<IterationTrace> {
    check_args(eps, c0, c1, j_max)?;
    let swapped = q > p;
    let (p, q, c0, c1) = if swapped {
        (q, p, c1, c0)
    } else {
        (p, q, c0, c1)
    };
    let nf = n as f64;
    let h = 0.5 * (nf - 1.0);
    let pq = p * q;
    let kp = h * (p - 1.0);
    let kq = h * (q - 1.0);
    let mut raw = Raw::with_capacity(j_max);
    match variant {
        GgVariant::SameSpeed => {
            let gamma = (p + 1.0) / (pq - 1.0) - h;
            if !(gamma > 0.0) {
                return Err(domain(format!("GG branch value {gamma} is not positive")));
            }
            let mut b = 1.0 - kq;
            let mut ln_b = c1.ln() + q * (c0 * eps).ln() - positive(b, "b_1", 1)?;
            for j in 1..=j_max {
                if j > 1 {
                    b = 1.0 + q * raw.a[j - 2] - kq;
                    ln_b = c1.ln() + q * raw.ln_a[j - 2] - positive(b, "b", j)?;
                }
                let a = 1.0 + p * b - kp;
                let ln_a = c0.ln() + p * ln_b - positive(a, "a", j)?;
                raw.a.push(a);
                raw.ln_a.push(ln_a);
                raw.b.push(b);
                raw.ln_b.push(ln_b);
            }
            let closed = (1..=j_max)
                .map(|j| gamma * (pq.powi(j as i32) - 1.0))
                .collect();
            let w = p + 1.0;
            let m = c0 * c1.powf(p) * (q * gamma + 1.0).powf(-w);
            let (lc0, lc1, le) = (c0.ln(), c1.ln(), eps.ln());
            finish(
                "gg_same_speed",
                swapped,
                (p, q, n, eps),
                gamma,
                raw,
                Tracked::A,
                closed,
                w,
                m,
                move |i, r: &Raw| r.ln_a[i] <= lc0 + le && r.ln_b[i] <= lc1 + le,
            )
        }
        GgVariant::DistinctSpeeds { c2 } => {
            if !(c2 > 0.0) {
                return Err(domain("c2 must be positive"));
            }
            let gamma = p / (pq - 1.0) - h;
            if !(gamma > 0.0) {
                return Err(domain(format!("GG* branch value {gamma} is not positive")));
            }
            let mut a = 0.0;
            let mut ln_a = (c2 * eps).ln();
            for j in 1..=j_max {
                if j > 1 {
                    a = p * raw.b[j - 2] - kp;
                    ln_a = c2.ln() + p * raw.ln_b[j - 2];
                }
                let b = 1.0 + q * a - kq;
                let ln_b = c1.ln() + q * ln_a - positive(b, "b", j)?;
                raw.a.push(a);
                raw.ln_a.push(ln_a);
                raw.b.push(b);
                raw.ln_b.push(ln_b);
            }
            let closed = (1..=j_max)
                .map(|j| gamma * (pq.powi(j as i32 - 1) - 1.0))
                .collect();
            let w = p;
            let m = c1.powf(p) * c2 * (gamma + 1.0).powf(-p);
            let (lc2, lc1, le) = (c2.ln(), c1.ln(), eps.ln());
            finish(
                "gg_distinct_speeds",
                swapped,
                (p, q, n, eps),
                gamma,
                raw,
                Tracked::A,
                closed,
                w,
                m,
                move |i, r: &Raw| r.ln_a[i] <= lc2 + le && r.ln_b[i] <= lc1 + le,
            )
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SgBranch {
    /// Pick the branch with the larger curve value.
    Auto,
    /// `(p+1+1/q)/(pq-1)` branch, seeded from `B_1 = ε^q`.
    SecondComponent,
    /// `(2+1/p)/(pq-1)` branch, seeded from `A_1 = ε^p`.
    FirstComponent,
}

/// SG iterations.
///
/// Second-component seed `B_1 = ε^q`, `b_1 = n+1-(n-1)q/2`:
/// `a_j = p b_{j-1} - n(p-1) + 1`, `A_j = c0 B_{j-1}^p / a_j`,
/// `b_j = q a_j - n(q-1) + 2`, `B_j = c1 A_j^q / ((b_j-1) b_j)`.
///
/// First-component seed `A_1 = ε^p`, `a_1 = n-(n-1)p/2`:
/// `b_j = q a_{j-1} - n(q-1) + 2`, `B_j = c1 A_{j-1}^q / ((b_j-1) b_j)`,
/// `a_j = p b_j - n(p-1) + 1`, `A_j = c0 B_j^p / a_j`.
#[allow(clippy::too_many_arguments)]
pub fn iterate_sg(
    p: f64,
    q: f64,
    n: usize,
    branch: SgBranch,
    eps: f64,
    c0: f64,
    c1: f64,
    j_max: usize,
) -> Result<IterationTrace> {
    check_args(eps, c0, c1, j_max)?;
    let nf = n as f64;
    let h = 0.5 * (nf - 1.0);
    let pq1 = p * q - 1.0;
    let g_second = (p + 1.0 + 1.0 / q) / pq1 - h;
    let g_first = (2.0 + 1.0 / p) / pq1 - h;
    let branch = match branch {
        SgBranch::Auto if g_second >= g_first => SgBranch::SecondComponent,
        SgBranch::Auto => SgBranch::FirstComponent,
        b => b,
    };
    let mut raw = Raw::with_capacity(j_max);
    match branch {
        SgBranch::SecondComponent | SgBranch::Auto => {
            if !(g_second > 0.0) {
                return Err(domain(format!(
                    "SG branch value {g_second} is not positive"
                )));
            }
            let mut b = nf + 1.0 - h * q;
            let mut ln_b = q * eps.ln();
            for j in 1..=j_max {
                let (a, ln_a) = if j > 1 {
                    let a = p * raw.b[j - 2] - nf * (p - 1.0) + 1.0;
                    let ln_a = c0.ln() + p * raw.ln_b[j - 2] - positive(a, "a", j)?;
                    b = q * a - nf * (q - 1.0) + 2.0;
                    ln_b = c1.ln() + q * ln_a - positive((b - 1.0) * b, "(b-1)b", j)?;
                    (a, ln_a)
                } else {
                    (f64::NAN, f64::NAN)
                };
                raw.a.push(a);
                raw.ln_a.push(ln_a);
                raw.b.push(b);
                raw.ln_b.push(ln_b);
            }
            let closed = (1..=j_max)
                .map(|j| g_second * q * (pq1 + 1.0).powi(j as i32 - 1) + nf - (q + 2.0) / pq1)
                .collect();
            let w = q + 2.0;
            let m = c1 * c0.powf(q) * (g_second + (q + 2.0) / pq1 + nf + 1.0).powf(-w);
            finish(
                "sg_second_component",
                false,
                (p, q, n, eps),
                g_second,
                raw,
                Tracked::B,
                closed,
                w,
                m,
                small_data(eps),
            )
        }
        SgBranch::FirstComponent => {
            if !(g_first > 0.0) {
                return Err(domain(format!("SG branch value {g_first} is not positive")));
            }
            let mut a = nf - h * p;
            let mut ln_a = p * eps.ln();
            for j in 1..=j_max {
                let (b, ln_b) = if j > 1 {
                    let b = q * raw.a[j - 2] - nf * (q - 1.0) + 2.0;
                    let ln_b =
                        c1.ln() + q * raw.ln_a[j - 2] - positive((b - 1.0) * b, "(b-1)b", j)?;
                    a = p * b - nf * (p - 1.0) + 1.0;
                    ln_a = c0.ln() + p * ln_b - positive(a, "a", j)?;
                    (b, ln_b)
                } else {
                    (f64::NAN, f64::NAN)
                };
                raw.a.push(a);
                raw.ln_a.push(ln_a);
                raw.b.push(b);
                raw.ln_b.push(ln_b);
            }
            let closed = (1..=j_max)
                .map(|j| g_first * p * (pq1 + 1.0).powi(j as i32 - 1) + nf - (2.0 * p + 1.0) / pq1)
                .collect();
            let w = 2.0 * p + 1.0;
            let m = c0 * c1.powf(p) * (p * g_first + nf + 2.0).powf(-w);
            finish(
                "sg_first_component",
                false,
                (p, q, n, eps),
                g_first,
                raw,
                Tracked::A,
                closed,
                w,
                m,
                small_data(eps),
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn ss_hand_unrolled() {
        let t = iterate_ss(2.0, 2.0, 3, 1e-3, 1.0, 1.0, 3).unwrap();
        let seq: Vec<f64> = t.a.iter().zip(&t.b).flat_map(|(a, b)| [*a, *b]).collect();
        assert_eq!(seq, vec![2.0, 3.0, 5.0, 9.0, 17.0, 33.0]);
        for j in 1..=3 {
            assert_eq!(
                closed_form_b(2.0, 2.0, 3, j),
                0.5 * 4f64.powi(j as i32) + 1.0
            );
        }
        assert_eq!(closed_form_b(2.0, 2.0, 3, 1), 3.0);
        assert_eq!(closed_form_b(2.0, 2.0, 3, 2), 9.0);
        assert_eq!(closed_form_b(2.0, 2.0, 3, 3), 33.0);
        assert_relative_eq!(t.m_const, 9f64.powi(-6), max_relative = 1e-14);
    }

    #[test]
    fn gg_hand_unrolled() {
        let t = iterate_gg(2.0, 2.0, 2, GgVariant::SameSpeed, 1e-3, 1.0, 1.0, 2).unwrap();
        assert_eq!((t.b[0], t.a[0], t.b[1], t.a[1]), (0.5, 1.5, 3.5, 7.5));
        let t = iterate_gg(
            2.0,
            2.0,
            2,
            GgVariant::DistinctSpeeds { c2: 1.0 },
            1e-3,
            1.0,
            1.0,
            3,
        )
        .unwrap();
        assert_eq!(
            (t.a[0], t.b[0], t.a[1], t.b[1], t.a[2]),
            (0.0, 0.5, 0.5, 1.5, 2.5)
        );
        for j in 0..3 {
            assert_abs_diff_eq!(
                t.closed_form[j],
                (4f64.powi(j as i32) - 1.0) / 6.0,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn sg_hand_unrolled() {
        let t = iterate_sg(2.0, 2.0, 3, SgBranch::Auto, 1e-3, 1.0, 1.0, 3).unwrap();
        assert_eq!(t.label, "sg_second_component");
        assert_eq!(
            (t.b[0], t.a[1], t.b[1], t.a[2], t.b[2]),
            (2.0, 2.0, 3.0, 4.0, 7.0)
        );
        assert!(t.a[0].is_nan());
        for (j, expect) in [2.0, 3.0, 7.0].iter().enumerate() {
            assert_abs_diff_eq!(t.closed_form[j], *expect, epsilon = 1e-14);
        }
        let seed = iterate_sg(2.0, 2.0, 3, SgBranch::Auto, 1e-3, 1.0, 1.0, 1).unwrap();
        assert_eq!(seed.b.len(), 1);
        assert_abs_diff_eq!(seed.ln_b[0], 2.0 * 1e-3f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn series_examples() {
        let m = 9f64.powi(-6);
        let s = series_s_inf(2.0, 2.0, 6.0, m, 200).unwrap();
        let oracle = 6.0 * 4f64.ln() * 7.0 / 9.0 + 6.0 * 9f64.ln() / 3.0;
        assert_abs_diff_eq!(s.total(), oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(s.total(), 10.8638, epsilon = 1e-3);
        let s20 = series_s_inf(2.0, 2.0, 6.0, m, 20).unwrap();
        assert!(s20.tail < 1e-9);
        assert_abs_diff_eq!(s20.total(), oracle, epsilon = 1e-12);
        let m1 = series_s_inf(2.0, 2.0, 6.0, 1.0, 200).unwrap();
        assert_abs_diff_eq!(m1.total(), 6.0 * 4f64.ln() * 7.0 / 9.0, epsilon = 1e-12);
    }

    #[test]
    fn non_positive_branch_rejected() {
        assert!(iterate_ss(3.0, 3.0, 3, 1e-3, 1.0, 1.0, 5).is_err());
        assert!(iterate_gg(2.0, 2.0, 3, GgVariant::SameSpeed, 1e-3, 1.0, 1.0, 5).is_err());
        assert!(iterate_ss(2.0, 2.0, 3, 1e-3, 1.0, 1.0, 0).is_err());
    }

    #[test]
    fn swap_follows_larger_branch() {
        let t = iterate_ss(3.0, 2.0, 3, 1e-3, 1.0, 1.0, 6).unwrap();
        assert!(t.swapped);
        assert_abs_diff_eq!(t.gamma_branch, 0.1, epsilon = 1e-12);
        assert!(t.closed_form_max_rel_err < 1e-12);
    }

    #[test]
    fn ss_trace_invariants() {
        let t = iterate_ss(2.0, 2.0, 3, 1e-3, 1.0, 1.0, 10).unwrap();
        assert!(t.key_inequality_holds());
        assert_eq!(t.n0, Some(1));
        assert!(t.increasing_past_n0());
    }
}
