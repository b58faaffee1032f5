//! Log-log least squares for blow-up time sweeps.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub eps_list: Vec<f64>,
    pub t_list: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl PowerLawFit {
    /// Relative deviation `|slope - predicted| / |predicted|`.
    pub fn relative_error(&self, predicted: f64) -> f64 {
        (self.slope - predicted).abs() / predicted.abs()
    }
}

/// Ordinary least squares of `ln T` against `ln ε`: `ln T = intercept + slope ln ε`.
pub fn fit_powerlaw(eps_list: &[f64], t_list: &[f64]) -> Result<PowerLawFit> {
    if eps_list.len() != t_list.len() {
        return Err(domain("eps and T lists differ in length"));
    }
    if eps_list.len() < 2 {
        return Err(domain("need at least two points to fit"));
    }
    if eps_list
        .iter()
        .chain(t_list)
        .any(|v| !(*v > 0.0) || !v.is_finite())
    {
        return Err(domain("power-law fit needs positive finite values"));
    }
    let xs: Vec<f64> = eps_list.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = t_list.iter().map(|t| t.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(domain("all eps values coincide"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        let ss_res: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(PowerLawFit {
        eps_list: eps_list.to_vec(),
        t_list: t_list.to_vec(),
        slope,
        intercept,
        r_squared,
    })
}

/// Least-squares slope of `ys` against `xs` (no logs).
pub fn linear_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 || xs.len() != ys.len() {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(
        xs.iter()
            .zip(ys)
            .map(|(x, y)| (x - mx) * (y - my))
            .sum::<f64>()
            / sxx,
    )
}
