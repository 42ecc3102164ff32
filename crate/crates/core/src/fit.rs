//! Least-squares fits used by the scaling sweeps.

use serde::Serialize;

use crate::error::{invalid, Result};

/// `y = slope * x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Sum of squared residuals.
    pub residual: f64,
}

impl LinearFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// `y = amplitude * exp(rate * x)`, fitted linearly in `ln y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentialFit {
    pub amplitude: f64,
    pub rate: f64,
    /// Sum of squared residuals in `y` (not `ln y`), so it compares with [`LinearFit::residual`].
    pub residual: f64,
}

/// `y = prefactor * x^exponent`, fitted in log-log space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub prefactor: f64,
    pub exponent: f64,
    /// Sum of squared residuals in log-log space.
    pub residual: f64,
}

fn check(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(invalid(format!("fit needs equal lengths, got {} and {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(invalid("a fit needs at least two points"));
    }
    let first = x[0];
    if x.iter().all(|&v| v == first) {
        return Err(invalid("a fit needs at least two distinct abscissae"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(invalid("fit data must be finite"));
    }
    Ok(())
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    check(x, y)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    Ok(LinearFit { slope, intercept, residual })
}

pub fn exponential_fit(x: &[f64], y: &[f64]) -> Result<ExponentialFit> {
    check(x, y)?;
    if y.iter().any(|&v| v <= 0.0) {
        return Err(invalid("exponential fit needs positive values"));
    }
    let ln_y: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let lf = linear_fit(x, &ln_y)?;
    let amplitude = lf.intercept.exp();
    let residual = x.iter().zip(y).map(|(a, b)| (b - amplitude * (lf.slope * a).exp()).powi(2)).sum();
    Ok(ExponentialFit { amplitude, rate: lf.slope, residual })
}

pub fn power_law_fit(x: &[f64], y: &[f64]) -> Result<PowerLawFit> {
    check(x, y)?;
    if x.iter().chain(y).any(|&v| v <= 0.0) {
        return Err(invalid("power-law fit needs positive values"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let lf = linear_fit(&lx, &ly)?;
    Ok(PowerLawFit { prefactor: lf.intercept.exp(), exponent: lf.slope, residual: lf.residual })
}

/// `y = a sqrt(x) + b`, returned as a linear fit in `sqrt(x)`.
pub fn sqrt_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.iter().any(|&v| v < 0.0) {
        return Err(invalid("sqrt fit needs nonnegative abscissae"));
    }
    let sx: Vec<f64> = x.iter().map(|v| v.sqrt()).collect();
    linear_fit(&sx, y)
}
