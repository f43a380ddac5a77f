//! Least-squares power laws.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `y = a x^p` fitted on `ln|y|` vs `ln x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub exponent: f64,
    pub prefactor: f64,
    /// RMS residual of `ln|y|`.
    pub rms_log_residual: f64,
}

pub fn power_law(x: &[f64], y: &[f64]) -> Result<PowerLaw> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::domain("power-law fit needs at least two matching points"));
    }
    if x.iter().any(|v| !(*v > 0.0)) || y.iter().any(|v| *v == 0.0 || !v.is_finite()) {
        return Err(Error::domain("power-law fit needs x > 0 and finite nonzero y"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let n = x.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("power-law fit needs distinct x values"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let p = sxy / sxx;
    let c = my - p * mx;
    let rms = (lx.iter().zip(&ly).map(|(a, b)| (b - c - p * a).powi(2)).sum::<f64>() / n).sqrt();
    Ok(PowerLaw { exponent: p, prefactor: c.exp(), rms_log_residual: rms })
}
