use serde::{Deserialize, Serialize};

use super::{evolve, AtomArray, CouplingMatrix, CouplingModel, DriveParams, InitialState, NoiseParams, SpinModel};
use crate::error::{Error, Result};

const GOLDEN: f64 = 0.618_033_988_749_894_8;

fn golden_min(mut a: f64, mut b: f64, tol: f64, mut f: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

fn sin2_residual(times: &[f64], y: &[f64], f: f64) -> f64 {
    let s: Vec<f64> = times.iter().map(|t| (std::f64::consts::PI * f * t).sin().powi(2)).collect();
    let ss: f64 = s.iter().map(|x| x * x).sum();
    let sy: f64 = s.iter().zip(y).map(|(a, b)| a * b).sum();
    let amp = if ss > 0.0 { sy / ss } else { 0.0 };
    s.iter().zip(y).map(|(a, b)| (b - amp * a).powi(2)).sum()
}

/// Frequency `f` (Hz) of `y = A sin^2(pi f t)` by least squares over `[f_min, f_max]`.
pub fn fit_rabi_frequency(times: &[f64], y: &[f64], f_min: f64, f_max: f64) -> Result<f64> {
    if times.len() != y.len() || times.len() < 4 {
        return Err(Error::domain("need at least four matching samples"));
    }
    if !(f_max > f_min && f_min >= 0.0) {
        return Err(Error::domain("frequency range must be increasing and non-negative"));
    }
    let grid = 4000;
    let step = (f_max - f_min) / grid as f64;
    let mut best = (0, f64::INFINITY);
    for k in 0..=grid {
        let r = sin2_residual(times, y, f_min + step * k as f64);
        if r < best.1 {
            best = (k, r);
        }
    }
    let centre = f_min + step * best.0 as f64;
    golden_min((centre - step).max(f_min), (centre + step).min(f_max), step * 1e-9, |f| Ok(sin2_residual(times, y, f)))
}

/// Least-squares estimate of a two-atom interaction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionFit {
    pub u_hz: f64,
    pub residual: f64,
    /// One-sigma half width from the curvature of the residual at the optimum.
    pub sigma_hz: f64,
    /// False when the residual barely changes on doubling `U` (saturated blockade).
    pub identifiable: bool,
}

fn blockade_series(times: &[f64], omega: f64, gamma: f64, u: f64) -> Result<Vec<f64>> {
    let array = AtomArray::chain_z(2, 1.0)?;
    let couplings = CouplingMatrix::uniform(CouplingModel::Ising, 2, u);
    let drive = DriveParams::resonant(omega, times.last().copied().unwrap_or(0.0));
    let model = SpinModel::ising(array, drive, couplings);
    let noise = NoiseParams { damping_rate: gamma, ..Default::default() };
    Ok(evolve(&model, &InitialState::Configuration(0), times, &noise)?.series(3))
}

/// Fits `U` of the resonantly driven two-atom model to an observed `P_rr(t)`.
pub fn fit_interaction(times: &[f64], p_rr: &[f64], omega_hz: f64, gamma: f64) -> Result<InteractionFit> {
    if times.len() != p_rr.len() || times.len() < 3 {
        return Err(Error::domain("need at least three matching samples"));
    }
    if !(omega_hz > 0.0) {
        return Err(Error::domain("Omega must be positive"));
    }
    let rss = |u: f64| -> Result<f64> {
        let m = blockade_series(times, omega_hz, gamma, u)?;
        Ok(m.iter().zip(p_rr).map(|(a, b)| (a - b).powi(2)).sum())
    };
    let (lo, hi) = ((omega_hz * 1e-2).ln(), (omega_hz * 1e4).ln());
    let points = 90;
    let step = (hi - lo) / points as f64;
    let mut best = (0, f64::INFINITY);
    for k in 0..=points {
        let r = rss((lo + step * k as f64).exp())?;
        if r < best.1 {
            best = (k, r);
        }
    }
    let centre = lo + step * best.0 as f64;
    let x = golden_min((centre - step).max(lo), (centre + step).min(hi), 1e-10, |x| rss(x.exp()))?;
    let u = x.exp();
    let r0 = rss(u)?;
    let h = 1e-3 * u;
    let curvature = (rss(u + h)? - 2.0 * r0 + rss(u - h)?) / (h * h);
    let s2 = r0 / (times.len() as f64 - 1.0);
    let sigma = if curvature > 0.0 { (2.0 * s2 / curvature).sqrt() } else { f64::INFINITY };
    let signal: f64 = p_rr.iter().map(|y| y * y).sum::<f64>().max(1e-300);
    let flat = (rss(2.0 * u)? - r0).abs() < 1e-6 * signal.max(times.len() as f64 * 1e-6);
    Ok(InteractionFit { u_hz: u, residual: r0, sigma_hz: sigma, identifiable: !flat && best.0 < points })
}

/// Normalized autocorrelation of a uniformly sampled series, lags `0..len/2`.
pub fn autocorrelation(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let d: Vec<f64> = y.iter().map(|v| v - mean).collect();
    let c0: f64 = d.iter().map(|v| v * v).sum::<f64>() / n as f64;
    (0..n / 2)
        .map(|lag| {
            let c: f64 = (0..n - lag).map(|i| d[i] * d[i + lag]).sum::<f64>() / (n - lag) as f64;
            if c0 > 0.0 { c / c0 } else { 0.0 }
        })
        .collect()
}

/// First deep minimum of the autocorrelation and the revival maximum after it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseRevival {
    pub collapse_lag: usize,
    pub collapse_value: f64,
    pub revival_lag: usize,
    pub revival_value: f64,
}

/// Looks for a collapse (autocorrelation minimum below zero) followed by a
/// secondary maximum at least 0.2 above it.
pub fn collapse_revival(y: &[f64]) -> Option<CollapseRevival> {
    let a = autocorrelation(y);
    let is_min = |i: usize| a[i] <= a[i - 1] && a[i] <= a[i + 1];
    let is_max = |i: usize| a[i] >= a[i - 1] && a[i] >= a[i + 1];
    let collapse = (1..a.len().saturating_sub(1)).find(|&i| is_min(i) && a[i] < 0.0)?;
    let revival = (collapse + 1..a.len().saturating_sub(1)).filter(|&i| is_max(i)).max_by(|&i, &k| a[i].total_cmp(&a[k]))?;
    (a[revival] - a[collapse] > 0.2).then_some(CollapseRevival {
        collapse_lag: collapse,
        collapse_value: a[collapse],
        revival_lag: revival,
        revival_value: a[revival],
    })
}
