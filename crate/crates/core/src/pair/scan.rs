use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{InteractionSpectrum, PairHamiltonian};
use crate::error::Result;

pub const SCAN_SCHEMA_VERSION: u32 = 1;

/// One eigenvalue of one geometry point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    #[serde(rename = "R_um")]
    pub r_um: f64,
    pub theta_rad: f64,
    #[serde(rename = "E_Vcm")]
    pub e_vcm: f64,
    #[serde(rename = "eigenvalue_Hz")]
    pub eigenvalue_hz: f64,
    pub overlap: f64,
    pub weight: f64,
}

impl ScanRow {
    /// Rows of every eigenstate whose laser weight is at least `min_weight`.
    pub fn from_spectrum(s: &InteractionSpectrum, min_weight: f64) -> Vec<ScanRow> {
        (0..s.eigenvalues.len())
            .filter(|&i| s.weights[i] >= min_weight)
            .map(|i| ScanRow {
                r_um: s.geometry.distance_um,
                theta_rad: s.geometry.theta,
                e_vcm: s.geometry.fields.electric_v_cm,
                eigenvalue_hz: s.eigenvalues[i],
                overlap: s.overlaps[i],
                weight: s.weights[i],
            })
            .collect()
    }
}

/// Spectra at each distance, in input order. Runs on the current rayon pool.
pub fn scan_distance(h: &PairHamiltonian, distances_um: &[f64]) -> Result<Vec<InteractionSpectrum>> {
    distances_um.par_iter().map(|&r| h.diagonalize(r)).collect()
}

pub fn write_scan_csv<W: Write>(rows: &[ScanRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(std::io::Error::from)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ScanDocument<'a> {
    schema_version: u32,
    rows: &'a [ScanRow],
}

pub fn write_scan_json<W: Write>(rows: &[ScanRow], out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, &ScanDocument { schema_version: SCAN_SCHEMA_VERSION, rows })?;
    Ok(())
}
