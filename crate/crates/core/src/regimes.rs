//! Closed-form regime quantities: blockade radius, two-photon reduction,
//! intermediate-state scattering and the dressed interaction.

use log::warn;
use nalgebra::{Matrix2, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `R_b = (C6 / Omega)^(1/6)` in µm, `C6` in Hz·µm^6 and `Omega` in Hz.
pub fn blockade_radius(c6_hz_um6: f64, omega_hz: f64) -> Result<f64> {
    if !(c6_hz_um6 > 0.0) || !(omega_hz > 0.0) {
        return Err(Error::domain("blockade radius needs C6 > 0 and Omega > 0"));
    }
    Ok((c6_hz_um6 / omega_hz).powf(1.0 / 6.0))
}

/// Red/blue two-photon excitation through a detuned intermediate level. In the
/// rotating frame the intermediate level sits at `+Delta` and the Rydberg level at `-delta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPhotonDrive {
    pub omega_red_hz: f64,
    pub omega_blue_hz: f64,
    /// Intermediate-state detuning.
    pub delta_hz: f64,
    /// Two-photon detuning.
    pub two_photon_detuning_hz: f64,
    /// Intermediate-state linewidth `Gamma/2pi`.
    pub gamma_hz: f64,
}

impl TwoPhotonDrive {
    /// `|Delta| / max(Omega_R, Omega_B)` below which adiabatic elimination is suspect.
    pub const RATIO_WARNING: f64 = 10.0;

    fn check(&self) -> Result<()> {
        if self.delta_hz == 0.0 || !self.delta_hz.is_finite() {
            return Err(Error::domain("intermediate detuning must be nonzero"));
        }
        let omega = self.omega_red_hz.abs().max(self.omega_blue_hz.abs());
        if omega > 0.0 && self.delta_hz.abs() / omega < Self::RATIO_WARNING {
            warn!(
                "|Delta|/Omega = {:.2} < {}: two-photon reduction is approximate",
                self.delta_hz.abs() / omega,
                Self::RATIO_WARNING
            );
        }
        Ok(())
    }
}

/// Effective single-photon parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveDrive {
    pub omega_eff_hz: f64,
    pub delta_eff_hz: f64,
}

/// `Omega_eff = Omega_R Omega_B / (2 Delta)`, `delta_eff = delta - (Omega_R^2 - Omega_B^2)/(4 Delta)`.
pub fn effective_two_photon(drive: &TwoPhotonDrive) -> Result<EffectiveDrive> {
    drive.check()?;
    let d = drive.delta_hz;
    Ok(EffectiveDrive {
        omega_eff_hz: drive.omega_red_hz * drive.omega_blue_hz / (2.0 * d),
        delta_eff_hz: drive.two_photon_detuning_hz
            - (drive.omega_red_hz.powi(2) - drive.omega_blue_hz.powi(2)) / (4.0 * d),
    })
}

/// `Gamma_eff = Gamma (Omega_R^2 + Omega_B^2) / (4 Delta^2)`.
pub fn scattering_rate(drive: &TwoPhotonDrive) -> Result<f64> {
    drive.check()?;
    Ok(drive.gamma_hz * (drive.omega_red_hz.powi(2) + drive.omega_blue_hz.powi(2)) / (4.0 * drive.delta_hz.powi(2)))
}

/// Off-resonant coupling of `|g>` to `|r>` for ground-state dressing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DressingParams {
    pub omega_hz: f64,
    pub detuning_dress_hz: f64,
}

/// Dressed two-atom shift, printed closed form alongside the exact model value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DressedInteraction {
    /// `(1/2)[Delta + sgn(Delta)(sqrt(Delta^2 + 2 Omega^2) - sqrt(Delta^2 + Omega^2))]`.
    pub formula_hz: f64,
    /// Exact blockaded-pair value, see [`dressed_interaction_oracle`].
    pub oracle_hz: f64,
    /// `formula - (1/2) sgn(Delta) sqrt(Delta^2 + Omega^2)`: the closed form with
    /// the second single-atom light shift also removed.
    pub reconciled_hz: f64,
    /// `|reconciled - oracle| <= 1e-6 max(|oracle|, tiny)`.
    pub consistent: bool,
}

/// Closed form as printed. Its `Omega -> 0` limit is `Delta/2`, not zero.
pub fn dressed_interaction_formula(p: &DressingParams) -> f64 {
    let (o, d) = (p.omega_hz, p.detuning_dress_hz);
    0.5 * (d + d.signum() * ((d * d + 2.0 * o * o).sqrt() - (d * d + o * o).sqrt()))
}

/// Convention shift separating the printed form from the ground-state pair shift.
pub fn dressed_reconciliation_offset(p: &DressingParams) -> f64 {
    let (o, d) = (p.omega_hz, p.detuning_dress_hz);
    0.5 * d.signum() * (d * d + o * o).sqrt()
}

fn ground_branch(h: Matrix2<f64>, detuning: f64) -> f64 {
    let eig = SymmetricEigen::new(h);
    // With the Rydberg level at -Delta the ground-connected level is the upper one for Delta > 0.
    let (lo, hi) = if eig.eigenvalues[0] <= eig.eigenvalues[1] {
        (eig.eigenvalues[0], eig.eigenvalues[1])
    } else {
        (eig.eigenvalues[1], eig.eigenvalues[0])
    };
    if detuning >= 0.0 { hi } else { lo }
}

/// `J = E_gg - 2 E_g` from exact diagonalization of the perfectly blockaded pair
/// `{|gg>, |psi+>}` (coupling `sqrt(2) Omega/2`) and of one atom (coupling `Omega/2`),
/// Rydberg level at `-Delta` in the rotating frame, following the ground-connected branch.
pub fn dressed_interaction_oracle(p: &DressingParams) -> f64 {
    let (o, d) = (p.omega_hz, p.detuning_dress_hz);
    let single = Matrix2::new(0.0, o / 2.0, o / 2.0, -d);
    let pair = Matrix2::new(0.0, std::f64::consts::SQRT_2 * o / 2.0, std::f64::consts::SQRT_2 * o / 2.0, -d);
    if o == 0.0 {
        return 0.0;
    }
    ground_branch(pair, d) - 2.0 * ground_branch(single, d)
}

pub fn dressed_interaction(p: &DressingParams) -> DressedInteraction {
    let formula = dressed_interaction_formula(p);
    let oracle = dressed_interaction_oracle(p);
    let reconciled = formula - dressed_reconciliation_offset(p);
    let scale = oracle.abs().max(p.omega_hz.abs() * 1e-12).max(f64::MIN_POSITIVE);
    DressedInteraction {
        formula_hz: formula,
        oracle_hz: oracle,
        reconciled_hz: reconciled,
        consistent: (reconciled - oracle).abs() <= 1e-6 * scale,
    }
}

/// `U >> gamma` check of coherent blockade: `U / gamma` above `margin`.
pub fn coherent_blockade(u_hz: f64, gamma_hz: f64, margin: f64) -> bool {
    gamma_hz <= 0.0 || u_hz.abs() / gamma_hz > margin
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blockade_radius_examples() {
        assert!((blockade_radius(1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let rb = blockade_radius(4e12, 1e6).unwrap();
        assert!((rb - 12.599).abs() < 1e-2);
        let r2 = blockade_radius(64.0 * 4e12, 1e6).unwrap();
        assert!((r2 / rb - 2.0).abs() < 1e-12);
        assert!(blockade_radius(-1.0, 1.0).is_err());
        assert!(blockade_radius(1.0, 0.0).is_err());
    }

    #[test]
    fn two_photon_arithmetic() {
        let d = TwoPhotonDrive {
            omega_red_hz: 10e6,
            omega_blue_hz: 10e6,
            delta_hz: 740e6,
            two_photon_detuning_hz: 3e3,
            gamma_hz: 6e6,
        };
        let e = effective_two_photon(&d).unwrap();
        assert!((e.omega_eff_hz - 67_567.567).abs() < 1.0);
        assert_eq!(e.delta_eff_hz, 3e3);
        let flipped = effective_two_photon(&TwoPhotonDrive { delta_hz: -740e6, ..d }).unwrap();
        assert_eq!(flipped.omega_eff_hz, -e.omega_eff_hz);
        let g = scattering_rate(&d).unwrap();
        let g4 = scattering_rate(&TwoPhotonDrive { delta_hz: 4.0 * 740e6, ..d }).unwrap();
        assert!((g / g4 - 16.0).abs() < 1e-12);
        assert!(effective_two_photon(&TwoPhotonDrive { delta_hz: 0.0, ..d }).is_err());
        assert_eq!(scattering_rate(&TwoPhotonDrive { omega_red_hz: 0.0, omega_blue_hz: 0.0, ..d }).unwrap(), 0.0);
    }

    #[test]
    fn dressed_zero_light() {
        let p = DressingParams { omega_hz: 0.0, detuning_dress_hz: 5e6 };
        assert_eq!(dressed_interaction_oracle(&p), 0.0);
        assert!((dressed_interaction_formula(&p) - 2.5e6).abs() < 1e-9);
    }

    #[test]
    fn dressed_weak_drive_is_fourth_order() {
        let p = DressingParams { omega_hz: 1e5, detuning_dress_hz: 1e7 };
        let j = dressed_interaction_oracle(&p);
        let series = -p.omega_hz.powi(4) / (8.0 * p.detuning_dress_hz.powi(3));
        assert!(((j - series) / series).abs() < 1e-3, "{j} vs {series}");
    }
}
