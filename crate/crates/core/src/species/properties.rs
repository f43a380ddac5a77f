//! Scalar single-state properties: size and radiative lifetime.

use serde::{Deserialize, Serialize};

use crate::angular::{dipole_matrix_element, SphericalDipoleComponent};
use crate::atom::Atom;
use crate::error::{Error, Result};
use crate::species::StateLabel;
use crate::units;

/// How `<r>` is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum RadiusMethod {
    /// Expectation value of the Numerov wavefunction.
    #[default]
    Numerov,
    /// `(a0/2)(3 n*^2 - l(l+1))`.
    Hydrogenic,
}

/// `<r>` in nm.
pub fn mean_radius(atom: &Atom, state: &StateLabel, method: RadiusMethod) -> Result<f64> {
    atom.table().check_state(state)?;
    let au = match method {
        RadiusMethod::Numerov => atom.radial_matrix_element(&state.level(), &state.level(), 1)?,
        RadiusMethod::Hydrogenic => {
            hydrogenic_mean_radius_au(atom.effective_n(&state.level()), state.l)
        }
    };
    Ok(au * units::BOHR_RADIUS_NM)
}

/// Hydrogenic `<r>` in a0 for effective quantum number `n_star`.
pub fn hydrogenic_mean_radius_au(n_star: f64, l: u32) -> f64 {
    let l = l as f64;
    0.5 * (3.0 * n_star * n_star - l * (l + 1.0))
}

/// Decay budget of one state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lifetime {
    pub temperature_k: f64,
    /// Total spontaneous emission rate (1/s).
    pub spontaneous_rate: f64,
    /// Total blackbody-induced rate (1/s), zero at 0 K.
    pub blackbody_rate: f64,
}

impl Lifetime {
    pub fn total_rate(&self) -> f64 {
        self.spontaneous_rate + self.blackbody_rate
    }

    pub fn microseconds(&self) -> f64 {
        1e6 / self.total_rate()
    }
}

/// Bound states within this many principal quantum numbers enter the blackbody sum.
pub const BLACKBODY_DELTA_N: u32 = 20;

/// Radiative lifetime: spontaneous decay into every lower dipole-allowed bound
/// state, plus blackbody-stimulated transfer (up and down) to bound states
/// within `|dn| <= 20`, weighted by the Planck occupation at `temperature_k`.
pub fn lifetime(atom: &Atom, state: &StateLabel, temperature_k: f64) -> Result<Lifetime> {
    if !(temperature_k >= 0.0) {
        return Err(Error::domain("temperature must be >= 0 K"));
    }
    let table = atom.table();
    table.check_state(state)?;
    let e0 = atom.state_energy(state)?;
    let prefactor = units::spontaneous_rate_prefactor();
    let mut spontaneous = 0.0;
    let mut blackbody = 0.0;
    let n_hi = state.n + BLACKBODY_DELTA_N;
    for l in [state.l.wrapping_sub(1), state.l + 1] {
        if l > state.l + 1 {
            continue;
        }
        for j2 in [2 * l + 1, (2 * l).wrapping_sub(1)] {
            if j2 > 2 * l + 1 || j2.abs_diff(state.j2) > 2 {
                continue;
            }
            for n in table.lowest_n(l).max(l + 1)..=n_hi {
                let level = crate::species::Level { species: state.species, n, l, j2 };
                let e = table.level_energy_hz(&level);
                let nu = (e0 - e).abs();
                let lower = e < e0;
                let in_window = n.abs_diff(state.n) <= BLACKBODY_DELTA_N;
                if !lower && !in_window {
                    continue;
                }
                let strength = line_strength(atom, state, &level)?;
                let rate = prefactor * nu.powi(3) * strength;
                if lower {
                    spontaneous += rate;
                }
                if in_window && temperature_k > 0.0 {
                    blackbody += rate * units::planck_occupation(nu, temperature_k);
                }
            }
        }
    }
    Ok(Lifetime { temperature_k, spontaneous_rate: spontaneous, blackbody_rate: blackbody })
}

/// `sum_{m_b, q} |<a|d_q|b m_b>|^2` in (e*a0)^2.
fn line_strength(atom: &Atom, a: &StateLabel, b: &crate::species::Level) -> Result<f64> {
    let mut s = 0.0;
    for target in b.sublevels() {
        let q = (a.mj2 - target.mj2) / 2;
        if q.abs() > 1 {
            continue;
        }
        let d = dipole_matrix_element(atom, a, &target, SphericalDipoleComponent::new(q)?)?;
        s += d * d;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::species::Species;

    #[test]
    fn hydrogenic_closed_form() {
        assert_eq!(hydrogenic_mean_radius_au(7.0, 0), 1.5 * 49.0);
        assert_eq!(hydrogenic_mean_radius_au(2.0, 1), 5.0);
    }

    #[test]
    fn negative_temperature_rejected() {
        let atom = Atom::bundled(Species::Rb87);
        let s = StateLabel::new(Species::Rb87, 30, 0, 0.5, 0.5).unwrap();
        assert!(lifetime(&atom, &s, -1.0).is_err());
    }
}
