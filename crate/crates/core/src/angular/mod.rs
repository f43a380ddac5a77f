//! Angular-momentum algebra, dipole matrix elements between `|n l j m_j>`
//! states, and single-atom Hamiltonians in static fields along `z`.
//!
//! Dipole convention: `d_q` is the spherical component of `r` (in e*a0), and
//!
//! ```text
//! <a|d_q|b> = (-1)^(j_a - m_a) (j_a 1 j_b; -m_a q m_b) <l_a j_a||d||l_b j_b>
//! <l_a j_a||d||l_b j_b> = (-1)^(l_a + s + j_b + 1) sqrt((2j_a+1)(2j_b+1))
//!                         {l_a j_a s; j_b l_b 1} <l_a||d||l_b>
//! <l_a||d||l_b> = (-1)^l_a sqrt((2l_a+1)(2l_b+1)) (l_a 1 l_b; 0 0 0) <a|r|b>
//! ```
//!
//! so every element is real and `<a|d_q|b> = (-1)^q <b|d_-q|a>`.

mod wigner;

pub use wigner::{wigner3j, wigner3j_doubled, wigner6j, wigner6j_doubled};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::atom::Atom;
use crate::error::{Error, Result};
use crate::species::StateLabel;
use crate::units;

/// Spherical dipole component `d_q`: `-1` (sigma-), `0` (pi), `+1` (sigma+).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SphericalDipoleComponent(i32);

impl SphericalDipoleComponent {
    pub const SIGMA_MINUS: Self = SphericalDipoleComponent(-1);
    pub const PI: Self = SphericalDipoleComponent(0);
    pub const SIGMA_PLUS: Self = SphericalDipoleComponent(1);

    pub fn new(q: i32) -> Result<Self> {
        if (-1..=1).contains(&q) {
            Ok(SphericalDipoleComponent(q))
        } else {
            Err(Error::domain(format!("dipole component q = {q} outside -1..=1")))
        }
    }

    pub fn q(self) -> i32 {
        self.0
    }
}

/// Static fields along the quantization axis `z`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SingleAtomFieldConfig {
    /// Electric field magnitude in V/cm.
    pub electric_v_cm: f64,
    /// Magnetic field magnitude in G.
    pub magnetic_gauss: f64,
}

impl SingleAtomFieldConfig {
    pub fn electric(e: f64) -> Self {
        SingleAtomFieldConfig { electric_v_cm: e, magnetic_gauss: 0.0 }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.electric_v_cm >= 0.0) || !(self.magnetic_gauss >= 0.0) {
            return Err(Error::domain("field magnitudes must be non-negative"));
        }
        Ok(())
    }
}

/// Angular part of `<a|d_q|b>` (everything except the radial integral).
pub fn dipole_angular_factor(a: &StateLabel, b: &StateLabel, q: i32) -> f64 {
    if a.mj2 != b.mj2 + 2 * q || a.l.abs_diff(b.l) != 1 || a.j2.abs_diff(b.j2) > 2 {
        return 0.0;
    }
    let (la, lb) = (a.l as i32, b.l as i32);
    let (ja, jb) = (a.j2 as i32, b.j2 as i32);
    let sign = |k: i32| if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let three_j = wigner3j_doubled(ja, 2, jb, -a.mj2, 2 * q, b.mj2);
    if three_j == 0.0 {
        return 0.0;
    }
    let reduced_j = sign((2 * la + 1 + jb + 2) / 2)
        * (((ja + 1) * (jb + 1)) as f64).sqrt()
        * wigner6j_doubled(2 * la, ja, 1, jb, 2 * lb, 2);
    let reduced_l = sign(la)
        * (((2 * la + 1) * (2 * lb + 1)) as f64).sqrt()
        * wigner3j_doubled(2 * la, 2, 2 * lb, 0, 0, 0);
    sign((ja - a.mj2) / 2) * three_j * reduced_j * reduced_l
}

/// `<a|d_q|b>` in e*a0; exactly zero when a selection rule fails.
pub fn dipole_matrix_element(atom: &Atom, a: &StateLabel, b: &StateLabel, q: SphericalDipoleComponent) -> Result<f64> {
    atom.table().check_state(a)?;
    atom.table().check_state(b)?;
    let angular = dipole_angular_factor(a, b, q.q());
    if angular == 0.0 {
        return Ok(0.0);
    }
    Ok(angular * atom.radial_matrix_element(&a.level(), &b.level(), 1)?)
}

/// Lande `g_J` with `g_L = 1` and the electron spin g-factor.
pub fn lande_g(l: u32, j2: u32) -> f64 {
    let j = j2 as f64 / 2.0;
    let l = l as f64;
    let s = 0.5;
    let jj = j * (j + 1.0);
    let gs = units::SPIN_G_FACTOR;
    (jj - s * (s + 1.0) + l * (l + 1.0)) / (2.0 * jj)
        + gs * (jj + s * (s + 1.0) - l * (l + 1.0)) / (2.0 * jj)
}

/// Linear Zeeman shift `g_J mu_B B m_j / h` in Hz.
pub fn zeeman_shift(state: &StateLabel, b_gauss: f64) -> Result<f64> {
    if !(b_gauss >= 0.0) {
        return Err(Error::domain("magnetic field must be non-negative"));
    }
    Ok(lande_g(state.l, state.j2) * units::BOHR_MAGNETON_HZ_PER_GAUSS * b_gauss * state.mj())
}

/// Window for building single-atom Stark bases.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarkBasisSpec {
    /// `|n' - n| <= delta_n`.
    pub delta_n: u32,
    /// Highest orbital momentum kept (capped at `n' - 1`).
    pub l_max: u32,
}

impl StarkBasisSpec {
    pub fn around(state: &StateLabel) -> Self {
        StarkBasisSpec { delta_n: 4, l_max: state.l + 5 }
    }
}

/// All states with the target's `m_j`, ordered by energy, then `l`, `j`, `m_j`.
pub fn stark_basis(atom: &Atom, state: &StateLabel, spec: &StarkBasisSpec) -> Result<Vec<StateLabel>> {
    atom.table().check_state(state)?;
    let mut out = Vec::new();
    let n_lo = state.n.saturating_sub(spec.delta_n).max(1);
    for n in n_lo..=state.n + spec.delta_n {
        for l in 0..=spec.l_max.min(n - 1) {
            if n < atom.table().lowest_n(l) {
                continue;
            }
            for j2 in [2 * l + 1, (2 * l).wrapping_sub(1)] {
                if j2 > 2 * l + 1 || (j2 as i32) < state.mj2.abs() {
                    continue;
                }
                let s = StateLabel { species: state.species, n, l, j2, mj2: state.mj2 };
                out.push(s);
            }
        }
    }
    sort_states(atom, &mut out);
    Ok(out)
}

pub(crate) fn sort_states(atom: &Atom, states: &mut [StateLabel]) {
    let t = atom.table();
    states.sort_by(|a, b| {
        let ea = t.level_energy_hz(&a.level());
        let eb = t.level_energy_hz(&b.level());
        ea.total_cmp(&eb)
            .then(a.l.cmp(&b.l))
            .then(a.j2.cmp(&b.j2))
            .then(a.mj2.cmp(&b.mj2))
    });
}

/// Single-atom Hamiltonian (E/h in Hz) in a `z`-field, row-major over `basis`.
///
/// Diagonal: level energies plus Zeeman shifts. Off-diagonal:
/// `-E <a|d_0|b>`. The basis must share one `m_j`.
pub fn stark_hamiltonian(atom: &Atom, basis: &[StateLabel], fields: &SingleAtomFieldConfig) -> Result<DMatrix<f64>> {
    stark_hamiltonian_relative(atom, basis, fields, 0.0)
}

/// As [`stark_hamiltonian`], with `reference_hz` subtracted from the diagonal.
pub fn stark_hamiltonian_relative(
    atom: &Atom,
    basis: &[StateLabel],
    fields: &SingleAtomFieldConfig,
    reference_hz: f64,
) -> Result<DMatrix<f64>> {
    fields.check()?;
    if basis.is_empty() {
        return Err(Error::domain("empty Stark basis"));
    }
    let mj2 = basis[0].mj2;
    if basis.iter().any(|s| s.mj2 != mj2) {
        return Err(Error::domain("Stark basis must be closed under m_j conservation (single m_j)"));
    }
    let dim = basis.len();
    let mut h = DMatrix::zeros(dim, dim);
    let unit = units::stark_hz_per_ea0_vcm() * fields.electric_v_cm;
    for (i, a) in basis.iter().enumerate() {
        h[(i, i)] = atom.state_energy(a)? - reference_hz + zeeman_shift(a, fields.magnetic_gauss)?;
        if unit == 0.0 {
            continue;
        }
        for (k, b) in basis.iter().enumerate().skip(i + 1) {
            let d = dipole_matrix_element(atom, a, b, SphericalDipoleComponent::PI)?;
            if d != 0.0 {
                h[(i, k)] = -unit * d;
                h[(k, i)] = -unit * d;
            }
        }
    }
    Ok(h)
}

/// Field-dressed energy (Hz) of the eigenstate adiabatically connected to `state`,
/// selected by largest overlap with the unperturbed state.
pub fn stark_energy(atom: &Atom, state: &StateLabel, spec: &StarkBasisSpec, fields: &SingleAtomFieldConfig) -> Result<f64> {
    let basis = stark_basis(atom, state, spec)?;
    let idx = basis.iter().position(|s| s == state).expect("target in its own basis");
    let e0 = atom.state_energy(state)?;
    let h = stark_hamiltonian_relative(atom, &basis, fields, e0)?;
    let eig = SymmetricEigen::new(h);
    let (k, _) = eig
        .eigenvectors
        .row(idx)
        .iter()
        .enumerate()
        .map(|(k, v)| (k, v.abs()))
        .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    Ok(e0 + eig.eigenvalues[k])
}

/// Level shift (Hz) of `state` in a static field along `z`.
pub fn stark_shift(atom: &Atom, state: &StateLabel, spec: &StarkBasisSpec, electric_v_cm: f64) -> Result<f64> {
    let e0 = atom.state_energy(state)?;
    Ok(stark_energy(atom, state, spec, &SingleAtomFieldConfig::electric(electric_v_cm))? - e0)
}

/// Result of a perturbative polarizability sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polarizability {
    /// In GHz/(V/cm)^2 under the convention `shift = +(alpha/2) E^2`.
    pub ghz_per_vcm2: f64,
    /// Relative change when the window grows by five principal quantum numbers.
    pub window_sensitivity: f64,
    pub delta_n: u32,
}

impl Polarizability {
    /// Stark shift in Hz predicted for `electric_v_cm`.
    pub fn shift_hz(&self, electric_v_cm: f64) -> f64 {
        0.5 * self.ghz_per_vcm2 * 1e9 * electric_v_cm * electric_v_cm
    }

    pub fn converged(&self) -> bool {
        self.window_sensitivity < 0.01
    }
}

/// Default principal-quantum-number window of the polarizability sum.
pub const POLARIZABILITY_DELTA_N: u32 = 6;

/// Second-order static polarizability of `state` from dipole couplings (`q = 0`)
/// to every level with `|n' - n| <= delta_n`.
pub fn polarizability(atom: &Atom, state: &StateLabel, delta_n: u32) -> Result<Polarizability> {
    let e0 = atom.state_energy(state)?;
    let unit = units::stark_hz_per_ea0_vcm();
    let wide = delta_n + 5;
    let mut narrow_sum = 0.0;
    let mut wide_sum = 0.0;
    let n_lo = state.n.saturating_sub(wide).max(1);
    for n in n_lo..=state.n + wide {
        for l in [state.l.wrapping_sub(1), state.l + 1] {
            if l > state.l + 1 || l >= n || n < atom.table().lowest_n(l) {
                continue;
            }
            for j2 in [2 * l + 1, (2 * l).wrapping_sub(1)] {
                if j2 > 2 * l + 1 || (j2 as i32) < state.mj2.abs() || j2.abs_diff(state.j2) > 2 {
                    continue;
                }
                let b = StateLabel { species: state.species, n, l, j2, mj2: state.mj2 };
                let d = dipole_matrix_element(atom, state, &b, SphericalDipoleComponent::PI)?;
                if d == 0.0 {
                    continue;
                }
                let term = (d * unit).powi(2) / (e0 - atom.state_energy(&b)?);
                wide_sum += term;
                if n.abs_diff(state.n) <= delta_n {
                    narrow_sum += term;
                }
            }
        }
    }
    // shift = sum |E d|^2 / (E_a - E_b) = (alpha / 2) E^2
    let alpha = 2.0 * narrow_sum / 1e9;
    let alpha_wide = 2.0 * wide_sum / 1e9;
    Ok(Polarizability {
        ghz_per_vcm2: alpha,
        window_sensitivity: ((alpha_wide - alpha) / alpha_wide).abs(),
        delta_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::species::Species;

    fn rb(n: u32, l: u32, j: f64, mj: f64) -> StateLabel {
        StateLabel::new(Species::Rb87, n, l, j, mj).unwrap()
    }

    #[test]
    fn selection_rule_zero() {
        let atom = Atom::bundled(Species::Rb87);
        let a = rb(62, 2, 1.5, 1.5);
        let b = rb(63, 1, 0.5, 0.5);
        assert_eq!(dipole_matrix_element(&atom, &a, &b, SphericalDipoleComponent::PI).unwrap(), 0.0);
        assert_eq!(dipole_matrix_element(&atom, &a, &rb(63, 2, 1.5, 0.5), SphericalDipoleComponent::SIGMA_PLUS).unwrap(), 0.0);
    }

    #[test]
    fn angular_sum_rule() {
        // sum over j_b, m_b, q of the squared angular factor equals l_> / (2 l_a + 1)
        for (la, ja2) in [(0u32, 1u32), (1, 1), (1, 3), (2, 3), (2, 5), (3, 7)] {
            for lb in [la.wrapping_sub(1), la + 1] {
                if lb > la + 1 {
                    continue;
                }
                for ma2 in (-(ja2 as i32)..=ja2 as i32).step_by(2) {
                    let a = StateLabel { species: Species::Rb87, n: 40, l: la, j2: ja2, mj2: ma2 };
                    let mut total = 0.0;
                    for jb2 in [2 * lb + 1, (2 * lb).wrapping_sub(1)] {
                        if jb2 > 2 * lb + 1 {
                            continue;
                        }
                        for mb2 in (-(jb2 as i32)..=jb2 as i32).step_by(2) {
                            let b = StateLabel { species: Species::Rb87, n: 40, l: lb, j2: jb2, mj2: mb2 };
                            for q in -1..=1 {
                                total += dipole_angular_factor(&a, &b, q).powi(2);
                            }
                        }
                    }
                    let expect = la.max(lb) as f64 / (2 * la + 1) as f64;
                    assert!((total - expect).abs() < 1e-12, "la={la} ja2={ja2} lb={lb}: {total} vs {expect}");
                }
            }
        }
    }

    #[test]
    fn zeeman_62d_at_6_6_gauss() {
        let s = rb(62, 2, 1.5, 1.5);
        let shift = zeeman_shift(&s, 6.6).unwrap();
        // g_J(D3/2) = 0.8 for g_s = 2; hand value with g_s = 2.0023:
        let hand = (1.2 - 0.2 * 2.0023) * 1.39962449361e6 * 6.6 * 1.5;
        assert!((shift - hand).abs() < 1e-6);
        assert!((shift / 1e6 - 11.1).abs() < 0.05);
        let minus = zeeman_shift(&rb(62, 2, 1.5, -1.5), 6.6).unwrap();
        assert_eq!(shift, -minus);
        assert_eq!(zeeman_shift(&s, 0.0).unwrap(), 0.0);
        assert!(zeeman_shift(&s, -1.0).is_err());
    }

    #[test]
    fn stark_matrix_zero_field_is_diagonal() {
        let atom = Atom::bundled(Species::Rb87);
        let s = rb(50, 0, 0.5, 0.5);
        let basis = stark_basis(&atom, &s, &StarkBasisSpec { delta_n: 1, l_max: 3 }).unwrap();
        let h = stark_hamiltonian(&atom, &basis, &SingleAtomFieldConfig::default()).unwrap();
        for i in 0..basis.len() {
            assert_eq!(h[(i, i)], atom.state_energy(&basis[i]).unwrap());
            for k in 0..basis.len() {
                if i != k {
                    assert_eq!(h[(i, k)], 0.0);
                }
            }
        }
        assert!(stark_hamiltonian(&atom, &[], &SingleAtomFieldConfig::default()).is_err());
        // sorted by energy
        assert!(basis.windows(2).all(|w| atom.state_energy(&w[0]).unwrap() <= atom.state_energy(&w[1]).unwrap()));
    }
}
