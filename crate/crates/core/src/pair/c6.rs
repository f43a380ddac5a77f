use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{build_pair_basis, pair_dipole_table, PairBasis, PairBasisParams, PairState};
use crate::atom::Atom;
use crate::error::{Error, Result};
use crate::species::StateLabel;

/// Intermediate pair states closer than this to the target break the perturbative sum.
pub const FORSTER_GUARD_HZ: f64 = 1e6;

/// Which `|m_j, m_j>` pair component the excitation lasers address.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LaserPolarization {
    /// Stretched `m_j = +j` on both atoms.
    #[default]
    SigmaPlus,
    /// `m_j = -j` on both atoms.
    SigmaMinus,
    /// The `m_j` carried by the requested state.
    Matching,
}

impl LaserPolarization {
    fn mj2(self, s: &StateLabel) -> i32 {
        match self {
            LaserPolarization::SigmaPlus => s.j2 as i32,
            LaserPolarization::SigmaMinus => -(s.j2 as i32),
            LaserPolarization::Matching => s.mj2,
        }
    }
}

/// Second-order operator in the Zeeman-pair manifold of a symmetric pair level.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifoldC6 {
    pub manifold: Vec<PairState>,
    /// `R^6 H_eff` in GHz·µm^6, rows/columns ordered as `manifold`.
    pub operator_ghz_um6: Vec<Vec<f64>>,
    /// Ascending eigenvalues in GHz·µm^6.
    pub eigenvalues_ghz_um6: Vec<f64>,
    /// Squared overlap of each eigenvector with the laser-coupled pair state.
    pub laser_weights: Vec<f64>,
    /// `sum_k lambda_k w_k`, i.e. the expectation value in the laser-coupled state.
    pub weighted_ghz_um6: f64,
    pub laser_state: PairState,
    pub basis_size: usize,
}

/// Van der Waals coefficient of a symmetric pair (repulsive > 0).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct C6Result {
    pub state: StateLabel,
    pub theta: f64,
    pub c6_ghz_um6: f64,
    pub basis_size: usize,
    /// Present when the level is degenerate beyond spin (`l > 0`).
    pub manifold: Option<ManifoldC6>,
}

/// `sum_p <r|V|p><p|V|c> / (E_0 - E_p)` over non-manifold basis states, in Hz·µm^6.
fn second_order(atom: &Atom, basis: &PairBasis, rows: &[PairState], theta: f64) -> Result<DMatrix<f64>> {
    let table = pair_dipole_table(atom, basis)?;
    let target_levels = (basis.target.a.level(), basis.target.b.level());
    let m = rows.len();
    let mut out = DMatrix::zeros(m, m);
    let mut column = vec![0.0; m];
    for (p, de) in basis.states.iter().zip(&basis.energies) {
        if (p.a.level(), p.b.level()) == target_levels {
            continue;
        }
        let mut any = false;
        for (i, r) in rows.iter().enumerate() {
            column[i] = table.coupling(p, r, theta);
            any |= column[i] != 0.0;
        }
        if !any {
            continue;
        }
        if de.abs() < FORSTER_GUARD_HZ {
            return Err(Error::ForsterProximity { channel: p.to_string(), defect_hz: -de });
        }
        for i in 0..m {
            if column[i] == 0.0 {
                continue;
            }
            for k in i..m {
                out[(i, k)] -= column[i] * column[k] / de;
            }
        }
    }
    for i in 0..m {
        for k in 0..i {
            out[(i, k)] = out[(k, i)];
        }
    }
    Ok(out)
}

fn c6_basis(atom: &Atom, state: &StateLabel, params: &PairBasisParams) -> Result<PairBasis> {
    let p = PairBasisParams { conserve_m: false, ..*params };
    build_pair_basis(atom, PairState::symmetric(*state), &p)
}

/// Effective `C6` in the `(2j+1)^2` pair manifold of `state`'s level.
pub fn c6_effective_manifold(
    atom: &Atom,
    state: &StateLabel,
    theta: f64,
    polarization: LaserPolarization,
    params: &PairBasisParams,
) -> Result<ManifoldC6> {
    let basis = c6_basis(atom, state, params)?;
    let level = state.level();
    let mut manifold = Vec::new();
    for a in level.sublevels() {
        for b in level.sublevels() {
            manifold.push(PairState { a, b });
        }
    }
    let h = second_order(atom, &basis, &manifold, theta)? / 1e9;
    let mj2 = polarization.mj2(state);
    let laser_state = PairState::symmetric(StateLabel { mj2, ..*state });
    let t = manifold.iter().position(|p| *p == laser_state).expect("laser state inside manifold");
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..manifold.len()).collect();
    order.sort_by(|&i, &k| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[k]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let laser_weights: Vec<f64> = order.iter().map(|&k| eig.eigenvectors[(t, k)].powi(2)).collect();
    Ok(ManifoldC6 {
        operator_ghz_um6: (0..h.nrows()).map(|i| h.row(i).iter().copied().collect()).collect(),
        weighted_ghz_um6: h[(t, t)],
        eigenvalues_ghz_um6: eigenvalues,
        laser_weights,
        manifold,
        laser_state,
        basis_size: basis.len(),
    })
}

/// Second-order `C6` for `|state, state>`; `l > 0` levels go through the manifold
/// treatment, weighted on the state's own `m_j`.
pub fn c6_perturbative(atom: &Atom, state: &StateLabel, theta: f64, params: &PairBasisParams) -> Result<C6Result> {
    if state.l > 0 {
        let m = c6_effective_manifold(atom, state, theta, LaserPolarization::Matching, params)?;
        return Ok(C6Result {
            state: *state,
            theta,
            c6_ghz_um6: m.weighted_ghz_um6,
            basis_size: m.basis_size,
            manifold: Some(m),
        });
    }
    let basis = c6_basis(atom, state, params)?;
    let h = second_order(atom, &basis, &[PairState::symmetric(*state)], theta)?;
    Ok(C6Result { state: *state, theta, c6_ghz_um6: h[(0, 0)] / 1e9, basis_size: basis.len(), manifold: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::species::Species;

    fn st(s: &str) -> StateLabel {
        s.parse().unwrap()
    }

    #[test]
    fn near_resonant_channel_is_rejected() {
        let atom = Atom::bundled(Species::Rb87);
        let s = st("Rb:59D3/2");
        let params = PairBasisParams { window_hz: 50e6, delta_n: 4, ..Default::default() };
        let mut basis = c6_basis(&atom, &s, &params).unwrap();
        let channel = PairState::new(st("Rb:61P1/2:1/2"), st("Rb:57F5/2:5/2")).unwrap();
        let i = basis.index_of(&channel).unwrap();
        basis.energies[i] = 0.5e6;
        match second_order(&atom, &basis, &[PairState::symmetric(s)], 0.0) {
            Err(Error::ForsterProximity { defect_hz, .. }) => assert_eq!(defect_hz, -0.5e6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn manifold_operator_is_symmetric() {
        let atom = Atom::bundled(Species::Rb87);
        let params = PairBasisParams { window_hz: 10e9, delta_n: 2, ..Default::default() };
        let m = c6_effective_manifold(&atom, &st("Rb:62D3/2"), 0.7, LaserPolarization::SigmaPlus, &params).unwrap();
        let h = &m.operator_ghz_um6;
        for i in 0..h.len() {
            for k in 0..h.len() {
                assert_eq!(h[i][k], h[k][i]);
            }
        }
        let w: f64 = m.laser_weights.iter().sum();
        assert!((w - 1.0).abs() < 1e-12);
        let avg: f64 = m.eigenvalues_ghz_um6.iter().zip(&m.laser_weights).map(|(e, w)| e * w).sum();
        assert!((avg - m.weighted_ghz_um6).abs() < 1e-9 * avg.abs());
    }

    #[test]
    fn opposite_circular_polarizations_agree_on_axis() {
        let atom = Atom::bundled(Species::Rb87);
        let params = PairBasisParams { window_hz: 10e9, delta_n: 2, ..Default::default() };
        let s = st("Rb:62D5/2");
        let p = c6_effective_manifold(&atom, &s, 0.0, LaserPolarization::SigmaPlus, &params).unwrap();
        let m = c6_effective_manifold(&atom, &s, 0.0, LaserPolarization::SigmaMinus, &params).unwrap();
        assert!((p.weighted_ghz_um6 / m.weighted_ghz_um6 - 1.0).abs() < 1e-9);
    }
}
