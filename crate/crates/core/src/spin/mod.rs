//! Driven few-atom spin models on a dense `2^N` state space.
//!
//! Basis index bit `i` is atom `i` (atom 0 least significant); a set bit is
//! `|r>` (Ising) or `|up>` (XY). Hamiltonians are in Hz and evolve as
//! `exp(-2 pi i H t)`.

mod evolve;
mod fit;
mod scenario;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use evolve::{
    evolve, evolve_hamiltonian, propagate_coherent, sample_measurements, EvolutionResult, InitialState, NoiseParams, ShotTable,
};
pub use fit::{autocorrelation, collapse_revival, fit_interaction, fit_rabi_frequency, CollapseRevival, InteractionFit};
pub use scenario::{
    bundled_scenario, run_scenario, simulate_three_atom_ising, simulate_xy_chain, CouplingSpec, Scenario,
    ScenarioOutput, TimeGrid, BUNDLED_SCENARIOS, SCENARIO_SCHEMA_VERSION,
};

/// Largest atom count handled with dense state vectors.
pub const MAX_ATOMS: usize = 14;

/// Atom positions in µm; quantization axis along `z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomArray {
    pub positions: Vec<[f64; 3]>,
}

impl AtomArray {
    pub fn new(positions: Vec<[f64; 3]>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::domain("atom array is empty"));
        }
        if positions.len() > MAX_ATOMS {
            return Err(Error::DimensionOverflow(positions.len()));
        }
        let a = AtomArray { positions };
        for i in 0..a.len() {
            for j in i + 1..a.len() {
                if !(a.distance(i, j) > 0.1) {
                    return Err(Error::domain(format!("atoms {i} and {j} are closer than 0.1 µm")));
                }
            }
        }
        Ok(a)
    }

    /// `n` atoms spaced `spacing_um` along `z`.
    pub fn chain_z(n: usize, spacing_um: f64) -> Result<Self> {
        AtomArray::new((0..n).map(|i| [0.0, 0.0, i as f64 * spacing_um]).collect())
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.positions[i], self.positions[j]);
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    }

    /// Angle between the `i-j` axis and `z`, folded into `[0, pi/2]`.
    pub fn theta(&self, i: usize, j: usize) -> f64 {
        let dz = (self.positions[i][2] - self.positions[j][2]).abs();
        (dz / self.distance(i, j)).clamp(0.0, 1.0).acos()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingModel {
    /// `V_ij n_i n_j`, van der Waals.
    Ising,
    /// `J_ij (s+_i s-_j + h.c.)`, resonant exchange.
    Xy,
}

impl CouplingModel {
    pub fn power(self) -> i32 {
        match self {
            CouplingModel::Ising => 6,
            CouplingModel::Xy => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// `C(theta_ij) / R_ij^k`.
    Analytic,
    /// Values supplied directly.
    Injected,
}

/// Symmetric pair couplings (Hz) with zero diagonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingMatrix {
    pub model: CouplingModel,
    pub values: Vec<Vec<f64>>,
    pub provenance: Provenance,
}

impl CouplingMatrix {
    pub fn injected(model: CouplingModel, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = values.len();
        for (i, row) in values.iter().enumerate() {
            if row.len() != n {
                return Err(Error::domain("coupling matrix must be square"));
            }
            if row[i] != 0.0 {
                return Err(Error::domain("coupling matrix diagonal must be zero"));
            }
            for j in 0..n {
                if row[j] != values[j][i] || !row[j].is_finite() {
                    return Err(Error::domain(format!("coupling matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(CouplingMatrix { model, values, provenance: Provenance::Injected })
    }

    /// `coefficient(theta_ij) / R_ij^k` with `k` = 6 (Ising) or 3 (XY); coefficient in Hz·µm^k.
    pub fn analytic(array: &AtomArray, model: CouplingModel, coefficient: impl Fn(f64) -> Result<f64>) -> Result<Self> {
        let n = array.len();
        let mut values = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let r = array.distance(i, j);
                let v = coefficient(array.theta(i, j))? / r.powi(model.power());
                values[i][j] = v;
                values[j][i] = v;
            }
        }
        Ok(CouplingMatrix { model, values, provenance: Provenance::Analytic })
    }

    /// Same coupling `v` between every pair.
    pub fn uniform(model: CouplingModel, n: usize, v: f64) -> Self {
        let values = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { v }).collect()).collect();
        CouplingMatrix { model, values, provenance: Provenance::Injected }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Restriction to the atoms listed in `keep`.
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let values = keep.iter().map(|&i| keep.iter().map(|&j| self.values[i][j]).collect()).collect();
        CouplingMatrix { model: self.model, values, provenance: self.provenance.clone() }
    }
}

/// Per-atom laser phases `exp(i k.r_i)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMode {
    #[default]
    Off,
    /// Fixed wave vector in rad/µm.
    Fixed { k_per_um: [f64; 3] },
    /// Independent uniform phases per realization, averaged over `realizations`.
    Random { realizations: usize, seed: u64 },
}

/// Global drive of the Ising model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    pub omega_hz: f64,
    pub detuning_hz: f64,
    pub duration_s: f64,
    #[serde(default)]
    pub phases: PhaseMode,
}

impl DriveParams {
    pub fn resonant(omega_hz: f64, duration_s: f64) -> Self {
        DriveParams { omega_hz, detuning_hz: 0.0, duration_s, phases: PhaseMode::Off }
    }

    fn check(&self) -> Result<()> {
        if !(self.omega_hz >= 0.0) || !self.detuning_hz.is_finite() {
            return Err(Error::domain("drive needs Omega >= 0 and finite detuning"));
        }
        Ok(())
    }

    /// Phase of each atom for one realization.
    pub fn phase_sets(&self, array: &AtomArray) -> Vec<Vec<f64>> {
        match &self.phases {
            PhaseMode::Off => vec![vec![0.0; array.len()]],
            PhaseMode::Fixed { k_per_um } => vec![array
                .positions
                .iter()
                .map(|r| k_per_um[0] * r[0] + k_per_um[1] * r[1] + k_per_um[2] * r[2])
                .collect()],
            PhaseMode::Random { realizations, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..(*realizations).max(1))
                    .map(|_| (0..array.len()).map(|_| rng.random::<f64>() * std::f64::consts::TAU).collect())
                    .collect()
            }
        }
    }
}

/// A spin Hamiltonian family on an atom array.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum SpinModel {
    Ising { array: AtomArray, drive: DriveParams, couplings: CouplingMatrix },
    Xy { array: AtomArray, couplings: CouplingMatrix },
}

fn dimension(n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::domain("no atoms"));
    }
    if n > MAX_ATOMS {
        return Err(Error::DimensionOverflow(n));
    }
    Ok(1 << n)
}

fn check_couplings(c: &CouplingMatrix, n: usize, model: CouplingModel) -> Result<()> {
    if c.model != model {
        return Err(Error::domain(format!("couplings are tagged {:?}, expected {:?}", c.model, model)));
    }
    if c.len() != n {
        return Err(Error::domain(format!("{} couplings rows for {} atoms", c.len(), n)));
    }
    Ok(())
}

/// Projector form `sum (Omega/2)(e^{i phi_i} s+_i + h.c.) - delta sum n_i + sum_{i<j} V_ij n_i n_j`.
pub fn build_ising_hamiltonian(
    array: &AtomArray,
    drive: &DriveParams,
    couplings: &CouplingMatrix,
) -> Result<DMatrix<Complex64>> {
    let phases = drive.phase_sets(array).swap_remove(0);
    ising_with_phases(array.len(), drive, couplings, &phases)
}

pub(crate) fn ising_with_phases(
    n: usize,
    drive: &DriveParams,
    couplings: &CouplingMatrix,
    phases: &[f64],
) -> Result<DMatrix<Complex64>> {
    drive.check()?;
    let dim = dimension(n)?;
    check_couplings(couplings, n, CouplingModel::Ising)?;
    let mut h = DMatrix::zeros(dim, dim);
    for s in 0..dim {
        let mut diag = 0.0;
        for i in 0..n {
            if s >> i & 1 == 1 {
                diag -= drive.detuning_hz;
                for j in i + 1..n {
                    if s >> j & 1 == 1 {
                        diag += couplings.values[i][j];
                    }
                }
            } else {
                // |..r_i..><..g_i..|
                let up = s | 1 << i;
                let amp = Complex64::from_polar(drive.omega_hz / 2.0, phases[i]);
                h[(up, s)] = amp;
                h[(s, up)] = amp.conj();
            }
        }
        h[(s, s)] = Complex64::new(diag, 0.0);
    }
    Ok(h)
}

/// Spin form `(Omega/2) sum sx + sum (-delta/2 + B_i) sz + sum_{i<j} (V_ij/4) sz sz`,
/// `B_i = sum_j V_ij / 4`. Equals the projector form minus
/// `-N delta/2 + sum_{i<j} V_ij/4`.
pub fn build_ising_spin_form(
    array: &AtomArray,
    drive: &DriveParams,
    couplings: &CouplingMatrix,
) -> Result<DMatrix<Complex64>> {
    drive.check()?;
    let n = array.len();
    let dim = dimension(n)?;
    check_couplings(couplings, n, CouplingModel::Ising)?;
    let z = |s: usize, i: usize| if s >> i & 1 == 1 { 1.0 } else { -1.0 };
    let mut h = DMatrix::zeros(dim, dim);
    for s in 0..dim {
        let mut diag = 0.0;
        for i in 0..n {
            let b: f64 = (0..n).map(|j| couplings.values[i][j]).sum::<f64>() / 4.0;
            diag += (-drive.detuning_hz / 2.0 + b) * z(s, i);
            for j in i + 1..n {
                diag += couplings.values[i][j] / 4.0 * z(s, i) * z(s, j);
            }
            h[(s ^ 1 << i, s)] = Complex64::new(drive.omega_hz / 2.0, 0.0);
        }
        h[(s, s)] = Complex64::new(diag, 0.0);
    }
    Ok(h)
}

/// `sum_{i<j} J_ij (|up_i down_j><down_i up_j| + h.c.)`.
pub fn build_xy_hamiltonian(n: usize, couplings: &CouplingMatrix) -> Result<DMatrix<Complex64>> {
    let dim = dimension(n)?;
    check_couplings(couplings, n, CouplingModel::Xy)?;
    let mut h = DMatrix::zeros(dim, dim);
    for s in 0..dim {
        for i in 0..n {
            for j in 0..n {
                if i != j && s >> i & 1 == 1 && s >> j & 1 == 0 {
                    let t = s ^ (1 << i) ^ (1 << j);
                    h[(t, s)] = Complex64::new(couplings.values[i][j], 0.0);
                }
            }
        }
    }
    Ok(h)
}

/// Number of set bits, i.e. excitations, of each basis state.
pub fn excitation_number(state: usize) -> u32 {
    state.count_ones()
}

/// Parses a configuration written atom 0 first, `1`/`u`/`r` excited, `0`/`d`/`g` not.
pub fn parse_configuration(text: &str) -> Result<(usize, usize)> {
    let mut index = 0;
    let mut n = 0;
    for (i, ch) in text.chars().enumerate() {
        match ch {
            '1' | 'u' | 'r' => index |= 1 << i,
            '0' | 'd' | 'g' => {}
            _ => return Err(Error::parse(text, format!("unexpected `{ch}` in configuration"))),
        }
        n += 1;
    }
    if n == 0 || n > MAX_ATOMS {
        return Err(Error::parse(text, "configuration needs 1 to 14 atoms"));
    }
    Ok((index, n))
}

/// Inverse of [`parse_configuration`] with `u`/`d` letters.
pub fn format_configuration(index: usize, n: usize) -> String {
    (0..n).map(|i| if index >> i & 1 == 1 { 'u' } else { 'd' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn configuration_round_trip() {
        let (s, n) = parse_configuration("udd").unwrap();
        assert_eq!((s, n), (1, 3));
        assert_eq!(format_configuration(s, n), "udd");
        assert!(parse_configuration("ux").is_err());
    }

    #[test]
    fn forms_agree_up_to_offset() {
        let array = AtomArray::new(vec![[0.0, 0.0, 0.0], [0.0, 0.0, 5.0], [4.0, 0.0, 2.0]]).unwrap();
        let c = CouplingMatrix::injected(
            CouplingModel::Ising,
            vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 3.0], vec![2.0, 3.0, 0.0]],
        )
        .unwrap();
        let drive = DriveParams { omega_hz: 0.7, detuning_hz: 0.3, duration_s: 1.0, phases: PhaseMode::Off };
        let a = build_ising_hamiltonian(&array, &drive, &c).unwrap();
        let b = build_ising_spin_form(&array, &drive, &c).unwrap();
        let offset = -3.0 * 0.3 / 2.0 + 6.0 / 4.0;
        let d = a - b - DMatrix::identity(8, 8) * Complex64::new(offset, 0.0);
        assert!(d.norm() < 1e-12);
    }

    #[test]
    fn xy_conserves_excitations() {
        let c = CouplingMatrix::uniform(CouplingModel::Xy, 3, 1.0);
        let h = build_xy_hamiltonian(3, &c).unwrap();
        for s in 0..8 {
            for t in 0..8 {
                if h[(s, t)].norm() > 0.0 {
                    assert_eq!(excitation_number(s), excitation_number(t));
                }
            }
        }
        assert_eq!(h.adjoint(), h);
    }

    #[test]
    fn too_many_atoms() {
        let pos = (0..15).map(|i| [0.0, 0.0, i as f64]).collect();
        assert!(matches!(AtomArray::new(pos), Err(Error::DimensionOverflow(15))));
    }

    #[test]
    fn angle_is_folded() {
        let a = AtomArray::new(vec![[0.0, 0.0, 0.0], [0.0, 0.0, -3.0], [3.0, 0.0, 0.0]]).unwrap();
        assert_eq!(a.theta(0, 1), 0.0);
        assert!((a.theta(0, 2) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }
}
