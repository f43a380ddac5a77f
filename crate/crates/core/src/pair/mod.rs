//! Two-atom pair states, the dipole-dipole Hamiltonian and its spectrum.

mod c6;
mod forster;
mod scan;

use std::collections::HashMap;
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::angular::{dipole_matrix_element, zeeman_shift, SingleAtomFieldConfig, SphericalDipoleComponent};
use crate::atom::Atom;
use crate::error::{Error, Result};
use crate::species::StateLabel;
use crate::units;

pub use c6::{c6_effective_manifold, c6_perturbative, C6Result, LaserPolarization, ManifoldC6};
pub use forster::{
    c3_coefficient, crossover_radius, forster_search, stark_tune_resonance, Crossover, ForsterChannel,
    ResonanceResult, StarkTuneOptions,
};
pub use scan::{scan_distance, write_scan_csv, write_scan_json, ScanRow, SCAN_SCHEMA_VERSION};

/// `|a> (x) |b>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairState {
    pub a: StateLabel,
    pub b: StateLabel,
}

impl PairState {
    pub fn new(a: StateLabel, b: StateLabel) -> Result<Self> {
        if a.species != b.species {
            return Err(Error::domain("pair states must share one species"));
        }
        Ok(PairState { a, b })
    }

    pub fn symmetric(s: StateLabel) -> Self {
        PairState { a: s, b: s }
    }

    pub fn swapped(&self) -> Self {
        PairState { a: self.b, b: self.a }
    }

    pub fn total_mj2(&self) -> i32 {
        self.a.mj2 + self.b.mj2
    }

    /// Unperturbed energy (Hz).
    pub fn energy(&self, atom: &Atom) -> Result<f64> {
        Ok(atom.state_energy(&self.a)? + atom.state_energy(&self.b)?)
    }
}

impl fmt::Display for PairState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}; {}>", self.a, self.b)
    }
}

/// Truncation of a pair basis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairBasisParams {
    /// Keep pair states with `|E_pair - E_target| <= window_hz`.
    pub window_hz: f64,
    /// Per atom, `|n' - n| <= delta_n`.
    pub delta_n: u32,
    /// Per atom, `|l' - l| <= delta_l`.
    pub delta_l: u32,
    /// Keep only `m_j1 + m_j2` equal to the target's.
    pub conserve_m: bool,
    pub max_size: usize,
}

impl Default for PairBasisParams {
    fn default() -> Self {
        PairBasisParams { window_hz: 30e9, delta_n: 4, delta_l: 2, conserve_m: false, max_size: 200_000 }
    }
}

/// Ordered list of pair states around a target.
#[derive(Clone, Debug)]
pub struct PairBasis {
    pub target: PairState,
    pub params: PairBasisParams,
    pub states: Vec<PairState>,
    /// Unperturbed energies relative to the target (Hz).
    pub energies: Vec<f64>,
}

impl PairBasis {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, s: &PairState) -> Option<usize> {
        self.states.iter().position(|x| x == s)
    }

    pub fn target_index(&self) -> usize {
        self.index_of(&self.target).expect("target is always in its basis")
    }
}

fn single_candidates(atom: &Atom, s: &StateLabel, p: &PairBasisParams) -> Vec<(StateLabel, f64)> {
    let t = atom.table();
    let mut out = Vec::new();
    let n_lo = s.n.saturating_sub(p.delta_n).max(1);
    let l_lo = s.l.saturating_sub(p.delta_l);
    for n in n_lo..=s.n + p.delta_n {
        for l in l_lo..=(s.l + p.delta_l).min(n - 1) {
            if n < t.lowest_n(l) {
                continue;
            }
            for j2 in [2 * l + 1, (2 * l).wrapping_sub(1)] {
                if j2 > 2 * l + 1 {
                    continue;
                }
                let level = crate::species::Level { species: s.species, n, l, j2 };
                let e = t.level_energy_hz(&level);
                for st in level.sublevels() {
                    out.push((st, e));
                }
            }
        }
    }
    out
}

/// All pair states within the window around `target`, sorted by energy then label.
pub fn build_pair_basis(atom: &Atom, target: PairState, params: &PairBasisParams) -> Result<PairBasis> {
    if !(params.window_hz >= 0.0) {
        return Err(Error::domain("pair basis window must be >= 0"));
    }
    atom.table().check_state(&target.a)?;
    atom.table().check_state(&target.b)?;
    let e0 = target.energy(atom)?;
    let first = single_candidates(atom, &target.a, params);
    let second = single_candidates(atom, &target.b, params);
    let m_total = target.total_mj2();
    let mut states: Vec<(f64, PairState)> = Vec::new();
    for (a, ea) in &first {
        for (b, eb) in &second {
            if params.conserve_m && a.mj2 + b.mj2 != m_total {
                continue;
            }
            let de = ea + eb - e0;
            if de.abs() <= params.window_hz {
                states.push((de, PairState { a: *a, b: *b }));
            }
        }
    }
    if states.len() > params.max_size {
        return Err(Error::BasisTooLarge { count: states.len(), cap: params.max_size });
    }
    states.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let (energies, states) = states.into_iter().unzip();
    Ok(PairBasis { target, params: *params, states, energies })
}

/// Interatomic geometry and external fields.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryConfig {
    /// Distance in µm.
    pub distance_um: f64,
    /// Angle between the interatomic axis and the quantization axis `z`.
    pub theta: f64,
    pub fields: SingleAtomFieldConfig,
}

impl GeometryConfig {
    pub fn new(distance_um: f64, theta: f64) -> Self {
        GeometryConfig { distance_um, theta, fields: SingleAtomFieldConfig::default() }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.distance_um > 0.1) || !self.distance_um.is_finite() {
            return Err(Error::domain(format!("distance {} µm must exceed 0.1 µm", self.distance_um)));
        }
        if !self.theta.is_finite() {
            return Err(Error::domain("theta must be finite"));
        }
        self.fields.check()
    }
}

/// Angular coefficient of `d1_q1 d2_q2` in `R^3 V_dd` for the axis at `theta` in the xz-plane.
pub fn dipole_dipole_coefficient(q1: i32, q2: i32, theta: f64) -> f64 {
    let n = |q: i32| match q {
        0 => theta.cos(),
        1 => -theta.sin() / std::f64::consts::SQRT_2,
        -1 => theta.sin() / std::f64::consts::SQRT_2,
        _ => 0.0,
    };
    let sign = |k: i32| if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let direct = if q1 == -q2 { sign(q1) } else { 0.0 };
    direct - 3.0 * sign(q1 + q2) * n(-q1) * n(-q2)
}

/// Dipole elements between the distinct single-atom states of a pair basis.
/// Entry `(i, k)` is `<i|d_q|k>` with `q = m_i - m_k`.
pub(crate) struct DipoleTable {
    index: HashMap<StateLabel, usize>,
    d: DMatrix<f64>,
}

impl DipoleTable {
    pub(crate) fn new(atom: &Atom, states: impl IntoIterator<Item = StateLabel>) -> Result<Self> {
        let mut index = HashMap::new();
        let mut list = Vec::new();
        for s in states {
            index.entry(s).or_insert_with(|| {
                list.push(s);
                list.len() - 1
            });
        }
        let n = list.len();
        let mut d = DMatrix::zeros(n, n);
        for i in 0..n {
            for k in 0..n {
                let (a, b) = (&list[i], &list[k]);
                if a.l.abs_diff(b.l) != 1 || (a.mj2 - b.mj2).abs() > 2 || a.j2.abs_diff(b.j2) > 2 {
                    continue;
                }
                let q = SphericalDipoleComponent::new((a.mj2 - b.mj2) / 2)?;
                d[(i, k)] = dipole_matrix_element(atom, a, b, q)?;
            }
        }
        Ok(DipoleTable { index, d })
    }

    pub(crate) fn element(&self, a: &StateLabel, b: &StateLabel) -> f64 {
        match (self.index.get(a), self.index.get(b)) {
            (Some(&i), Some(&k)) => self.d[(i, k)],
            _ => 0.0,
        }
    }

    /// `R^3 <x|V_dd|y>` in Hz·µm^3.
    pub(crate) fn coupling(&self, x: &PairState, y: &PairState, theta: f64) -> f64 {
        let d1 = self.element(&x.a, &y.a);
        if d1 == 0.0 {
            return 0.0;
        }
        let d2 = self.element(&x.b, &y.b);
        if d2 == 0.0 {
            return 0.0;
        }
        let q1 = (x.a.mj2 - y.a.mj2) / 2;
        let q2 = (x.b.mj2 - y.b.mj2) / 2;
        dipole_dipole_coefficient(q1, q2, theta) * d1 * d2 * units::dipole_dipole_hz_um3()
    }
}

fn pair_dipole_table(atom: &Atom, basis: &PairBasis) -> Result<DipoleTable> {
    let mut singles: Vec<StateLabel> = basis.states.iter().flat_map(|p| [p.a, p.b]).collect();
    singles.sort();
    singles.dedup();
    DipoleTable::new(atom, singles)
}

/// `R^3 V_dd` over the basis (Hz·µm^3); real symmetric.
pub fn coupling_matrix(atom: &Atom, basis: &PairBasis, theta: f64) -> Result<DMatrix<f64>> {
    let table = pair_dipole_table(atom, basis)?;
    let n = basis.len();
    let mut c = DMatrix::zeros(n, n);
    for i in 0..n {
        for k in i + 1..n {
            let v = table.coupling(&basis.states[i], &basis.states[k], theta);
            if v != 0.0 {
                c[(i, k)] = v;
                c[(k, i)] = v;
            }
        }
    }
    Ok(c)
}

/// Dipole-dipole matrix (Hz) at the given geometry. Fields are ignored here.
pub fn assemble_vdd(atom: &Atom, basis: &PairBasis, geometry: &GeometryConfig) -> Result<DMatrix<f64>> {
    geometry.check()?;
    let c = coupling_matrix(atom, basis, geometry.theta)?;
    Ok(scale_coupling(&c, geometry.distance_um))
}

fn scale_coupling(c: &DMatrix<f64>, r: f64) -> DMatrix<f64> {
    let r3 = r * r * r;
    c.map(|x| x / r3)
}

/// Single-atom part (Hz, relative to the target): pair energies, Zeeman shifts
/// and Stark couplings `-E d_0` acting on one atom at a time.
pub fn single_atom_part(atom: &Atom, basis: &PairBasis, fields: &SingleAtomFieldConfig) -> Result<DMatrix<f64>> {
    fields.check()?;
    let n = basis.len();
    let mut h = DMatrix::zeros(n, n);
    for (i, p) in basis.states.iter().enumerate() {
        h[(i, i)] = basis.energies[i] + zeeman_shift(&p.a, fields.magnetic_gauss)? + zeeman_shift(&p.b, fields.magnetic_gauss)?;
    }
    if fields.electric_v_cm != 0.0 {
        let table = pair_dipole_table(atom, basis)?;
        let unit = -units::stark_hz_per_ea0_vcm() * fields.electric_v_cm;
        for i in 0..n {
            for k in i + 1..n {
                let (x, y) = (&basis.states[i], &basis.states[k]);
                let d = if x.b == y.b && x.a.mj2 == y.a.mj2 {
                    table.element(&x.a, &y.a)
                } else if x.a == y.a && x.b.mj2 == y.b.mj2 {
                    table.element(&x.b, &y.b)
                } else {
                    0.0
                };
                if d != 0.0 {
                    h[(i, k)] = unit * d;
                    h[(k, i)] = unit * d;
                }
            }
        }
    }
    Ok(h)
}

/// Eigen-decomposition of a pair Hamiltonian at one geometry.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InteractionSpectrum {
    pub geometry: GeometryConfig,
    /// Ascending eigenvalues relative to the unperturbed target (Hz).
    pub eigenvalues: Vec<f64>,
    /// `|<v|target>|`; squares sum to 1.
    pub overlaps: Vec<f64>,
    /// `|<v|laser-coupled pair state>|^2`.
    pub weights: Vec<f64>,
}

impl InteractionSpectrum {
    /// Index of the eigenstate with the largest laser weight.
    pub fn target_branch(&self) -> usize {
        let mut best = 0;
        for (i, w) in self.weights.iter().enumerate() {
            if *w > self.weights[best] {
                best = i;
            }
        }
        best
    }

    pub fn target_energy(&self) -> f64 {
        self.eigenvalues[self.target_branch()]
    }
}

/// Reusable pair Hamiltonian pieces for repeated diagonalization.
pub struct PairHamiltonian {
    basis: PairBasis,
    theta: f64,
    coupling: DMatrix<f64>,
    single: DMatrix<f64>,
    fields: SingleAtomFieldConfig,
    laser: Vec<(usize, f64)>,
}

impl PairHamiltonian {
    pub fn new(atom: &Atom, basis: PairBasis, theta: f64, fields: SingleAtomFieldConfig) -> Result<Self> {
        let coupling = coupling_matrix(atom, &basis, theta)?;
        let single = single_atom_part(atom, &basis, &fields)?;
        let laser = laser_vector(&basis);
        Ok(PairHamiltonian { basis, theta, coupling, single, fields, laser })
    }

    pub fn basis(&self) -> &PairBasis {
        &self.basis
    }

    pub fn matrix(&self, distance_um: f64) -> DMatrix<f64> {
        &self.single + scale_coupling(&self.coupling, distance_um)
    }

    pub fn diagonalize(&self, distance_um: f64) -> Result<InteractionSpectrum> {
        let geometry = GeometryConfig { distance_um, theta: self.theta, fields: self.fields };
        geometry.check()?;
        let h = self.matrix(distance_um);
        let max_abs = h.amax();
        let dim = h.nrows();
        let eig = SymmetricEigen::try_new(h, f64::EPSILON, 0).ok_or(Error::Eigensolver { dim, max_abs })?;
        if eig.eigenvalues.iter().any(|x| !x.is_finite()) {
            return Err(Error::Eigensolver { dim, max_abs });
        }
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&i, &k| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[k]));
        let t = self.basis.target_index();
        let mut eigenvalues = Vec::with_capacity(dim);
        let mut overlaps = Vec::with_capacity(dim);
        let mut weights = Vec::with_capacity(dim);
        for &k in &order {
            let v = eig.eigenvectors.column(k);
            eigenvalues.push(eig.eigenvalues[k]);
            overlaps.push(v[t].abs());
            let amp: f64 = self.laser.iter().map(|&(i, c)| c * v[i]).sum();
            weights.push(amp * amp);
        }
        Ok(InteractionSpectrum { geometry, eigenvalues, overlaps, weights })
    }
}

/// Laser-coupled pair state: the target, symmetrized with its swap when distinct.
fn laser_vector(basis: &PairBasis) -> Vec<(usize, f64)> {
    let t = basis.target_index();
    match basis.index_of(&basis.target.swapped()) {
        Some(s) if s != t => vec![(t, std::f64::consts::FRAC_1_SQRT_2), (s, std::f64::consts::FRAC_1_SQRT_2)],
        _ => vec![(t, 1.0)],
    }
}

/// Diagonalizes single-atom terms plus `V_dd` at `geometry`.
pub fn diagonalize(atom: &Atom, basis: &PairBasis, geometry: &GeometryConfig) -> Result<InteractionSpectrum> {
    geometry.check()?;
    PairHamiltonian::new(atom, basis.clone(), geometry.theta, geometry.fields)?.diagonalize(geometry.distance_um)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::species::Species;

    fn rb() -> Atom {
        Atom::bundled(Species::Rb87)
    }

    #[test]
    fn axis_coefficients_at_theta_zero() {
        assert!((dipole_dipole_coefficient(0, 0, 0.0) + 2.0).abs() < 1e-15);
        assert!((dipole_dipole_coefficient(1, -1, 0.0) + 1.0).abs() < 1e-15);
        assert!((dipole_dipole_coefficient(-1, 1, 0.0) + 1.0).abs() < 1e-15);
        assert_eq!(dipole_dipole_coefficient(1, 0, 0.0), 0.0);
    }

    #[test]
    fn zero_window_is_degenerate_manifold() {
        let s: StateLabel = "Rb:62D3/2:3/2".parse().unwrap();
        let p = PairBasisParams { window_hz: 0.0, ..Default::default() };
        let b = build_pair_basis(&rb(), PairState::symmetric(s), &p).unwrap();
        assert_eq!(b.len(), 16);
        assert!(b.states.iter().all(|x| x.a.level() == s.level() && x.b.level() == s.level()));
    }

    #[test]
    fn basis_cap_reports_count() {
        let s: StateLabel = "Rb:62D3/2:3/2".parse().unwrap();
        let p = PairBasisParams { max_size: 3, ..Default::default() };
        match build_pair_basis(&rb(), PairState::symmetric(s), &p) {
            Err(Error::BasisTooLarge { count, cap: 3 }) => assert!(count > 3),
            other => panic!("expected BasisTooLarge, got {other:?}"),
        }
    }

    #[test]
    fn mixed_species_rejected() {
        let a: StateLabel = "Rb:60S1/2".parse().unwrap();
        let b: StateLabel = "Cs:60S1/2".parse().unwrap();
        assert!(PairState::new(a, b).is_err());
    }

    #[test]
    fn geometry_below_validity_rejected() {
        assert!(GeometryConfig::new(0.05, 0.0).check().is_err());
    }
}
