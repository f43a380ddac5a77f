use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{build_xy_hamiltonian, ising_with_phases, AtomArray, CouplingMatrix, DriveParams, SpinModel};
use crate::error::{Error, Result};

/// Error channels. Rates in 1/s, the rest are probabilities.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseParams {
    /// Amplitude damping of each atom's excited component.
    pub damping_rate: f64,
    /// Pure dephasing of each atom.
    pub dephasing_rate: f64,
    /// Probability an atom is not prepared; it stays dark and reads as not excited.
    pub prep_error: f64,
    /// Probability a non-excited atom is read as excited.
    pub false_loss: f64,
    /// Probability an excited atom is read as not excited.
    pub false_presence: f64,
    /// Probability per atom that the shot is lost.
    pub loss: f64,
}

impl NoiseParams {
    pub fn ideal() -> Self {
        NoiseParams::default()
    }

    /// 5% preparation error, 5% loss, 3%/1% detection errors, no damping.
    pub fn typical() -> Self {
        NoiseParams { prep_error: 0.05, loss: 0.05, false_loss: 0.03, false_presence: 0.01, ..Default::default() }
    }

    pub fn check(&self) -> Result<()> {
        for (name, p) in [
            ("prep_error", self.prep_error),
            ("false_loss", self.false_loss),
            ("false_presence", self.false_presence),
            ("loss", self.loss),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::domain(format!("{name} = {p} is not a probability")));
            }
        }
        if !(self.damping_rate >= 0.0) || !(self.dephasing_rate >= 0.0) {
            return Err(Error::domain("damping and dephasing rates must be >= 0"));
        }
        Ok(())
    }

    fn coherent(&self) -> bool {
        self.damping_rate == 0.0 && self.dephasing_rate == 0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum InitialState {
    /// Basis configuration index.
    Configuration(usize),
    /// Arbitrary normalized amplitudes.
    Amplitudes(Vec<Complex64>),
}

/// Populations of every configuration at every time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionResult {
    pub n_atoms: usize,
    /// Seconds.
    pub times: Vec<f64>,
    /// `populations[t][config]`, summing to 1.
    pub populations: Vec<Vec<f64>>,
    /// After detection errors and shot loss; sums to `retained_fraction`.
    pub measured: Vec<Vec<f64>>,
    pub retained_fraction: f64,
}

impl EvolutionResult {
    pub fn series(&self, config: usize) -> Vec<f64> {
        self.populations.iter().map(|p| p[config]).collect()
    }

    pub fn measured_series(&self, config: usize) -> Vec<f64> {
        self.measured.iter().map(|p| p[config]).collect()
    }

    /// Probability of exactly `k` excitations.
    pub fn excitation_series(&self, k: u32) -> Vec<f64> {
        self.populations
            .iter()
            .map(|p| p.iter().enumerate().filter(|(s, _)| s.count_ones() == k).map(|(_, x)| x).sum())
            .collect()
    }

    /// Mean and variance of the excitation number at each time.
    pub fn excitation_moments(&self) -> Vec<(f64, f64)> {
        self.populations
            .iter()
            .map(|p| {
                let m: f64 = p.iter().enumerate().map(|(s, x)| s.count_ones() as f64 * x).sum();
                let m2: f64 = p.iter().enumerate().map(|(s, x)| (s.count_ones() as f64).powi(2) * x).sum();
                (m, m2 - m * m)
            })
            .collect()
    }

    /// Probability that atom `i` is excited.
    pub fn marginal(&self, i: usize) -> Vec<f64> {
        self.populations
            .iter()
            .map(|p| p.iter().enumerate().filter(|(s, _)| s >> i & 1 == 1).map(|(_, x)| x).sum())
            .collect()
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::domain("empty time grid"));
    }
    if times[0] < 0.0 || times.windows(2).any(|w| !(w[1] >= w[0])) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::domain("time grid must be finite, non-negative and non-decreasing"));
    }
    Ok(())
}

/// Populations of `psi0` under `h` (Hz) at each time. Coherent evolution is exact
/// through the eigen-decomposition; with damping or dephasing the Lindblad
/// equation is integrated with fixed RK4 steps.
pub fn evolve_hamiltonian(
    h: &DMatrix<Complex64>,
    psi0: &DVector<Complex64>,
    times: &[f64],
    noise: &NoiseParams,
) -> Result<Vec<Vec<f64>>> {
    check_times(times)?;
    noise.check()?;
    let dim = h.nrows();
    if h.ncols() != dim || psi0.len() != dim || !dim.is_power_of_two() {
        return Err(Error::domain("Hamiltonian and state dimensions disagree"));
    }
    let norm = psi0.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(norm));
    }
    if noise.coherent() {
        Ok(coherent(h, psi0, times))
    } else {
        lindblad(h, psi0, times, noise)
    }
}

/// State vectors `exp(-2 pi i H t) psi0` at each time, exact through the eigen-decomposition of `h`.
pub fn propagate_coherent(h: &DMatrix<Complex64>, psi0: &DVector<Complex64>, times: &[f64]) -> Vec<DVector<Complex64>> {
    let eig = SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let c = v.adjoint() * psi0;
    let dim = h.nrows();
    times
        .iter()
        .map(|&t| {
            let phased = DVector::from_iterator(
                dim,
                c.iter().zip(eig.eigenvalues.iter()).map(|(ck, &e)| ck * Complex64::from_polar(1.0, -std::f64::consts::TAU * e * t)),
            );
            v * phased
        })
        .collect()
}

fn coherent(h: &DMatrix<Complex64>, psi0: &DVector<Complex64>, times: &[f64]) -> Vec<Vec<f64>> {
    propagate_coherent(h, psi0, times).iter().map(|psi| psi.iter().map(|a| a.norm_sqr()).collect()).collect()
}

fn lindblad(h: &DMatrix<Complex64>, psi0: &DVector<Complex64>, times: &[f64], noise: &NoiseParams) -> Result<Vec<Vec<f64>>> {
    let dim = h.nrows();
    let n = dim.trailing_zeros() as usize;
    if n > 8 {
        return Err(Error::domain(format!("master-equation evolution is limited to 8 atoms, got {n}")));
    }
    let h_norm = (0..dim).map(|i| h.row(i).iter().map(|x| x.norm()).sum::<f64>()).fold(0.0, f64::max);
    let scale = std::f64::consts::TAU * h_norm + (noise.damping_rate + noise.dephasing_rate) * n as f64;
    let dt_max = 0.02 / scale.max(f64::MIN_POSITIVE);
    let minus_i_h = h.map(|x| x * Complex64::new(0.0, -std::f64::consts::TAU));
    let deriv = |rho: &DMatrix<Complex64>| -> DMatrix<Complex64> {
        let hr = &minus_i_h * rho;
        let mut d = &hr + hr.adjoint();
        for s in 0..dim {
            for t in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    let (bs, bt) = ((s >> i & 1) as f64, (t >> i & 1) as f64);
                    if noise.damping_rate > 0.0 {
                        if bs == 0.0 && bt == 0.0 {
                            acc += rho[(s | 1 << i, t | 1 << i)] * noise.damping_rate;
                        }
                        acc -= rho[(s, t)] * (0.5 * noise.damping_rate * (bs + bt));
                    }
                    if noise.dephasing_rate > 0.0 {
                        acc += rho[(s, t)] * (noise.dephasing_rate * (bs * bt - 0.5 * (bs + bt)));
                    }
                }
                d[(s, t)] += acc;
            }
        }
        d
    };
    let mut rho = psi0 * psi0.adjoint();
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let span = t - now;
        if span > 0.0 {
            let steps = (span / dt_max).ceil();
            if steps > 1e8 {
                return Err(Error::domain(format!(
                    "master equation needs {steps:.3e} RK4 steps (dt <= {dt_max:.3e} s over {span:.3e} s)"
                )));
            }
            let steps = steps as usize;
            let dt = span / steps as f64;
            for _ in 0..steps {
                let k1 = deriv(&rho);
                let k2 = deriv(&(&rho + &k1 * Complex64::new(dt / 2.0, 0.0)));
                let k3 = deriv(&(&rho + &k2 * Complex64::new(dt / 2.0, 0.0)));
                let k4 = deriv(&(&rho + &k3 * Complex64::new(dt, 0.0)));
                rho += (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4) * Complex64::new(dt / 6.0, 0.0);
            }
            now = t;
        }
        out.push((0..dim).map(|s| rho[(s, s)].re.max(0.0)).collect());
    }
    Ok(out)
}

impl SpinModel {
    pub fn n_atoms(&self) -> usize {
        self.array().len()
    }

    pub fn array(&self) -> &AtomArray {
        match self {
            SpinModel::Ising { array, .. } | SpinModel::Xy { array, .. } => array,
        }
    }

    /// Hamiltonians of the sub-array `active`, one per phase realization.
    pub fn hamiltonians(&self, active: &[usize]) -> Result<Vec<DMatrix<Complex64>>> {
        match self {
            SpinModel::Ising { array, drive, couplings } => {
                let c = couplings.restrict(active);
                drive
                    .phase_sets(array)
                    .iter()
                    .map(|phases| {
                        let p: Vec<f64> = active.iter().map(|&i| phases[i]).collect();
                        ising_with_phases(active.len(), drive, &c, &p)
                    })
                    .collect()
            }
            SpinModel::Xy { couplings, .. } => Ok(vec![build_xy_hamiltonian(active.len(), &couplings.restrict(active))?]),
        }
    }

    pub fn ising(array: AtomArray, drive: DriveParams, couplings: CouplingMatrix) -> Self {
        SpinModel::Ising { array, drive, couplings }
    }

    pub fn xy(array: AtomArray, couplings: CouplingMatrix) -> Self {
        SpinModel::Xy { array, couplings }
    }
}

/// Subsets of atoms that are prepared, with their probabilities.
fn preparation_subsets(n: usize, eps: f64) -> Vec<(f64, Vec<usize>)> {
    if eps == 0.0 {
        return vec![(1.0, (0..n).collect())];
    }
    let mut out = Vec::new();
    for mask in (0..1usize << n).rev() {
        let k = mask.count_ones() as i32;
        let w = (1.0 - eps).powi(k) * eps.powi(n as i32 - k);
        if w > 1e-15 {
            out.push((w, (0..n).filter(|i| mask >> i & 1 == 1).collect()));
        }
    }
    out
}

/// Evolves `model` from `initial`, applying preparation errors as an exact
/// mixture over prepared sub-arrays and detection/loss on the readout.
pub fn evolve(model: &SpinModel, initial: &InitialState, times: &[f64], noise: &NoiseParams) -> Result<EvolutionResult> {
    noise.check()?;
    check_times(times)?;
    let n = model.n_atoms();
    let dim = 1usize << n;
    let mut populations = vec![vec![0.0; dim]; times.len()];
    match initial {
        InitialState::Amplitudes(a) => {
            if noise.prep_error > 0.0 {
                return Err(Error::domain("preparation errors need a configuration initial state"));
            }
            if a.len() != dim {
                return Err(Error::domain(format!("{} amplitudes for {} atoms", a.len(), n)));
            }
            let psi0 = DVector::from_column_slice(a);
            let hs = model.hamiltonians(&(0..n).collect::<Vec<_>>())?;
            accumulate(&mut populations, &hs, &psi0, times, noise, 1.0, |s| s)?;
        }
        InitialState::Configuration(c) => {
            if *c >= dim {
                return Err(Error::domain(format!("configuration {c} outside {n}-atom space")));
            }
            for (w, active) in preparation_subsets(n, noise.prep_error) {
                let sub: usize = active.iter().enumerate().filter(|(_, &i)| c >> i & 1 == 1).map(|(k, _)| 1 << k).sum();
                let mut psi0 = DVector::zeros(1 << active.len());
                psi0[sub] = Complex64::new(1.0, 0.0);
                let embed = |s: usize| -> usize {
                    active.iter().enumerate().filter(|(k, _)| s >> k & 1 == 1).map(|(_, &i)| 1 << i).sum()
                };
                if active.is_empty() {
                    for p in populations.iter_mut() {
                        p[0] += w;
                    }
                    continue;
                }
                let hs = model.hamiltonians(&active)?;
                accumulate(&mut populations, &hs, &psi0, times, noise, w, embed)?;
            }
            let total: f64 = populations[0].iter().sum();
            for p in populations.iter_mut() {
                p.iter_mut().for_each(|x| *x /= total);
            }
        }
    }
    let retained = (1.0 - noise.loss).powi(n as i32);
    let measured = populations
        .iter()
        .map(|p| detection_channel(p, n, noise.false_loss, noise.false_presence).into_iter().map(|x| x * retained).collect())
        .collect();
    Ok(EvolutionResult { n_atoms: n, times: times.to_vec(), populations, measured, retained_fraction: retained })
}

fn accumulate(
    populations: &mut [Vec<f64>],
    hs: &[DMatrix<Complex64>],
    psi0: &DVector<Complex64>,
    times: &[f64],
    noise: &NoiseParams,
    weight: f64,
    embed: impl Fn(usize) -> usize,
) -> Result<()> {
    let w = weight / hs.len() as f64;
    for h in hs {
        let pops = evolve_hamiltonian(h, psi0, times, noise)?;
        for (acc, p) in populations.iter_mut().zip(pops) {
            for (s, x) in p.into_iter().enumerate() {
                acc[embed(s)] += w * x;
            }
        }
    }
    Ok(())
}

/// Per-atom readout flips: not-excited read as excited with `false_loss`,
/// excited read as not excited with `false_presence`.
pub(crate) fn detection_channel(p: &[f64], n: usize, false_loss: f64, false_presence: f64) -> Vec<f64> {
    let mut cur = p.to_vec();
    for i in 0..n {
        let bit = 1 << i;
        let mut next = vec![0.0; cur.len()];
        for (s, &x) in cur.iter().enumerate() {
            if s & bit == 0 {
                next[s] += x * (1.0 - false_loss);
                next[s | bit] += x * false_loss;
            } else {
                next[s] += x * (1.0 - false_presence);
                next[s & !bit] += x * false_presence;
            }
        }
        cur = next;
    }
    cur
}

/// Simulated single-shot readouts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotTable {
    pub seed: u64,
    pub shots: usize,
    pub times: Vec<f64>,
    /// `outcomes[t][shot]`: measured configuration, or `None` if the shot was lost.
    pub outcomes: Vec<Vec<Option<usize>>>,
}

impl ShotTable {
    /// Fraction of all shots at time index `t` that read `config`.
    pub fn frequency(&self, t: usize, config: usize) -> f64 {
        self.outcomes[t].iter().filter(|o| **o == Some(config)).count() as f64 / self.shots as f64
    }
}

/// Draws `shots` readouts per time from the true populations of `result`.
pub fn sample_measurements(result: &EvolutionResult, shots: usize, noise: &NoiseParams, seed: u64) -> Result<ShotTable> {
    if shots == 0 {
        return Err(Error::domain("shots must be positive"));
    }
    noise.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = result.n_atoms;
    let mut outcomes = Vec::with_capacity(result.times.len());
    for p in &result.populations {
        let mut cdf = Vec::with_capacity(p.len());
        let mut acc = 0.0;
        for x in p {
            acc += x;
            cdf.push(acc);
        }
        let mut row = Vec::with_capacity(shots);
        for _ in 0..shots {
            let u: f64 = rng.random::<f64>() * acc;
            let mut s = cdf.partition_point(|&c| c <= u).min(p.len() - 1);
            let mut lost = false;
            for i in 0..n {
                lost |= rng.random::<f64>() < noise.loss;
                let flip = if s >> i & 1 == 1 { noise.false_presence } else { noise.false_loss };
                if rng.random::<f64>() < flip {
                    s ^= 1 << i;
                }
            }
            row.push(if lost { None } else { Some(s) });
        }
        outcomes.push(row);
    }
    Ok(ShotTable { seed, shots, times: result.times.clone(), outcomes })
}
