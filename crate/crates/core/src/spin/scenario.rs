use serde::{Deserialize, Serialize};

use super::{
    collapse_revival, evolve, fit_rabi_frequency, format_configuration, parse_configuration, sample_measurements,
    AtomArray, CollapseRevival, CouplingMatrix, CouplingModel, DriveParams, EvolutionResult, InitialState, NoiseParams,
    ShotTable, SpinModel,
};
use crate::atom::Atom;
use crate::error::{Error, Result};
use crate::pair::{c3_coefficient, c6_effective_manifold, LaserPolarization, PairBasisParams, PairState};
use crate::species::{Species, StateLabel};

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

/// Where the pair couplings come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingSpec {
    /// Full symmetric matrix in Hz.
    Injected(Vec<Vec<f64>>),
    /// Isotropic `coefficient / R^k`, coefficient in Hz·µm^k.
    Analytic { coefficient: f64 },
    /// Effective manifold `C6(theta_ij)` of a Rydberg state.
    C6State {
        state: StateLabel,
        #[serde(default)]
        polarization: LaserPolarization,
    },
    /// Exchange `C3(theta_ij)` between `|ab>` and `|ba>`.
    C3Exchange { a: StateLabel, b: StateLabel },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start_s: f64,
    pub stop_s: f64,
    pub points: usize,
}

impl TimeGrid {
    pub fn times(&self) -> Result<Vec<f64>> {
        if self.points < 2 || !(self.stop_s > self.start_s) || self.start_s < 0.0 {
            return Err(Error::Scenario { field: "times".into(), reason: "need start >= 0, stop > start, points >= 2".into() });
        }
        let dt = (self.stop_s - self.start_s) / (self.points - 1) as f64;
        Ok((0..self.points).map(|i| self.start_s + dt * i as f64).collect())
    }
}

/// A dynamics run described in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    pub positions_um: Vec<[f64; 3]>,
    pub model: CouplingModel,
    pub couplings: CouplingSpec,
    /// Required for the Ising model.
    #[serde(default)]
    pub drive: Option<DriveParams>,
    #[serde(default)]
    pub noise: NoiseParams,
    /// Initial configuration, atom 0 first (`u`/`d`).
    pub initial: String,
    pub times: TimeGrid,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub shots: usize,
}

const REQUIRED: [&str; 7] = ["schema_version", "name", "positions_um", "model", "couplings", "initial", "times"];

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Scenario { field: "<root>".into(), reason: "expected a JSON object".into() })?;
        for key in REQUIRED {
            if !obj.contains_key(key) {
                return Err(Error::Scenario { field: key.into(), reason: "missing".into() });
            }
        }
        for key in obj.keys() {
            let s = serde_json::from_value::<Scenario>(serde_json::Value::Object(
                std::iter::once((key.clone(), obj[key].clone())).collect(),
            ));
            if let Err(e) = s {
                let msg = e.to_string();
                if !msg.starts_with("missing field") {
                    return Err(Error::Scenario { field: key.clone(), reason: msg });
                }
            }
        }
        let s: Scenario = serde_json::from_value(value)
            .map_err(|e| Error::Scenario { field: "<document>".into(), reason: e.to_string() })?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let field = |f: &str, e: Error| Error::Scenario { field: f.into(), reason: e.to_string() };
        if self.schema_version != SCENARIO_SCHEMA_VERSION {
            return Err(Error::Scenario {
                field: "schema_version".into(),
                reason: format!("unsupported version {}", self.schema_version),
            });
        }
        AtomArray::new(self.positions_um.clone()).map_err(|e| field("positions_um", e))?;
        let (_, n) = parse_configuration(&self.initial).map_err(|e| field("initial", e))?;
        if n != self.positions_um.len() {
            return Err(Error::Scenario {
                field: "initial".into(),
                reason: format!("{} atoms in configuration, {} positions", n, self.positions_um.len()),
            });
        }
        if self.model == CouplingModel::Ising && self.drive.is_none() {
            return Err(Error::Scenario { field: "drive".into(), reason: "required for the ising model".into() });
        }
        self.noise.check().map_err(|e| field("noise", e))?;
        self.times.times()?;
        Ok(())
    }

    pub fn array(&self) -> Result<AtomArray> {
        AtomArray::new(self.positions_um.clone())
    }

    /// Pair couplings, computing them from Rydberg states when requested.
    pub fn coupling_matrix(&self, atom_for: &dyn Fn(Species) -> Result<Atom>) -> Result<CouplingMatrix> {
        let array = self.array()?;
        let field = |e: Error| Error::Scenario { field: "couplings".into(), reason: e.to_string() };
        match &self.couplings {
            CouplingSpec::Injected(v) => CouplingMatrix::injected(self.model, v.clone()).map_err(field),
            CouplingSpec::Analytic { coefficient } => CouplingMatrix::analytic(&array, self.model, |_| Ok(*coefficient)),
            CouplingSpec::C6State { state, polarization } => {
                if self.model != CouplingModel::Ising {
                    return Err(field(Error::domain("c6_state couplings need the ising model")));
                }
                let atom = atom_for(state.species)?;
                let params = PairBasisParams::default();
                CouplingMatrix::analytic(&array, self.model, |theta| {
                    Ok(c6_effective_manifold(&atom, state, theta, *polarization, &params)?.weighted_ghz_um6 * 1e9)
                })
            }
            CouplingSpec::C3Exchange { a, b } => {
                if self.model != CouplingModel::Xy {
                    return Err(field(Error::domain("c3_exchange couplings need the xy model")));
                }
                let atom = atom_for(a.species)?;
                let from = PairState::new(*a, *b).map_err(field)?;
                CouplingMatrix::analytic(&array, self.model, |theta| {
                    Ok(c3_coefficient(&atom, &from, &from.swapped(), theta)? * 1e9)
                })
            }
        }
    }
}

/// Peak population of one configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigurationPeak {
    pub configuration: String,
    pub peak: f64,
    pub peak_time_s: f64,
}

/// Results of [`run_scenario`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutput {
    pub schema_version: u32,
    pub scenario: Scenario,
    pub couplings: CouplingMatrix,
    pub result: EvolutionResult,
    pub peaks: Vec<ConfigurationPeak>,
    /// Ising runs from the all-ground state: fitted frequency of `1 - P(initial)`.
    pub collective_frequency_hz: Option<f64>,
    /// XY runs: autocorrelation signature of the initial-configuration population.
    pub collapse_revival: Option<CollapseRevival>,
    pub shots: Option<ShotTable>,
}

pub fn run_scenario(s: &Scenario, atom_for: &dyn Fn(Species) -> Result<Atom>) -> Result<ScenarioOutput> {
    s.validate()?;
    let array = s.array()?;
    let couplings = s.coupling_matrix(atom_for)?;
    let (initial, n) = parse_configuration(&s.initial)?;
    let times = s.times.times()?;
    let model = match s.model {
        CouplingModel::Ising => SpinModel::ising(array, s.drive.clone().expect("validated"), couplings.clone()),
        CouplingModel::Xy => SpinModel::xy(array, couplings.clone()),
    };
    let result = evolve(&model, &InitialState::Configuration(initial), &times, &s.noise)?;
    let peaks = (0..1usize << n)
        .map(|c| {
            let series = result.series(c);
            let (k, peak) = series.iter().enumerate().fold((0, f64::NEG_INFINITY), |b, (k, &x)| if x > b.1 { (k, x) } else { b });
            ConfigurationPeak { configuration: format_configuration(c, n), peak, peak_time_s: times[k] }
        })
        .collect();
    let collective_frequency_hz = match (&s.drive, s.model, initial) {
        (Some(d), CouplingModel::Ising, 0) if d.omega_hz > 0.0 => {
            let y: Vec<f64> = result.series(0).iter().map(|p| 1.0 - p).collect();
            Some(fit_rabi_frequency(&times, &y, 0.2 * d.omega_hz, (n as f64).sqrt() * 2.0 * d.omega_hz)?)
        }
        _ => None,
    };
    let collapse_revival = if s.model == CouplingModel::Xy { collapse_revival(&result.series(initial)) } else { None };
    let shots = if s.shots > 0 { Some(sample_measurements(&result, s.shots, &s.noise, s.seed)?) } else { None };
    Ok(ScenarioOutput {
        schema_version: SCENARIO_SCHEMA_VERSION,
        scenario: s.clone(),
        couplings,
        result,
        peaks,
        collective_frequency_hz,
        collapse_revival,
        shots,
    })
}

pub const BUNDLED_SCENARIOS: [(&str, &str); 3] = [
    ("blockade2", include_str!("../../scenarios/blockade2.json")),
    ("ising3", include_str!("../../scenarios/ising3.json")),
    ("xychain3", include_str!("../../scenarios/xychain3.json")),
];

pub fn bundled_scenario(name: &str) -> Result<Scenario> {
    let (_, text) = BUNDLED_SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::NotFound(format!("bundled scenario `{name}`")))?;
    Scenario::from_json(text)
}

/// Atoms 1 and 3 on the `z` axis 12 µm apart, atom 2 completing the equilateral
/// triangle. Couplings `(V12, V23, V13)` in Hz, start from all ground.
pub fn simulate_three_atom_ising(
    omega_hz: f64,
    couplings_hz: (f64, f64, f64),
    times: &[f64],
    noise: &NoiseParams,
) -> Result<EvolutionResult> {
    let side = 12.0;
    let array = AtomArray::new(vec![
        [0.0, 0.0, 0.0],
        [side * 60f64.to_radians().sin(), 0.0, side / 2.0],
        [0.0, 0.0, side],
    ])?;
    let (v12, v23, v13) = couplings_hz;
    let c = CouplingMatrix::injected(
        CouplingModel::Ising,
        vec![vec![0.0, v12, v13], vec![v12, 0.0, v23], vec![v13, v23, 0.0]],
    )?;
    let drive = DriveParams::resonant(omega_hz, times.last().copied().unwrap_or(0.0));
    evolve(&SpinModel::ising(array, drive, c), &InitialState::Configuration(0), times, noise)
}

/// Three atoms spaced `spacing_um` along `z`, exchange `c3_hz_um3 / R^3`, from `|up down down>`.
pub fn simulate_xy_chain(c3_hz_um3: f64, spacing_um: f64, times: &[f64], noise: &NoiseParams) -> Result<EvolutionResult> {
    let array = AtomArray::chain_z(3, spacing_um)?;
    let c = CouplingMatrix::analytic(&array, CouplingModel::Xy, |_| Ok(c3_hz_um3))?;
    evolve(&SpinModel::xy(array, c), &InitialState::Configuration(1), times, noise)
}
