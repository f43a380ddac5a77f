use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rydberg_core::pair::LaserPolarization;
use rydberg_core::StateLabel;
use serde::{Deserialize, Serialize};

fn state(s: &str) -> Result<StateLabel, String> {
    s.parse::<StateLabel>().map_err(|e| e.to_string())
}

/// Rydberg-atom interaction calculators and few-atom dynamics.
#[derive(Parser, Clone, Debug, Serialize, Deserialize)]
#[command(name = "rydberg", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct GlobalArgs {
    /// Species data file (defaults to the bundled table).
    #[arg(long, global = true)]
    pub species_file: Option<PathBuf>,
    /// Radial-integral cache file.
    #[arg(long, global = true, env = "RYDBERG_CACHE")]
    pub cache: Option<PathBuf>,
    /// Print JSON instead of a table.
    #[arg(long, global = true)]
    pub json: bool,
    /// Output directory [default: rydberg-out].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Overrides the scenario seed when given.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarization {
    SigmaPlus,
    SigmaMinus,
    Matching,
}

impl From<Polarization> for LaserPolarization {
    fn from(p: Polarization) -> Self {
        match p {
            Polarization::SigmaPlus => LaserPolarization::SigmaPlus,
            Polarization::SigmaMinus => LaserPolarization::SigmaMinus,
            Polarization::Matching => LaserPolarization::Matching,
        }
    }
}

#[derive(Subcommand, Clone, Debug, Serialize, Deserialize)]
pub enum Command {
    /// Energy, size, lifetime and polarizability of one state.
    State {
        #[arg(value_parser = state)]
        spec: StateLabel,
        /// Blackbody temperature in K.
        #[arg(long, default_value_t = 300.0)]
        temperature: f64,
    },
    /// Van der Waals C6 of |spec, spec>, optionally over a range of n.
    C6 {
        #[arg(value_parser = state)]
        spec: StateLabel,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long, default_value_t = 30.0)]
        window_ghz: f64,
        #[arg(long, default_value_t = 4)]
        delta_n: u32,
        #[arg(long, default_value_t = 2)]
        delta_l: u32,
        #[arg(long, value_enum, default_value_t = Polarization::SigmaPlus)]
        polarization: Polarization,
        /// Last n of a scan starting at the state's n.
        #[arg(long)]
        n_to: Option<u32>,
        #[arg(long, default_value_t = 1)]
        n_step: u32,
    },
    /// C3 between |a b> and |c d> (default: the exchange |b a>).
    C3 {
        #[arg(value_parser = state)]
        a: StateLabel,
        #[arg(value_parser = state)]
        b: StateLabel,
        #[arg(long, value_parser = state, requires = "target_b")]
        target_a: Option<StateLabel>,
        #[arg(long, value_parser = state, requires = "target_a")]
        target_b: Option<StateLabel>,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        /// Shift every n by 0, step, ... until the first state reaches this n.
        #[arg(long)]
        n_to: Option<u32>,
        #[arg(long, default_value_t = 1)]
        n_step: u32,
    },
    /// Förster channels of |spec, spec> and optionally their Stark-tuned resonance.
    Forster {
        #[arg(value_parser = state)]
        spec: StateLabel,
        #[arg(long, default_value_t = 200.0)]
        window_mhz: f64,
        /// Locate the field tuning the closest channel to resonance.
        #[arg(long)]
        resonance: bool,
        #[arg(long, default_value_t = 1.0)]
        field_max: f64,
        #[arg(long, default_value_t = 10.0)]
        distance_um: f64,
    },
    /// Single-atom Stark map around spec.
    Starkmap {
        #[arg(value_parser = state)]
        spec: StateLabel,
        #[arg(long, default_value_t = 1.0)]
        field_max: f64,
        #[arg(long, default_value_t = 51)]
        steps: usize,
        #[arg(long, default_value_t = 4)]
        delta_n: u32,
        /// Mark the Förster resonance field of the closest channel.
        #[arg(long)]
        forster: bool,
    },
    /// Pair spectrum versus distance.
    Scan {
        #[arg(value_parser = state)]
        spec: StateLabel,
        /// Second atom (defaults to spec).
        #[arg(long, value_parser = state)]
        partner: Option<StateLabel>,
        #[arg(long, default_value_t = 5.0)]
        r_min: f64,
        #[arg(long, default_value_t = 20.0)]
        r_max: f64,
        #[arg(long, default_value_t = 31)]
        points: usize,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long, default_value_t = 0.0)]
        field: f64,
        #[arg(long, default_value_t = 10.0)]
        window_ghz: f64,
        #[arg(long, default_value_t = 2)]
        delta_n: u32,
        #[arg(long, default_value_t = 2)]
        delta_l: u32,
        /// Keep all total m_j (needed away from theta = 0).
        #[arg(long)]
        all_m: bool,
        /// Only export eigenstates with at least this laser weight.
        #[arg(long, default_value_t = 0.01)]
        min_weight: f64,
    },
    /// Spin dynamics from a scenario file or a bundled scenario.
    Dynamics {
        #[arg(required_unless_present = "bundled", conflicts_with = "bundled")]
        scenario: Option<PathBuf>,
        #[arg(long)]
        bundled: Option<String>,
    },
    /// Closed-form regime quantities.
    Regimes {
        #[arg(long)]
        c6_hz_um6: Option<f64>,
        #[arg(long)]
        omega_hz: Option<f64>,
        #[arg(long)]
        omega_red_hz: Option<f64>,
        #[arg(long)]
        omega_blue_hz: Option<f64>,
        #[arg(long)]
        delta_hz: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        two_photon_detuning_hz: f64,
        #[arg(long, default_value_t = 0.0)]
        gamma_hz: f64,
        #[arg(long)]
        dress_omega_hz: Option<f64>,
        #[arg(long)]
        dress_delta_hz: Option<f64>,
    },
    /// Re-run the command recorded in a manifest.
    Replay { manifest: PathBuf },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::State { .. } => "state",
            Command::C6 { .. } => "c6",
            Command::C3 { .. } => "c3",
            Command::Forster { .. } => "forster",
            Command::Starkmap { .. } => "starkmap",
            Command::Scan { .. } => "scan",
            Command::Dynamics { .. } => "dynamics",
            Command::Regimes { .. } => "regimes",
            Command::Replay { .. } => "replay",
        }
    }
}
