//! Alkali species constants, quantum-defect series and state labels.

mod data;
pub(crate) mod label;
pub mod properties;

pub use data::{DefectEntry, SpeciesData, SpeciesTable, BUNDLED_SPECIES_FILE};
pub use label::{Level, StateLabel};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Supported alkali species.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Species {
    Rb87,
    Cs133,
}

impl Species {
    pub fn id(self) -> &'static str {
        match self {
            Species::Rb87 => "Rb87",
            Species::Cs133 => "Cs133",
        }
    }

    /// Short chemical symbol used in state specs (`Rb:80S1/2`).
    pub fn symbol(self) -> &'static str {
        match self {
            Species::Rb87 => "Rb",
            Species::Cs133 => "Cs",
        }
    }
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Species {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Rb" | "Rb87" | "87Rb" => Ok(Species::Rb87),
            "Cs" | "Cs133" | "133Cs" => Ok(Species::Cs133),
            other => Err(Error::parse(other, "unknown species (expected Rb or Cs)")),
        }
    }
}

/// Rydberg-Ritz quantum-defect series `delta(n) = d0 + d2 / (n - d0)^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumDefectSeries {
    pub delta0: f64,
    pub delta2: f64,
}

impl QuantumDefectSeries {
    pub const ZERO: QuantumDefectSeries = QuantumDefectSeries { delta0: 0.0, delta2: 0.0 };

    pub fn at(&self, n: u32) -> f64 {
        if self.delta0 == 0.0 && self.delta2 == 0.0 {
            return 0.0;
        }
        let x = n as f64 - self.delta0;
        self.delta0 + self.delta2 / (x * x)
    }
}

pub(crate) const ORBITAL_LETTERS: [char; 21] = [
    'S', 'P', 'D', 'F', 'G', 'H', 'I', 'K', 'L', 'M', 'N', 'O', 'Q', 'R', 'T', 'U', 'V', 'W',
    'X', 'Y', 'Z',
];
