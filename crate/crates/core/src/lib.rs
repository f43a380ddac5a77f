//! Interactions between individual alkali Rydberg atoms computed from quantum
//! defects and Numerov wavefunctions, and the driven few-atom spin dynamics
//! they generate.
//!
//! Unit conventions used throughout: energies are `E/h` in Hz, Rabi
//! frequencies are `Omega/2pi` in Hz, distances are in micrometres, electric
//! fields in V/cm, magnetic fields in gauss and dipole moments in `e*a0`.

// `!(x > 0.0)` guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Symmetric-matrix loops read clearer with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod angular;
pub mod atom;
pub mod error;
pub mod fit;
pub mod pair;
pub mod radial;
pub mod regimes;
pub mod species;
pub mod spin;
pub mod units;

pub use atom::Atom;
pub use error::{Error, Result};
pub use species::{Level, Species, SpeciesData, SpeciesTable, StateLabel};
