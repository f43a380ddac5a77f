use std::sync::Arc;

use crate::error::Result;
use crate::radial::{CacheHeader, GridParams, RadialIntegralCache, RadialSolver, RadialWavefunction};
use crate::species::{Level, Species, SpeciesData, SpeciesTable, StateLabel};

/// Calculator handle for one species: its constants plus a (possibly shared)
/// radial solver and integral cache.
#[derive(Clone, Debug)]
pub struct Atom {
    table: Arc<SpeciesTable>,
    solver: Arc<RadialSolver>,
}

impl Atom {
    pub fn new(table: Arc<SpeciesTable>, solver: Arc<RadialSolver>) -> Self {
        Atom { table, solver }
    }

    /// Bundled species data, default grid, in-memory cache.
    pub fn bundled(species: Species) -> Self {
        let data = SpeciesData::bundled();
        let params = GridParams::default();
        let cache = Arc::new(RadialIntegralCache::in_memory(CacheHeader::new(&params, data.checksum())));
        let table = data.table(species).expect("bundled table covers every species");
        Atom::new(table, Arc::new(RadialSolver::new(params, cache)))
    }

    pub fn species(&self) -> Species {
        self.table.species
    }

    pub fn table(&self) -> &SpeciesTable {
        &self.table
    }

    pub fn solver(&self) -> &Arc<RadialSolver> {
        &self.solver
    }

    /// Same species, different radial solver (e.g. another grid step).
    pub fn with_solver(&self, solver: Arc<RadialSolver>) -> Self {
        Atom { table: self.table.clone(), solver }
    }

    /// E/h in Hz of a fine-structure level (negative, bound).
    pub fn level_energy(&self, level: &Level) -> Result<f64> {
        self.table.check_level(level)?;
        Ok(self.table.level_energy_hz(level))
    }

    /// E/h in Hz, `-Ry*/(n - delta_lj(n))^2`; independent of `m_j`.
    pub fn state_energy(&self, state: &StateLabel) -> Result<f64> {
        self.table.check_state(state)?;
        Ok(self.table.level_energy_hz(&state.level()))
    }

    pub fn effective_n(&self, level: &Level) -> f64 {
        self.table.effective_n(level)
    }

    pub fn radial_wavefunction(&self, level: &Level) -> Result<Arc<RadialWavefunction>> {
        self.solver.solve(&self.table, level)
    }

    /// `<a|r^k|b>` in a0^k.
    pub fn radial_matrix_element(&self, a: &Level, b: &Level, power: u8) -> Result<f64> {
        self.solver.matrix_element(&self.table, a, b, power)
    }
}
