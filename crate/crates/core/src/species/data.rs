use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use super::label::parse_half_integer;
use super::{Level, QuantumDefectSeries, Species, StateLabel};
use crate::error::{Error, Result};

/// The species table shipped with the crate.
pub const BUNDLED_SPECIES_FILE: &str = include_str!("../../data/species.dat");

/// One `(l, j)` quantum-defect channel with its literature source.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DefectEntry {
    pub l: u32,
    pub j2: u32,
    pub series: QuantumDefectSeries,
    pub source: String,
}

/// Constants of one species. Immutable once loaded.
#[derive(Clone, Debug, Serialize)]
pub struct SpeciesTable {
    pub species: Species,
    /// Mass-corrected Rydberg constant, E/h in Hz.
    pub rydberg_hz: f64,
    /// Core dipole polarizability (a0^3).
    pub core_polarizability_au: f64,
    pub ground: Level,
    pub mass_amu: f64,
    /// Lowest principal quantum number per `l` for S, P, D, F.
    pub min_n: [u32; 4],
    pub defects: Vec<DefectEntry>,
}

impl SpeciesTable {
    /// Quantum defect of `(n, l, j)`; exactly zero for `l >= 4`.
    pub fn quantum_defect(&self, n: u32, l: u32, j2: u32) -> f64 {
        if l >= 4 {
            return 0.0;
        }
        self.defects
            .iter()
            .find(|d| d.l == l && d.j2 == j2)
            .map(|d| d.series.at(n))
            .unwrap_or(0.0)
    }

    /// Effective principal quantum number `n* = n - delta(n)`.
    pub fn effective_n(&self, level: &Level) -> f64 {
        level.n as f64 - self.quantum_defect(level.n, level.l, level.j2)
    }

    /// Lowest principal quantum number that exists for orbital momentum `l`.
    pub fn lowest_n(&self, l: u32) -> u32 {
        match self.min_n.get(l as usize) {
            Some(&n) => n,
            None => l + 1,
        }
    }

    pub fn check_level(&self, level: &Level) -> Result<()> {
        if level.species != self.species {
            return Err(Error::domain(format!(
                "{} is not a {} level",
                level, self.species
            )));
        }
        level.check()?;
        if level.n < self.lowest_n(level.l) {
            return Err(Error::domain(format!(
                "{} lies below the lowest {} level of {}",
                level.term(),
                super::label::orbital_letter(level.l),
                self.species
            )));
        }
        if self.effective_n(level) <= 0.0 {
            return Err(Error::domain(format!("{}: n* <= 0", level.term())));
        }
        Ok(())
    }

    pub fn check_state(&self, state: &StateLabel) -> Result<()> {
        state.check()?;
        self.check_level(&state.level())
    }

    /// Binding energy `-Ry* / n*^2` as E/h in Hz.
    pub fn level_energy_hz(&self, level: &Level) -> f64 {
        let ns = self.effective_n(level);
        -self.rydberg_hz / (ns * ns)
    }
}

/// A parsed species data file.
#[derive(Clone, Debug)]
pub struct SpeciesData {
    tables: BTreeMap<Species, Arc<SpeciesTable>>,
    checksum: String,
}

impl SpeciesData {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_SPECIES_FILE).expect("bundled species table is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut declared = None;
        let mut hasher = Sha256::new();
        let mut builders: BTreeMap<Species, SpeciesTable> = BTreeMap::new();
        let mut pending: Vec<(Species, DefectEntry)> = Vec::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim_end();
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(sum) = comment.trim().strip_prefix("checksum: sha256:") {
                    declared = Some(sum.trim().to_string());
                }
                continue;
            }
            hasher.update(line.as_bytes());
            hasher.update(b"\n");
            if line.trim().is_empty() {
                continue;
            }
            let ctx = |e: Error| Error::SpeciesData(format!("line {}: {}", lineno + 1, e));
            let (kind, id, fields) = split_record(line).map_err(ctx)?;
            let species: Species = id.parse().map_err(ctx)?;
            match kind.as_str() {
                "species" => {
                    let table = species_record(species, &fields).map_err(ctx)?;
                    builders.insert(species, table);
                }
                "defect" => pending.push((species, defect_record(&fields).map_err(ctx)?)),
                other => {
                    return Err(Error::SpeciesData(format!(
                        "line {}: unknown record `{other}`",
                        lineno + 1
                    )))
                }
            }
        }

        let actual = hex::encode(hasher.finalize());
        match declared {
            Some(d) if d == actual => {}
            Some(d) => {
                return Err(Error::SpeciesData(format!(
                    "checksum mismatch: header says {d}, content hashes to {actual}"
                )))
            }
            None => return Err(Error::SpeciesData("missing checksum header".into())),
        }

        for (species, entry) in pending {
            let table = builders.get_mut(&species).ok_or_else(|| {
                Error::SpeciesData(format!("defect for undeclared species {species}"))
            })?;
            table.defects.push(entry);
        }
        for table in builders.values() {
            for l in 0..4u32 {
                for j2 in [2 * l + 1, (2 * l).saturating_sub(1)] {
                    if j2 == 0 {
                        continue;
                    }
                    if !table.defects.iter().any(|d| d.l == l && d.j2 == j2) {
                        return Err(Error::SpeciesData(format!(
                            "{}: missing defect for l={l} j={j2}/2",
                            table.species
                        )));
                    }
                }
            }
        }
        let tables = builders.into_iter().map(|(k, v)| (k, Arc::new(v))).collect();
        Ok(SpeciesData { tables, checksum: actual })
    }

    pub fn table(&self, species: Species) -> Result<Arc<SpeciesTable>> {
        self.tables
            .get(&species)
            .cloned()
            .ok_or_else(|| Error::SpeciesData(format!("no table for {species}")))
    }

    /// SHA-256 of the data lines, hex encoded.
    pub fn checksum(&self) -> &str {
        &self.checksum
    }
}

fn split_record(line: &str) -> Result<(String, String, BTreeMap<String, String>)> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    for c in line.chars() {
        match c {
            '"' => quoted = !quoted,
            c if c.is_whitespace() && !quoted => {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if quoted {
        return Err(Error::parse(line, "unterminated quote"));
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    if tokens.len() < 2 {
        return Err(Error::parse(line, "expected `<record> <species> key=value...`"));
    }
    let mut fields = BTreeMap::new();
    for tok in &tokens[2..] {
        let (k, v) = tok.split_once('=').ok_or_else(|| Error::parse(tok, "expected key=value"))?;
        fields.insert(k.to_string(), v.to_string());
    }
    Ok((tokens[0].clone(), tokens[1].clone(), fields))
}

fn field<'a>(fields: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str> {
    fields.get(key).map(String::as_str).ok_or_else(|| Error::parse(key, "missing field"))
}

fn number(fields: &BTreeMap<String, String>, key: &str) -> Result<f64> {
    let v = field(fields, key)?;
    v.parse().map_err(|_| Error::parse(v, format!("`{key}` is not a number")))
}

fn species_record(species: Species, fields: &BTreeMap<String, String>) -> Result<SpeciesTable> {
    let ground: Level = format!("{}:{}", species.symbol(), field(fields, "ground")?).parse()?;
    let min_n_str = field(fields, "min_n")?;
    let parsed: Vec<u32> = min_n_str
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| Error::parse(t, "bad min_n entry")))
        .collect::<Result<_>>()?;
    let min_n: [u32; 4] = parsed
        .try_into()
        .map_err(|_| Error::parse(min_n_str, "min_n needs four entries"))?;
    Ok(SpeciesTable {
        species,
        rydberg_hz: number(fields, "rydberg_hz")?,
        core_polarizability_au: number(fields, "core_pol_au")?,
        ground,
        mass_amu: number(fields, "mass_amu")?,
        min_n,
        defects: Vec::new(),
    })
}

fn defect_record(fields: &BTreeMap<String, String>) -> Result<DefectEntry> {
    let l_str = field(fields, "l")?;
    let l: u32 = l_str.parse().map_err(|_| Error::parse(l_str, "bad l"))?;
    let j2 = parse_half_integer(field(fields, "j")?)?;
    if l >= 4 {
        return Err(Error::parse(l_str, "defects are only tabulated for l <= 3"));
    }
    Ok(DefectEntry {
        l,
        j2: j2 as u32,
        series: QuantumDefectSeries { delta0: number(fields, "d0")?, delta2: number(fields, "d2")? },
        source: field(fields, "src")?.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table_loads() {
        let data = SpeciesData::bundled();
        for sp in [Species::Rb87, Species::Cs133] {
            let t = data.table(sp).unwrap();
            assert!((t.rydberg_hz / 3.2898e15 - 1.0).abs() < 1e-3);
            assert_eq!(t.defects.len(), 7);
            for d in &t.defects {
                for n in t.lowest_n(d.l)..200 {
                    let delta = d.series.at(n);
                    assert!((0.0..5.0).contains(&delta), "{sp} l={} n={n}: {delta}", d.l);
                }
            }
        }
    }

    #[test]
    fn high_l_defect_is_exactly_zero() {
        let t = SpeciesData::bundled().table(Species::Rb87).unwrap();
        assert_eq!(t.quantum_defect(50, 4, 9), 0.0);
        assert_eq!(t.quantum_defect(50, 10, 21), 0.0);
    }

    #[test]
    fn tampered_file_rejected() {
        let tampered = BUNDLED_SPECIES_FILE.replace("d0=3.1311804", "d0=3.1311805");
        match SpeciesData::parse(&tampered) {
            Err(Error::SpeciesData(msg)) => assert!(msg.contains("checksum")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn low_levels_respect_species_minimum() {
        let t = SpeciesData::bundled().table(Species::Rb87).unwrap();
        assert!(t.check_level(&Level::new(Species::Rb87, 4, 2, 1.5).unwrap()).is_ok());
        assert!(t.check_level(&Level::new(Species::Rb87, 4, 0, 0.5).unwrap()).is_err());
        let cs = SpeciesData::bundled().table(Species::Cs133).unwrap();
        assert!(cs.check_level(&Level::new(Species::Cs133, 5, 0, 0.5).unwrap()).is_err());
        assert!(cs.check_level(&Level::new(Species::Cs133, 5, 2, 1.5).unwrap()).is_ok());
        assert!(t.check_level(&Level::new(Species::Cs133, 60, 0, 0.5).unwrap()).is_err());
    }
}
