use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use super::{Species, ORBITAL_LETTERS};
use crate::error::{Error, Result};

/// A fine-structure level `n l_j` of a given species, without the magnetic
/// quantum number. Angular momenta are stored doubled (`j2 = 2j`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Level {
    pub species: Species,
    pub n: u32,
    pub l: u32,
    pub j2: u32,
}

impl Level {
    pub fn new(species: Species, n: u32, l: u32, j: f64) -> Result<Self> {
        let j2 = doubled(j)?;
        let level = Level { species, n, l, j2: j2 as u32 };
        level.check()?;
        Ok(level)
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.n == 0 || self.l >= self.n {
            return Err(Error::domain(format!("need 0 <= l < n, got n={} l={}", self.n, self.l)));
        }
        let two_l = 2 * self.l as i64;
        let j2 = self.j2 as i64;
        if j2 != two_l + 1 && j2 != two_l - 1 {
            return Err(Error::domain(format!(
                "j = {}/2 incompatible with l = {}",
                self.j2, self.l
            )));
        }
        Ok(())
    }

    pub fn j(&self) -> f64 {
        self.j2 as f64 / 2.0
    }

    /// The state with magnetic quantum number `m_j = mj2 / 2`.
    pub fn with_mj2(&self, mj2: i32) -> Result<StateLabel> {
        let s = StateLabel { species: self.species, n: self.n, l: self.l, j2: self.j2, mj2 };
        s.check()?;
        Ok(s)
    }

    /// The stretched state `m_j = +j`.
    pub fn stretched(&self) -> StateLabel {
        StateLabel { species: self.species, n: self.n, l: self.l, j2: self.j2, mj2: self.j2 as i32 }
    }

    /// All Zeeman sublevels, `m_j` ascending.
    pub fn sublevels(&self) -> impl Iterator<Item = StateLabel> + '_ {
        let j2 = self.j2 as i32;
        (-j2..=j2).step_by(2).map(move |mj2| StateLabel {
            species: self.species,
            n: self.n,
            l: self.l,
            j2: self.j2,
            mj2,
        })
    }

    /// Spectroscopic term such as `80S1/2`.
    pub fn term(&self) -> String {
        format!("{}{}{}/2", self.n, orbital_letter(self.l), self.j2)
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.species.symbol(), self.term())
    }
}

/// One alkali Rydberg state `|n, l, j, m_j>` with its species.
///
/// `j2 = 2j` and `mj2 = 2 m_j`. Serialized as its text form, e.g. `Rb:62D3/2:3/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct StateLabel {
    pub species: Species,
    pub n: u32,
    pub l: u32,
    pub j2: u32,
    pub mj2: i32,
}

impl StateLabel {
    pub fn new(species: Species, n: u32, l: u32, j: f64, mj: f64) -> Result<Self> {
        let level = Level::new(species, n, l, j)?;
        level.with_mj2(doubled(mj)?)
    }

    pub(crate) fn check(&self) -> Result<()> {
        self.level().check()?;
        let j2 = self.j2 as i32;
        if self.mj2.abs() > j2 || (j2 - self.mj2) % 2 != 0 {
            return Err(Error::domain(format!(
                "m_j = {}/2 not allowed for j = {}/2",
                self.mj2, self.j2
            )));
        }
        Ok(())
    }

    pub fn level(&self) -> Level {
        Level { species: self.species, n: self.n, l: self.l, j2: self.j2 }
    }

    pub fn j(&self) -> f64 {
        self.j2 as f64 / 2.0
    }

    pub fn mj(&self) -> f64 {
        self.mj2 as f64 / 2.0
    }
}

impl TryFrom<String> for StateLabel {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<StateLabel> for String {
    fn from(s: StateLabel) -> String {
        s.to_string()
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.level(), fraction(self.mj2))
    }
}

fn fraction(x2: i32) -> String {
    if x2 % 2 == 0 {
        format!("{}", x2 / 2)
    } else {
        format!("{}/2", x2)
    }
}

pub(crate) fn orbital_letter(l: u32) -> String {
    ORBITAL_LETTERS
        .get(l as usize)
        .map(|c| c.to_string())
        .unwrap_or_else(|| format!("[l={l}]"))
}

/// Parse a half-integer written as `3/2`, `1.5` or `2`, returning twice its value.
pub(crate) fn parse_half_integer(tok: &str) -> Result<i32> {
    let value = if let Some((num, den)) = tok.split_once('/') {
        let num: i32 = num.trim().parse().map_err(|_| Error::parse(tok, "bad numerator"))?;
        match den.trim() {
            "2" => return Ok(num),
            "1" => num as f64,
            _ => return Err(Error::parse(tok, "denominator must be 2")),
        }
    } else {
        tok.trim().parse::<f64>().map_err(|_| Error::parse(tok, "not a number"))?
    };
    doubled(value).map_err(|_| Error::parse(tok, "not a half-integer"))
}

pub(crate) fn doubled(x: f64) -> Result<i32> {
    let d = 2.0 * x;
    if !d.is_finite() || (d - d.round()).abs() > 1e-9 {
        return Err(Error::domain(format!("{x} is not a half-integer")));
    }
    Ok(d.round() as i32)
}

impl FromStr for Level {
    type Err = Error;

    /// Parses `Species:nLj`, e.g. `Rb:80S1/2` or `Cs:64P3/2`.
    fn from_str(s: &str) -> Result<Self> {
        let (species, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::parse(s, "expected `Species:nLj`"))?;
        let species: Species = species.trim().parse()?;
        let rest = rest.trim();
        let digits = rest.chars().take_while(|c| c.is_ascii_digit()).count();
        if digits == 0 {
            return Err(Error::parse(rest, "missing principal quantum number"));
        }
        let n: u32 = rest[..digits].parse().map_err(|_| Error::parse(&rest[..digits], "bad n"))?;
        let tail = &rest[digits..];
        let letter = tail
            .chars()
            .next()
            .ok_or_else(|| Error::parse(rest, "missing orbital letter"))?;
        let l = match letter {
            'S' => 0,
            'P' => 1,
            'D' => 2,
            'F' => 3,
            other => {
                return Err(Error::parse(
                    other.to_string(),
                    "orbital letter must be one of S, P, D, F",
                ))
            }
        };
        let jtok = &tail[letter.len_utf8()..];
        if jtok.is_empty() {
            return Err(Error::parse(rest, "missing j (e.g. 1/2)"));
        }
        let j2 = parse_half_integer(jtok)?;
        if j2 < 0 {
            return Err(Error::parse(jtok, "j must be positive"));
        }
        let level = Level { species, n, l, j2: j2 as u32 };
        level.check()?;
        Ok(level)
    }
}

impl FromStr for StateLabel {
    type Err = Error;

    /// Parses `Species:nLj[:mj]`; without `mj` the stretched state `m_j = j` is used.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.splitn(3, ':');
        let sp = parts.next().unwrap_or_default();
        let term = parts.next().ok_or_else(|| Error::parse(s, "expected `Species:nLj[:mj]`"))?;
        let level: Level = format!("{sp}:{term}").parse()?;
        match parts.next() {
            None => Ok(level.stretched()),
            Some(mj) => level.with_mj2(parse_half_integer(mj)?),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_levels() {
        let l: Level = "Rb:80S1/2".parse().unwrap();
        assert_eq!((l.n, l.l, l.j2), (80, 0, 1));
        let l: Level = "Cs:64P3/2".parse().unwrap();
        assert_eq!((l.species, l.l, l.j2), (Species::Cs133, 1, 3));
        assert_eq!(l.to_string(), "Cs:64P3/2");
    }

    #[test]
    fn parse_error_names_offending_token() {
        match "Rb:80X".parse::<Level>() {
            Err(Error::Parse { token, .. }) => assert_eq!(token, "X"),
            other => panic!("unexpected {other:?}"),
        }
        assert!("Rb:80S3/2".parse::<Level>().is_err());
        assert!("Rb:80S".parse::<Level>().is_err());
        assert!("80S1/2".parse::<Level>().is_err());
    }

    #[test]
    fn parse_state_with_mj() {
        let s: StateLabel = "Rb:62D3/2:-1/2".parse().unwrap();
        assert_eq!(s.mj2, -1);
        let s: StateLabel = "Rb:62D3/2".parse().unwrap();
        assert_eq!(s.mj2, 3);
        assert!("Rb:62D3/2:5/2".parse::<StateLabel>().is_err());
        assert_eq!(s.to_string(), "Rb:62D3/2:3/2");
    }

    #[test]
    fn triangle_rules() {
        assert!(StateLabel::new(Species::Rb87, 50, 0, 0.5, 0.5).is_ok());
        assert!(StateLabel::new(Species::Rb87, 50, 0, 1.5, 0.5).is_err());
        assert!(StateLabel::new(Species::Rb87, 50, 50, 49.5, 0.5).is_err());
        assert!(StateLabel::new(Species::Rb87, 50, 2, 2.5, 1.0).is_err());
        assert_eq!(Level::new(Species::Rb87, 62, 2, 1.5).unwrap().sublevels().count(), 4);
    }
}
