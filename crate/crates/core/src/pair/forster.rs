use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{DipoleTable, PairState};
use crate::angular::{stark_energy, SingleAtomFieldConfig, StarkBasisSpec};
use crate::atom::Atom;
use crate::error::{Error, Result};
use crate::species::{Level, StateLabel};

/// `R^3 <to|V_dd|from>` in GHz·µm^3; exactly zero for forbidden channels.
pub fn c3_coefficient(atom: &Atom, from: &PairState, to: &PairState, theta: f64) -> Result<f64> {
    let table = DipoleTable::new(atom, [from.a, from.b, to.a, to.b])?;
    Ok(table.coupling(to, from, theta) / 1e9)
}

/// A pair channel `|ab> -> |cd>` dipole-coupled in first order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForsterChannel {
    pub initial: PairState,
    pub target: PairState,
    /// `E_initial - E_target` at zero field (Hz).
    pub defect_hz: f64,
    /// Coupling of `initial` to the exchange-symmetrized target, GHz·µm^3.
    pub c3_ghz_um3: f64,
}

/// Principal-quantum-number reach of the channel search.
pub const FORSTER_DELTA_N: u32 = 6;

fn neighbours(atom: &Atom, s: &StateLabel) -> Vec<Level> {
    let t = atom.table();
    let mut out = Vec::new();
    for l in [s.l.wrapping_sub(1), s.l + 1] {
        if l > s.l + 1 {
            continue;
        }
        for j2 in [2 * l + 1, (2 * l).wrapping_sub(1)] {
            if j2 > 2 * l + 1 || j2.abs_diff(s.j2) > 2 {
                continue;
            }
            let n_lo = s.n.saturating_sub(FORSTER_DELTA_N).max(t.lowest_n(l)).max(l + 1);
            for n in n_lo..=s.n + FORSTER_DELTA_N {
                out.push(Level { species: s.species, n, l, j2 });
            }
        }
    }
    out
}

/// Coupling `|ss> -> (|bc> + |cb>)/sqrt(2)` (or `|bc>` when `b == c`), GHz·µm^3.
fn symmetrized_c3(table: &DipoleTable, initial: &PairState, target: &PairState, theta: f64) -> f64 {
    let direct = table.coupling(target, initial, theta);
    if target.a == target.b {
        direct / 1e9
    } else {
        let swapped = table.coupling(&target.swapped(), initial, theta);
        (direct + swapped) / std::f64::consts::SQRT_2 / 1e9
    }
}

/// Dipole-coupled channels of `|state, state>` with `|defect| <= window_hz`, sorted by `|defect|`.
/// The sublevels of each channel are the ones with the largest `|C3|` at `theta = 0`.
pub fn forster_search(atom: &Atom, state: &StateLabel, window_hz: f64) -> Result<Vec<ForsterChannel>> {
    if !(window_hz >= 0.0) {
        return Err(Error::domain("Förster window must be >= 0"));
    }
    atom.table().check_state(state)?;
    let initial = PairState::symmetric(*state);
    let e0 = initial.energy(atom)?;
    let levels = neighbours(atom, state);
    let mut out = Vec::new();
    for (i, b) in levels.iter().enumerate() {
        for c in &levels[i..] {
            let defect = e0 - atom.level_energy(b)? - atom.level_energy(c)?;
            if defect.abs() > window_hz {
                continue;
            }
            let mut singles = vec![*state];
            singles.extend(b.sublevels());
            singles.extend(c.sublevels());
            let table = DipoleTable::new(atom, singles)?;
            let mut best: Option<(PairState, f64)> = None;
            for sb in b.sublevels() {
                for sc in c.sublevels() {
                    let t = PairState { a: sb, b: sc };
                    let c3 = symmetrized_c3(&table, &initial, &t, 0.0);
                    if best.map_or(c3 != 0.0, |(_, x)| c3.abs() > x.abs() + 1e-12) {
                        best = Some((t, c3));
                    }
                }
            }
            if let Some((target, c3)) = best {
                out.push(ForsterChannel { initial, target, defect_hz: defect, c3_ghz_um3: c3 });
            }
        }
    }
    out.sort_by(|x, y| x.defect_hz.abs().total_cmp(&y.defect_hz.abs()));
    Ok(out)
}

/// Resonant or van der Waals regime boundary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Crossover {
    RadiusUm(f64),
    /// Zero defect: resonant at every distance.
    Resonant,
}

/// `R_c = (|C3| / |defect|)^(1/3)` in µm.
pub fn crossover_radius(c3_ghz_um3: f64, defect_hz: f64) -> Crossover {
    if defect_hz == 0.0 {
        return Crossover::Resonant;
    }
    Crossover::RadiusUm((c3_ghz_um3.abs() * 1e9 / defect_hz.abs()).cbrt())
}

/// Scan settings for [`stark_tune_resonance`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarkTuneOptions {
    pub field_min_v_cm: f64,
    pub field_max_v_cm: f64,
    pub steps: usize,
    pub distance_um: f64,
    pub theta: f64,
}

impl Default for StarkTuneOptions {
    fn default() -> Self {
        StarkTuneOptions { field_min_v_cm: 0.0, field_max_v_cm: 1.0, steps: 40, distance_um: 10.0, theta: 0.0 }
    }
}

/// Located Stark-tuned resonance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceResult {
    pub channel: ForsterChannel,
    pub field_v_cm: f64,
    pub distance_um: f64,
    /// Splitting of the two dressed states at resonance (Hz).
    pub gap_hz: f64,
    /// Weight of the initial pair state in each of the two dressed states.
    pub overlaps: [f64; 2],
}

fn channel_defect(atom: &Atom, ch: &ForsterChannel, field: f64) -> Result<f64> {
    let f = SingleAtomFieldConfig::electric(field);
    let e = |s: &StateLabel| stark_energy(atom, s, &StarkBasisSpec::around(s), &f);
    Ok(e(&ch.initial.a)? + e(&ch.initial.b)? - e(&ch.target.a)? - e(&ch.target.b)?)
}

/// Field where the Stark-shifted defect of `channel` crosses zero, and the
/// avoided-crossing gap there at `options.distance_um`.
pub fn stark_tune_resonance(atom: &Atom, channel: &ForsterChannel, options: &StarkTuneOptions) -> Result<ResonanceResult> {
    if options.steps < 2 || !(options.field_max_v_cm > options.field_min_v_cm) {
        return Err(Error::domain("field range must be increasing with at least two points"));
    }
    let step = (options.field_max_v_cm - options.field_min_v_cm) / (options.steps - 1) as f64;
    let mut lo = options.field_min_v_cm;
    let mut d_lo = channel_defect(atom, channel, lo)?;
    let mut bracket = None;
    for i in 1..options.steps {
        let hi = options.field_min_v_cm + step * i as f64;
        let d_hi = channel_defect(atom, channel, hi)?;
        if d_lo == 0.0 || d_lo.signum() != d_hi.signum() {
            bracket = Some((lo, d_lo, hi));
            break;
        }
        lo = hi;
        d_lo = d_hi;
    }
    let (mut a, mut da, mut b) = bracket.ok_or_else(|| {
        Error::NotFound(format!(
            "no Förster resonance for {} in [{}, {}] V/cm",
            channel.target, options.field_min_v_cm, options.field_max_v_cm
        ))
    })?;
    while b - a > 1e-7 && da != 0.0 {
        let m = 0.5 * (a + b);
        let dm = channel_defect(atom, channel, m)?;
        if dm.signum() == da.signum() {
            a = m;
            da = dm;
        } else {
            b = m;
        }
    }
    let field = if da == 0.0 { a } else { 0.5 * (a + b) };
    let defect = channel_defect(atom, channel, field)?;

    let r3 = options.distance_um.powi(3);
    let v = c3_coefficient(atom, &channel.initial, &channel.target, options.theta)? * 1e9 / r3;
    let h = if channel.target.a == channel.target.b {
        DMatrix::from_row_slice(2, 2, &[defect, v, v, 0.0])
    } else {
        DMatrix::from_row_slice(3, 3, &[defect, v, v, v, 0.0, 0.0, v, 0.0, 0.0])
    };
    let eig = SymmetricEigen::new(h.clone());
    let mut idx: Vec<usize> = (0..h.nrows()).collect();
    idx.sort_by(|&i, &k| eig.eigenvectors[(0, k)].abs().total_cmp(&eig.eigenvectors[(0, i)].abs()));
    let (p, q) = (idx[0], idx[1]);
    Ok(ResonanceResult {
        channel: *channel,
        field_v_cm: field,
        distance_um: options.distance_um,
        gap_hz: (eig.eigenvalues[p] - eig.eigenvalues[q]).abs(),
        overlaps: [eig.eigenvectors[(0, p)].powi(2), eig.eigenvectors[(0, q)].powi(2)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::species::Species;

    #[test]
    fn crossover_of_unit_values() {
        assert_eq!(crossover_radius(1.0, 1e9), Crossover::RadiusUm(1.0));
        assert_eq!(crossover_radius(2.0, 0.0), Crossover::Resonant);
    }

    #[test]
    fn d_state_channel_and_resonance() {
        let atom = Atom::bundled(Species::Rb87);
        let s: StateLabel = "Rb:59D3/2".parse().unwrap();
        let ch = forster_search(&atom, &s, 50e6).unwrap();
        let first = &ch[0];
        assert_eq!(first.target.a.level().to_string(), "Rb:61P1/2");
        assert_eq!(first.target.b.level().to_string(), "Rb:57F5/2");
        assert!(first.defect_hz.abs() < 50e6);
        let r = stark_tune_resonance(&atom, first, &StarkTuneOptions::default()).unwrap();
        assert!(r.field_v_cm > 0.0 && r.field_v_cm < 1.0);
        assert!((r.overlaps[0] - 0.5).abs() < 0.05);
    }
}
