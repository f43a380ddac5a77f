//! Numerov solutions of the radial Schrodinger equation and radial matrix
//! elements `<a|r^k|b>`, with an in-memory wavefunction memo and a persistent
//! integral cache.
//!
//! The radial equation is integrated in the scaled coordinate `x = sqrt(r)`
//! for `X(x) = r^(-1/4) u(r)`, where `u = r R(r)`. In that coordinate it reads
//! `X'' = g(x) X` with
//!
//! ```text
//! g(x) = 8 x^2 (V(r) - E) + (2l + 1/2)(2l + 3/2) / x^2,   V = -1/r,  E = -1/(2 n*^2)
//! ```
//!
//! in atomic units. Integration runs inward from `r_out = 2n(n + offset)`
//! (offset 15 by default). Below the inner turning point the integration stops
//! at the first node-free growth of `|X|`, which is where the irregular Coulomb
//! solution takes over for non-integer `n*`; it never goes below the core
//! radius `alpha_core^(1/3)`.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use crate::error::{Error, Result, SolverDiagnostics};
use crate::species::{Level, Species, SpeciesTable};

/// Grid configuration shared by every solution that enters a matrix element.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    /// Step in `x = sqrt(r)`, units of `a0^(1/2)`.
    pub step: f64,
    /// `r_out = 2 n (n + outer_offset)` in a0.
    pub outer_offset: f64,
    /// Overrides the core radius `alpha_core^(1/3)` when set (a0).
    pub core_radius: Option<f64>,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams { step: 0.01, outer_offset: 15.0, core_radius: None }
    }
}

impl GridParams {
    pub fn with_step(step: f64) -> Self {
        GridParams { step, ..Default::default() }
    }

    /// Compact description used in cache headers.
    pub fn fingerprint(&self) -> String {
        format!("{:?} {:?} {:?}", self.step, self.outer_offset, self.core_radius)
    }
}

/// Abscissae `x_i = i * step` for `i in start..=end`, with `r = x^2` in a0.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialGrid {
    pub step: f64,
    pub start: usize,
    pub end: usize,
    /// Where divergence monitoring begins (a0).
    pub r_inner: f64,
    pub r_outer: f64,
}

impl RadialGrid {
    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.step
    }

    /// Radii `r_i` in a0, strictly increasing.
    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        (self.start..=self.end).map(move |i| {
            let x = self.x(i);
            x * x
        })
    }
}

/// A normalized reduced radial function tabulated as `X(x_i)`.
#[derive(Clone, Debug)]
pub struct RadialWavefunction {
    /// `None` for bare Coulomb solutions not tied to a species level.
    pub level: Option<Level>,
    pub n_star: f64,
    pub l: u32,
    pub grid: RadialGrid,
    pub values: Vec<f64>,
    /// `|int u^2 dr - 1|` evaluated with Simpson's rule after trapezoidal normalization.
    pub normalization_residual: f64,
}

impl RadialWavefunction {
    /// `u(r_i) = x_i^(1/2) X(x_i)`, paired with `r_i`.
    pub fn reduced(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (self.grid.start..=self.grid.end).zip(&self.values).map(move |(i, &v)| {
            let x = self.grid.x(i);
            (x * x, x.sqrt() * v)
        })
    }

    /// `<r^k>` of this state.
    pub fn moment(&self, k: i32) -> f64 {
        overlap_integral(self, self, k)
    }

    fn value_at_index(&self, i: usize) -> f64 {
        if i < self.grid.start || i > self.grid.end {
            0.0
        } else {
            self.values[i - self.grid.start]
        }
    }

    /// Linear interpolation of `X` at arbitrary `x` (zero outside the grid).
    fn value_at_x(&self, x: f64) -> f64 {
        let pos = x / self.grid.step;
        let i = pos.floor();
        if i < self.grid.start as f64 || i >= self.grid.end as f64 {
            return 0.0;
        }
        let i = i as usize;
        let t = pos - i as f64;
        (1.0 - t) * self.value_at_index(i) + t * self.value_at_index(i + 1)
    }
}

/// Solve for a pure Coulomb potential at energy `-1/(2 n*^2)` hartree.
///
/// `n` sets the outer cutoff, `core_radius` the hard inner floor (a0).
pub fn solve_coulomb(
    n_star: f64,
    n: u32,
    l: u32,
    core_radius: f64,
    params: &GridParams,
) -> Result<RadialWavefunction> {
    let lf = l as f64;
    let r_outer = 2.0 * n as f64 * (n as f64 + params.outer_offset);
    let centrifugal = lf * (lf + 1.0);
    let disc = n_star * n_star - centrifugal;
    let turning = if disc > 0.0 { n_star * n_star - n_star * disc.sqrt() } else { f64::NAN };
    let diag = |detail: String, points: usize| {
        Error::Solver(Box::new(SolverDiagnostics {
            n_star,
            l,
            r_inner: turning,
            r_outer,
            grid_points: points,
            detail,
        }))
    };
    if !(n_star > lf) || disc <= 0.0 {
        return Err(diag(format!("need n* > l (n* = {n_star})"), 0));
    }
    let r_inner = turning.max(core_radius);
    let h = params.step;
    let end = (r_outer.sqrt() / h).ceil() as usize;
    let floor = ((core_radius.max(0.0).sqrt() / h).floor() as usize).max(1);
    if end < floor + 8 {
        return Err(diag("grid too short".into(), end.saturating_sub(floor)));
    }

    let c = (2.0 * lf + 0.5) * (2.0 * lf + 1.5);
    let inv_n2 = 1.0 / (n_star * n_star);
    let g = |i: usize| {
        let x = i as f64 * h;
        let x2 = x * x;
        -8.0 + 4.0 * x2 * inv_n2 + c / x2
    };
    let h2 = h * h / 12.0;

    // values[k] holds X(x_{end - k}) while integrating; reversed afterwards.
    let mut rev: Vec<f64> = Vec::with_capacity(end - floor + 1);
    let g_end = g(end);
    rev.push(1e-30);
    rev.push(1e-30 * (h * g_end.max(0.0).sqrt()).exp());
    let mut start = floor;
    let mut g_next = g_end;
    let mut g_cur = g(end - 1);
    let mut i = end - 1;
    while i > floor {
        let g_prev = g(i - 1);
        let y_next = rev[rev.len() - 2];
        let y_cur = rev[rev.len() - 1];
        let y_prev = (2.0 * (1.0 + 5.0 * h2 * g_cur) * y_cur - (1.0 - h2 * g_next) * y_next)
            / (1.0 - h2 * g_prev);
        if !y_prev.is_finite() {
            return Err(diag(format!("non-finite value at r = {:.4}", (i as f64 * h).powi(2)), rev.len()));
        }
        let x_prev = (i - 1) as f64 * h;
        if x_prev * x_prev < r_inner && y_prev.abs() > y_cur.abs() {
            start = i;
            break;
        }
        rev.push(y_prev);
        if y_prev.abs() > 1e150 {
            for v in rev.iter_mut() {
                *v *= 1e-150;
            }
        }
        g_next = g_cur;
        g_cur = g_prev;
        i -= 1;
    }
    if start == floor {
        start = end + 1 - rev.len();
    }
    rev.reverse();
    let mut values = rev;
    debug_assert_eq!(values.len(), end + 1 - start);

    let grid = RadialGrid { step: h, start, end, r_inner, r_outer };
    // Divergence: the inner tail must never dominate the allowed region.
    let split = ((r_inner.sqrt() / h).floor() as usize).clamp(start, end);
    let inner_max = values[..split - start].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let outer_max = values[split - start..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if inner_max > outer_max {
        return Err(diag(
            format!("solution diverges inside r_in = {r_inner:.3} (|X| {inner_max:.3e} vs {outer_max:.3e})"),
            values.len(),
        ));
    }

    let norm = (2.0 * h * weighted_sum(&grid, &values, &values, 0)).sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(diag("zero norm".into(), values.len()));
    }
    for v in values.iter_mut() {
        *v /= norm;
    }
    let residual = (simpson_norm(&grid, &values) - 1.0).abs();
    Ok(RadialWavefunction { level: None, n_star, l, grid, values, normalization_residual: residual })
}

fn weighted_sum(grid: &RadialGrid, a: &[f64], b: &[f64], k: i32) -> f64 {
    (grid.start..=grid.end)
        .zip(a.iter().zip(b))
        .map(|(i, (ya, yb))| {
            let x = grid.x(i);
            x.powi(2 + 2 * k) * ya * yb
        })
        .sum()
}

fn simpson_norm(grid: &RadialGrid, values: &[f64]) -> f64 {
    let h = grid.step;
    let f = |k: usize| {
        let x = grid.x(grid.start + k);
        2.0 * x * x * values[k] * values[k]
    };
    let n = values.len();
    // Simpson needs an even number of intervals; the last point carries no weight.
    let m = if (n - 1).is_multiple_of(2) { n } else { n - 1 };
    let mut s = f(0) + f(m - 1);
    for k in 1..m - 1 {
        s += if k % 2 == 1 { 4.0 * f(k) } else { 2.0 * f(k) };
    }
    s * h / 3.0
}

/// `int u_a(r) r^k u_b(r) dr` on the common part of the two grids (a0^k).
pub fn overlap_integral(a: &RadialWavefunction, b: &RadialWavefunction, k: i32) -> f64 {
    let h = a.grid.step;
    if (b.grid.step - h).abs() > 1e-15 * h {
        // Different steps: interpolate b onto a's grid.
        return 2.0
            * h
            * (a.grid.start..=a.grid.end)
                .map(|i| {
                    let x = a.grid.x(i);
                    x.powi(2 + 2 * k) * a.value_at_index(i) * b.value_at_x(x)
                })
                .sum::<f64>();
    }
    let lo = a.grid.start.max(b.grid.start);
    let hi = a.grid.end.min(b.grid.end);
    if lo > hi {
        return 0.0;
    }
    let sa = &a.values[lo - a.grid.start..=hi - a.grid.start];
    let sb = &b.values[lo - b.grid.start..=hi - b.grid.start];
    let sub = RadialGrid { start: lo, end: hi, ..a.grid.clone() };
    2.0 * h * weighted_sum(&sub, sa, sb, k)
}

/// Key of a cached integral; construction normalizes the state order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntegralKey {
    pub a: Level,
    pub b: Level,
    pub power: u8,
}

impl IntegralKey {
    pub fn new(a: Level, b: Level, power: u8) -> Self {
        if a <= b {
            IntegralKey { a, b, power }
        } else {
            IntegralKey { a: b, b: a, power }
        }
    }
}

/// Header that a persisted cache must match to be reused.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheHeader {
    pub version: String,
    pub grid: String,
    pub species_checksum: String,
}

impl CacheHeader {
    pub fn new(grid: &GridParams, species_checksum: &str) -> Self {
        CacheHeader {
            version: env!("CARGO_PKG_VERSION").to_string(),
            grid: grid.fingerprint(),
            species_checksum: species_checksum.to_string(),
        }
    }
}

/// Radial-integral cache with read-through/write-through semantics.
///
/// Readers run concurrently; writers and `flush` are serialized.
#[derive(Debug)]
pub struct RadialIntegralCache {
    header: CacheHeader,
    entries: RwLock<HashMap<IntegralKey, f64>>,
    dirty: AtomicBool,
    path: Option<PathBuf>,
    flush_lock: Mutex<()>,
}

impl RadialIntegralCache {
    pub fn in_memory(header: CacheHeader) -> Self {
        RadialIntegralCache {
            header,
            entries: RwLock::new(HashMap::new()),
            dirty: AtomicBool::new(false),
            path: None,
            flush_lock: Mutex::new(()),
        }
    }

    /// Opens a cache file, or starts empty if it is missing, corrupted or
    /// was written with a different header.
    pub fn open(path: impl AsRef<Path>, header: CacheHeader) -> Self {
        let path = path.as_ref().to_path_buf();
        let mut cache = Self::in_memory(header);
        match fs::File::open(&path) {
            Ok(file) => match read_cache(BufReader::new(file), &cache.header) {
                Ok(entries) => *cache.entries.get_mut().unwrap() = entries,
                Err(reason) => {
                    log::warn!("discarding radial cache {}: {reason}", path.display())
                }
            },
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => log::warn!("cannot read radial cache {}: {e}", path.display()),
        }
        cache.path = Some(path);
        cache
    }

    pub fn header(&self) -> &CacheHeader {
        &self.header
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn get(&self, key: &IntegralKey) -> Option<f64> {
        let key = IntegralKey::new(key.a, key.b, key.power);
        self.entries.read().unwrap().get(&key).copied()
    }

    pub fn put(&self, key: IntegralKey, value: f64) {
        let key = IntegralKey::new(key.a, key.b, key.power);
        let mut map = self.entries.write().unwrap();
        if map.insert(key, value) != Some(value) {
            self.dirty.store(true, Ordering::Release);
        }
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_dirty(&self) -> bool {
        self.dirty.load(Ordering::Acquire)
    }

    /// Writes the cache to its file (sorted, one integral per line).
    pub fn flush(&self) -> Result<()> {
        let Some(path) = &self.path else { return Ok(()) };
        let _guard = self.flush_lock.lock().unwrap();
        if !self.is_dirty() {
            return Ok(());
        }
        let mut entries: Vec<(IntegralKey, f64)> =
            self.entries.read().unwrap().iter().map(|(k, v)| (*k, *v)).collect();
        entries.sort_by_key(|e| e.0);
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent)?;
            }
        }
        let tmp = path.with_extension("tmp");
        {
            let mut w = BufWriter::new(fs::File::create(&tmp)?);
            writeln!(w, "VERSION {}", self.header.version)?;
            writeln!(w, "GRIDSTEP {}", self.header.grid)?;
            writeln!(w, "SPECIESFILE-CHECKSUM {}", self.header.species_checksum)?;
            for (k, v) in entries {
                writeln!(
                    w,
                    "{} {} {} {} {} {} {} {} {}",
                    k.a.species, k.a.n, k.a.l, k.a.j2, k.b.n, k.b.l, k.b.j2, k.power, v
                )?;
            }
            w.flush()?;
        }
        fs::rename(&tmp, path)?;
        self.dirty.store(false, Ordering::Release);
        Ok(())
    }
}

fn read_cache(
    reader: impl BufRead,
    expected: &CacheHeader,
) -> std::result::Result<HashMap<IntegralKey, f64>, String> {
    let mut lines = reader.lines();
    let mut header_line = |tag: &str| -> std::result::Result<String, String> {
        let line = lines
            .next()
            .ok_or_else(|| format!("missing {tag} header"))?
            .map_err(|e| e.to_string())?;
        line.strip_prefix(tag)
            .map(|s| s.trim().to_string())
            .ok_or_else(|| format!("expected {tag} header, found `{line}`"))
    };
    let found = CacheHeader {
        version: header_line("VERSION")?,
        grid: header_line("GRIDSTEP")?,
        species_checksum: header_line("SPECIESFILE-CHECKSUM")?,
    };
    if &found != expected {
        return Err(format!("header mismatch ({found:?} vs {expected:?})"));
    }
    let mut map = HashMap::new();
    for (no, line) in lines.enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        if line.trim().is_empty() {
            continue;
        }
        let parse = || -> Option<(IntegralKey, f64)> {
            let t: Vec<&str> = line.split_whitespace().collect();
            if t.len() != 9 {
                return None;
            }
            let species: Species = t[0].parse().ok()?;
            let num = |s: &str| s.parse::<u32>().ok();
            let a = Level { species, n: num(t[1])?, l: num(t[2])?, j2: num(t[3])? };
            let b = Level { species, n: num(t[4])?, l: num(t[5])?, j2: num(t[6])? };
            let power: u8 = t[7].parse().ok()?;
            let v: f64 = t[8].parse().ok()?;
            v.is_finite().then_some((IntegralKey::new(a, b, power), v))
        };
        let (k, v) = parse().ok_or_else(|| format!("corrupted record on line {}", no + 4))?;
        map.insert(k, v);
    }
    Ok(map)
}

/// Solves and memoizes wavefunctions for species levels and serves cached
/// radial matrix elements.
#[derive(Debug)]
pub struct RadialSolver {
    params: GridParams,
    wavefunctions: RwLock<HashMap<Level, Arc<RadialWavefunction>>>,
    cache: Arc<RadialIntegralCache>,
}

impl RadialSolver {
    pub fn new(params: GridParams, cache: Arc<RadialIntegralCache>) -> Self {
        RadialSolver { params, wavefunctions: RwLock::new(HashMap::new()), cache }
    }

    pub fn params(&self) -> &GridParams {
        &self.params
    }

    pub fn cache(&self) -> &Arc<RadialIntegralCache> {
        &self.cache
    }

    pub fn solve(&self, table: &SpeciesTable, level: &Level) -> Result<Arc<RadialWavefunction>> {
        if let Some(wf) = self.wavefunctions.read().unwrap().get(level) {
            return Ok(wf.clone());
        }
        table.check_level(level)?;
        let core = self
            .params
            .core_radius
            .unwrap_or_else(|| table.core_polarizability_au.cbrt());
        let mut wf = solve_coulomb(table.effective_n(level), level.n, level.l, core, &self.params)?;
        wf.level = Some(*level);
        let wf = Arc::new(wf);
        self.wavefunctions.write().unwrap().insert(*level, wf.clone());
        Ok(wf)
    }

    /// `<a|r^k|b>` in a0^k, symmetric in `(a, b)` and cached.
    pub fn matrix_element(&self, table: &SpeciesTable, a: &Level, b: &Level, power: u8) -> Result<f64> {
        let key = IntegralKey::new(*a, *b, power);
        if let Some(v) = self.cache.get(&key) {
            return Ok(v);
        }
        let wa = self.solve(table, &key.a)?;
        let wb = self.solve(table, &key.b)?;
        let v = overlap_integral(&wa, &wb, power as i32);
        self.cache.put(key, v);
        Ok(v)
    }

    /// Drops memoized wavefunctions (the integral cache is untouched).
    pub fn clear_wavefunctions(&self) {
        self.wavefunctions.write().unwrap().clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hydrogen(n: u32, l: u32) -> RadialWavefunction {
        solve_coulomb(n as f64, n, l, 0.0, &GridParams::default()).unwrap()
    }

    #[test]
    fn hydrogen_2p_mean_radius() {
        let wf = hydrogen(2, 1);
        assert!((wf.moment(1) / 5.0 - 1.0).abs() < 1e-4, "{}", wf.moment(1));
        assert!(wf.normalization_residual < 1e-6);
    }

    #[test]
    fn hydrogen_1s_2p_dipole() {
        let s = hydrogen(1, 0);
        let p = hydrogen(2, 1);
        // 2^7 sqrt(6) / 3^5
        let exact = 128.0 * 6f64.sqrt() / 243.0;
        let v = overlap_integral(&s, &p, 1);
        assert!((v.abs() / exact - 1.0).abs() < 1e-4, "{v} vs {exact}");
    }

    #[test]
    fn outer_lobe_positive_and_monotone_tail() {
        let wf = solve_coulomb(57.65, 59, 2, 2.0, &GridParams::default()).unwrap();
        let u: Vec<(f64, f64)> = wf.reduced().collect();
        let outer_tp = 2.0 * 57.65f64.powi(2);
        let tail: Vec<f64> = u.iter().filter(|(r, _)| *r > outer_tp + 50.0).map(|p| p.1).collect();
        assert!(tail.iter().all(|&v| v > 0.0));
        assert!(tail.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn n_star_below_l_is_error() {
        assert!(matches!(
            solve_coulomb(1.5, 5, 2, 0.0, &GridParams::default()),
            Err(Error::Solver(_))
        ));
    }

    #[test]
    fn key_is_symmetric() {
        let a = Level { species: Species::Rb87, n: 60, l: 0, j2: 1 };
        let b = Level { species: Species::Rb87, n: 60, l: 1, j2: 1 };
        assert_eq!(IntegralKey::new(a, b, 1), IntegralKey::new(b, a, 1));
    }
}
