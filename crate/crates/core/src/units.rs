//! Physical constants and unit conversions.
//!
//! Every energy handled by this crate is `E/h` in Hz and every Rabi frequency
//! is `Omega/2pi` in Hz. Lengths are in atomic units (a0) inside the radial
//! solver and in micrometres everywhere else. Dipole moments are in `e*a0`.

/// Planck constant (J s).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Elementary charge (C).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Bohr radius (m).
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
/// Vacuum permittivity (F/m).
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Bohr magneton over h (Hz/G).
pub const BOHR_MAGNETON_HZ_PER_GAUSS: f64 = 1.399_624_493_61e6;
/// Electron spin g-factor magnitude.
pub const SPIN_G_FACTOR: f64 = 2.0023;

/// Bohr radius in nm.
pub const BOHR_RADIUS_NM: f64 = BOHR_RADIUS * 1e9;

/// `(e a0) * (1 V/cm) / h` in Hz: Stark coupling of a 1 e*a0 dipole in 1 V/cm.
pub fn stark_hz_per_ea0_vcm() -> f64 {
    ELEMENTARY_CHARGE * BOHR_RADIUS * 100.0 / PLANCK
}

/// `(e a0)^2 / (4 pi eps0 h)` expressed in Hz * um^3.
///
/// Multiplying a product of two dipole matrix elements (in e*a0) by this and
/// dividing by `R^3` (um^3) gives a dipole-dipole energy in Hz.
pub fn dipole_dipole_hz_um3() -> f64 {
    let si = (ELEMENTARY_CHARGE * BOHR_RADIUS).powi(2)
        / (4.0 * std::f64::consts::PI * EPSILON_0 * PLANCK);
    si * 1e18
}

/// Spontaneous emission prefactor: `A = PREFACTOR * nu^3 * |d|^2` with `nu` in
/// Hz and `|d|^2` in (e*a0)^2, giving a rate in 1/s.
///
/// Derived from `A = omega^3 |d|^2 / (3 pi eps0 hbar c^3)`.
pub fn spontaneous_rate_prefactor() -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let hbar = PLANCK / two_pi;
    let d2 = (ELEMENTARY_CHARGE * BOHR_RADIUS).powi(2);
    two_pi.powi(3) * d2
        / (3.0 * std::f64::consts::PI * EPSILON_0 * hbar * SPEED_OF_LIGHT.powi(3))
}

/// Mean photon occupation of a thermal mode at frequency `nu_hz` and `temperature_k`.
pub fn planck_occupation(nu_hz: f64, temperature_k: f64) -> f64 {
    if temperature_k <= 0.0 {
        return 0.0;
    }
    let x = PLANCK * nu_hz.abs() / (BOLTZMANN * temperature_k);
    1.0 / x.exp_m1()
}
