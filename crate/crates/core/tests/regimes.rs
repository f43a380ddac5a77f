use num_complex::Complex64;
use proptest::prelude::*;
use rydberg_core::regimes::{
    blockade_radius, dressed_interaction, dressed_interaction_formula, dressed_interaction_oracle,
    effective_two_photon, DressingParams, TwoPhotonDrive,
};
use rydberg_core::spin::fit_rabi_frequency;

/// Rydberg population of the bare three-level ladder `g - e - r` (frame: `e` at
/// `+Delta`, `r` at `-delta`), integrated with classical RK4.
fn ladder_rydberg_population(d: &TwoPhotonDrive, times: &[f64], step: f64) -> Vec<f64> {
    let tau = 2.0 * std::f64::consts::PI;
    let h = [
        [0.0, d.omega_red_hz / 2.0, 0.0],
        [d.omega_red_hz / 2.0, d.delta_hz, d.omega_blue_hz / 2.0],
        [0.0, d.omega_blue_hz / 2.0, -d.two_photon_detuning_hz],
    ];
    let rhs = |psi: &[Complex64; 3]| {
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for i in 0..3 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..3 {
                acc += psi[k] * h[i][k];
            }
            out[i] = Complex64::new(0.0, -tau) * acc;
        }
        out
    };
    let axpy = |a: &[Complex64; 3], k: &[Complex64; 3], s: f64| [a[0] + k[0] * s, a[1] + k[1] * s, a[2] + k[2] * s];
    let mut psi = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
    let mut t = 0.0;
    let mut out = Vec::new();
    for &target in times {
        while t < target - 1e-15 {
            let dt = step.min(target - t);
            let k1 = rhs(&psi);
            let k2 = rhs(&axpy(&psi, &k1, dt / 2.0));
            let k3 = rhs(&axpy(&psi, &k2, dt / 2.0));
            let k4 = rhs(&axpy(&psi, &k3, dt));
            for i in 0..3 {
                psi[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
            }
            t += dt;
        }
        out.push(psi[2].norm_sqr());
    }
    out
}

#[test]
fn two_photon_reduction_matches_three_level_evolution() {
    for ratio in [20.0, 40.0] {
        let base = TwoPhotonDrive {
            omega_red_hz: 100e6,
            omega_blue_hz: 60e6,
            delta_hz: ratio * 100e6,
            two_photon_detuning_hz: 0.0,
            gamma_hz: 0.0,
        };
        let eff = effective_two_photon(&base).unwrap();
        let times: Vec<f64> = (0..=800).map(|i| i as f64 * 5e-9).collect();
        let step = 0.02 / base.delta_hz;
        let probe = |delta: f64| {
            let d = TwoPhotonDrive { two_photon_detuning_hz: delta, ..base };
            let p = ladder_rydberg_population(&d, &times, step);
            fit_rabi_frequency(&times, &p, 0.2e6, 10e6).unwrap()
        };
        // f^2 = Omega_eff^2 + (delta - delta*)^2 sampled at two detunings
        let (d1, d2) = (0.0, 2e6);
        let (f1, f2) = (probe(d1), probe(d2));
        let center = 0.5 * (d1 + d2) - (f1 * f1 - f2 * f2) / (2.0 * (d1 - d2));
        let omega = (f1 * f1 - (d1 - center).powi(2)).sqrt();
        let expected_center = d1 - eff.delta_eff_hz;
        assert!((omega / eff.omega_eff_hz.abs() - 1.0).abs() < 0.01, "{omega} vs {}", eff.omega_eff_hz);
        assert!((center / expected_center - 1.0).abs() < 0.01, "{center} vs {expected_center}");
    }
}

#[test]
fn dressed_formula_reconciles_with_oracle() {
    for omega in [0.1e6, 1e6, 7e6] {
        for k in 0..=40 {
            // |Delta|/Omega log-spaced over [0.2, 50]
            let r = 0.2 * 250f64.powf(k as f64 / 40.0);
            for sign in [1.0, -1.0] {
                let p = DressingParams { omega_hz: omega, detuning_dress_hz: sign * r * omega };
                let j = dressed_interaction(&p);
                assert!(j.consistent, "{p:?}: {j:?}");
                assert!((j.reconciled_hz - j.oracle_hz).abs() <= 1e-6 * j.oracle_hz.abs(), "{p:?}");
            }
        }
    }
}

#[test]
fn dressed_weak_drive_series() {
    // Leading Omega^2/(4 Delta) light shifts cancel; the residue is -Omega^4/(8 Delta^3).
    for (omega, delta) in [(1e6, 50e6), (1e6, -80e6), (2e5, 3e7)] {
        let p = DressingParams { omega_hz: omega, detuning_dress_hz: delta };
        let j = dressed_interaction_oracle(&p);
        let two_level_shift: f64 = omega * omega / (4.0 * delta);
        assert!(j.abs() < 1e-2 * two_level_shift.abs());
        let series = -omega.powi(4) / (8.0 * delta.powi(3));
        assert!((j / series - 1.0).abs() < 5.0 * (omega / delta).powi(2), "{j} {series}");
    }
    let zero = DressingParams { omega_hz: 0.0, detuning_dress_hz: 3e6 };
    assert_eq!(dressed_interaction_oracle(&zero), 0.0);
    assert_eq!(dressed_interaction_formula(&zero), 3e6 / 2.0);
}

proptest! {
    #[test]
    fn blockade_radius_monotone(c6 in 1e9f64..1e15, omega in 1e4f64..1e8, f in 1.01f64..10.0) {
        let r = blockade_radius(c6, omega).unwrap();
        prop_assert!(blockade_radius(c6 * f, omega).unwrap() > r);
        prop_assert!(blockade_radius(c6, omega * f).unwrap() < r);
    }

    #[test]
    fn dressed_consistency_holds(omega in 1e4f64..1e8, ratio in 0.2f64..50.0, negative in any::<bool>()) {
        let d = if negative { -ratio * omega } else { ratio * omega };
        let p = DressingParams { omega_hz: omega, detuning_dress_hz: d };
        prop_assert!(dressed_interaction(&p).consistent);
    }
}
