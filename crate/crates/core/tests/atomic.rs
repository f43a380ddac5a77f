use std::sync::Arc;

use proptest::prelude::*;
use rydberg_core::angular::{
    dipole_matrix_element, polarizability, stark_basis, stark_hamiltonian, stark_shift, wigner3j_doubled,
    wigner6j_doubled, zeeman_shift, SingleAtomFieldConfig, SphericalDipoleComponent, StarkBasisSpec,
};
use rydberg_core::fit::power_law;
use rydberg_core::pair::{c6_perturbative, PairBasisParams};
use rydberg_core::radial::{CacheHeader, GridParams, IntegralKey, RadialIntegralCache, RadialSolver};
use rydberg_core::species::properties::{lifetime, mean_radius, RadiusMethod};
use rydberg_core::{Atom, Level, Species, SpeciesData, StateLabel};

fn rb() -> Atom {
    Atom::bundled(Species::Rb87)
}

fn st(s: &str) -> StateLabel {
    s.parse().unwrap()
}

fn solver_with(cache: RadialIntegralCache, grid: GridParams) -> Arc<RadialSolver> {
    Arc::new(RadialSolver::new(grid, Arc::new(cache)))
}

#[test]
fn rb80s_energy_and_spacing() {
    let atom = rb();
    let e80 = atom.state_energy(&st("Rb:80S1/2")).unwrap();
    let e81 = atom.state_energy(&st("Rb:81S1/2")).unwrap();
    assert!((e80 / -500e9 - 1.0).abs() < 0.15, "{e80}");
    assert!(((e81 - e80) / 13e9 - 1.0).abs() < 0.15, "{}", e81 - e80);
}

#[test]
fn high_l_energy_is_hydrogenic() {
    let data = SpeciesData::bundled();
    for species in [Species::Rb87, Species::Cs133] {
        let table = data.table(species).unwrap();
        for n in [20, 55, 90] {
            for l in [4, 7] {
                let lvl = Level::new(species, n, l, l as f64 + 0.5).unwrap();
                let h = -table.rydberg_hz / (n as f64 * n as f64);
                assert_eq!(table.level_energy_hz(&lvl), h);
            }
        }
    }
}

#[test]
fn fine_structure_shrinks_with_l() {
    let atom = rb();
    for n in [30, 60, 90] {
        let split: Vec<f64> = (1..4)
            .map(|l| {
                let lo = Level::new(Species::Rb87, n, l, l as f64 - 0.5).unwrap();
                let hi = Level::new(Species::Rb87, n, l, l as f64 + 0.5).unwrap();
                (atom.level_energy(&hi).unwrap() - atom.level_energy(&lo).unwrap()).abs()
            })
            .collect();
        assert!(split[0] > split[1] && split[1] > split[2], "n={n}: {split:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn energy_increases_with_n(n in 12u32..150, l in 0u32..4, up in any::<bool>(), cs in any::<bool>()) {
        let species = if cs { Species::Cs133 } else { Species::Rb87 };
        let data = SpeciesData::bundled();
        let table = data.table(species).unwrap();
        let j = if up || l == 0 { l as f64 + 0.5 } else { l as f64 - 0.5 };
        let a = Level::new(species, n, l, j).unwrap();
        let b = Level::new(species, n + 1, l, j).unwrap();
        prop_assume!(table.check_level(&a).is_ok());
        prop_assert!(table.level_energy_hz(&b) > table.level_energy_hz(&a));
        prop_assert!(table.effective_n(&a) > 0.0);
        let d = table.quantum_defect(n, l, a.j2);
        prop_assert!((0.0..5.0).contains(&d));
    }

    #[test]
    fn three_j_orthogonality(j1 in 0i32..6, j2 in 0i32..6, j3 in 0i32..12, j3p in 0i32..12, m3 in -6i32..7) {
        let (j1, j2, j3, j3p, m3) = (2 * j1, 2 * j2, 2 * j3, 2 * j3p, 2 * m3);
        prop_assume!(m3.abs() <= j3.min(j3p));
        let mut sum = 0.0;
        for m1 in (-j1..=j1).step_by(2) {
            let m2 = -m1 - m3;
            if m2.abs() > j2 {
                continue;
            }
            sum += wigner3j_doubled(j1, j2, j3, m1, m2, m3) * wigner3j_doubled(j1, j2, j3p, m1, m2, m3);
        }
        let triangle = j3 >= (j1 - j2).abs() && j3 <= j1 + j2;
        let expect = if j3 == j3p && triangle { 1.0 / (j3 as f64 + 1.0) } else { 0.0 };
        prop_assert!((sum - expect).abs() < 1e-10, "{sum} vs {expect}");
    }

    #[test]
    fn three_j_symmetries(j1 in 0i32..9, j2 in 0i32..9, j3 in 0i32..9, m1 in -8i32..9, m2 in -8i32..9) {
        let m3 = -m1 - m2;
        let w = wigner3j_doubled(j1, j2, j3, m1, m2, m3);
        let sign = if (j1 + j2 + j3) % 4 == 0 { 1.0 } else { -1.0 };
        prop_assert_eq!(w, wigner3j_doubled(j2, j3, j1, m2, m3, m1));
        if (j1 + j2 + j3) % 2 == 0 {
            prop_assert!((wigner3j_doubled(j2, j1, j3, m2, m1, m3) - sign * w).abs() < 1e-12);
            prop_assert!((wigner3j_doubled(j1, j2, j3, -m1, -m2, -m3) - sign * w).abs() < 1e-12);
        }
    }

    #[test]
    fn six_j_column_symmetry(a in 0i32..8, b in 0i32..8, c in 0i32..8, d in 0i32..8, e in 0i32..8, f in 0i32..8) {
        let w = wigner6j_doubled(a, b, c, d, e, f);
        prop_assert!((w - wigner6j_doubled(b, a, c, e, d, f)).abs() < 1e-12);
        prop_assert!((w - wigner6j_doubled(a, e, f, d, b, c)).abs() < 1e-12);
        prop_assert!(w.is_finite());
    }

    #[test]
    fn dipole_hermiticity(n in 40u32..70, dn in -2i32..3, lj in 0usize..4, mj in 0usize..4, q in -1i32..2) {
        let atom = rb();
        let terms = [("S", "1/2", 1), ("P", "1/2", 1), ("P", "3/2", 3), ("D", "3/2", 3)];
        let (la, ja, j2a) = terms[lj];
        let (lb, jb, j2b) = terms[(lj + 1) % 4];
        let ma = -j2a + 2 * (mj as i32 % (j2a + 1));
        let mb = ma + 2 * q;
        prop_assume!(mb.abs() <= j2b);
        let a: StateLabel = format!("Rb:{n}{la}{ja}:{ma}/2").parse().unwrap();
        let b: StateLabel = format!("Rb:{}{lb}{jb}:{mb}/2", (n as i32 + dn) as u32).parse().unwrap();
        let ab = dipole_matrix_element(&atom, &b, &a, SphericalDipoleComponent::new(q).unwrap()).unwrap();
        let ba = dipole_matrix_element(&atom, &a, &b, SphericalDipoleComponent::new(-q).unwrap()).unwrap();
        let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((ab - sign * ba).abs() <= 1e-9 * ab.abs().max(1.0), "{ab} {ba}");
    }
}

#[test]
fn microwave_dipole_element() {
    let d = dipole_matrix_element(
        &rb(),
        &st("Rb:62D3/2:3/2"),
        &st("Rb:63P1/2:1/2"),
        SphericalDipoleComponent::new(1).unwrap(),
    )
    .unwrap();
    assert!((d.abs() / 2858.0 - 1.0).abs() < 0.02, "{d}");
}

#[test]
fn zeeman_of_stretched_d_state() {
    // g_J = 1 + (g_s - 1) (j(j+1) - l(l+1) + 3/4) / (2 j(j+1)) with g_s = 2.0023
    let g = 1.0 + 1.0023 * (3.75 - 6.0 + 0.75) / 7.5;
    let s = zeeman_shift(&st("Rb:62D3/2:3/2"), 10.0).unwrap();
    assert!((s - g * 1.5 * 1.399_624_5e6 * 10.0).abs() < 1e2, "{s}");
}

#[test]
fn mean_radius_of_80s() {
    let r = mean_radius(&rb(), &st("Rb:80S1/2"), RadiusMethod::Numerov).unwrap();
    assert!((r / 500.0 - 1.0).abs() < 0.10, "{r}");
    let h = mean_radius(&rb(), &st("Rb:80S1/2"), RadiusMethod::Hydrogenic).unwrap();
    assert!((r / h - 1.0).abs() < 0.01);
}

#[test]
fn lifetimes() {
    let atom = rb();
    let hot = lifetime(&atom, &st("Rb:80S1/2"), 300.0).unwrap().microseconds();
    let cold = lifetime(&atom, &st("Rb:80S1/2"), 0.0).unwrap().microseconds();
    assert!(hot > 100.0 && hot < 400.0, "{hot}");
    assert!(cold > hot);

    let n80 = atom.effective_n(&st("Rb:80S1/2").level());
    let n63 = atom.effective_n(&st("Rb:63S1/2").level());
    let c63 = lifetime(&atom, &st("Rb:63S1/2"), 0.0).unwrap().microseconds();
    assert!((cold / c63 / (n80 / n63).powi(3) - 1.0).abs() < 0.15);

    let (mut x, mut y) = (vec![], vec![]);
    for n in (40..=90).step_by(10) {
        let s = st(&format!("Rb:{n}S1/2"));
        x.push(atom.effective_n(&s.level()));
        y.push(lifetime(&atom, &s, 0.0).unwrap().total_rate().recip());
    }
    let p = power_law(&x, &y).unwrap().exponent;
    assert!((2.8..=3.2).contains(&p), "{p}");
}

#[test]
fn wavefunctions_normalized() {
    let atom = rb();
    for s in ["Rb:40S1/2", "Rb:80S1/2", "Rb:62D3/2", "Rb:63P1/2", "Rb:57F5/2"] {
        let w = atom.radial_wavefunction(&st(s).level()).unwrap();
        assert!(w.normalization_residual < 1e-6, "{s}: {}", w.normalization_residual);
        let radii: Vec<f64> = w.grid.radii().collect();
        assert!(radii.windows(2).all(|p| p[1] > p[0]) && radii[0] > 0.0);
    }
}

#[test]
fn halving_grid_step_keeps_integrals() {
    let data = SpeciesData::bundled();
    let table = data.table(Species::Rb87).unwrap();
    let header = |g: &GridParams| CacheHeader::new(g, data.checksum());
    let coarse_grid = GridParams::default();
    let fine_grid = GridParams::with_step(coarse_grid.step / 2.0);
    let coarse = solver_with(RadialIntegralCache::in_memory(header(&coarse_grid)), coarse_grid);
    let fine = solver_with(RadialIntegralCache::in_memory(header(&fine_grid)), fine_grid);
    for (a, b) in [("Rb:62D3/2", "Rb:63P1/2"), ("Rb:80S1/2", "Rb:80P3/2"), ("Rb:59D3/2", "Rb:57F5/2")] {
        let (a, b): (Level, Level) = (a.parse().unwrap(), b.parse().unwrap());
        let x = coarse.matrix_element(&table, &a, &b, 1).unwrap();
        let y = fine.matrix_element(&table, &a, &b, 1).unwrap();
        assert!(((x - y) / y).abs() < 1e-4, "{a} {b}: {x} {y}");
    }
}

#[test]
fn cache_persists_exact_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("radial.cache");
    let data = SpeciesData::bundled();
    let table = data.table(Species::Rb87).unwrap();
    let grid = GridParams::default();
    let header = CacheHeader::new(&grid, data.checksum());
    let a: Level = "Rb:62D3/2".parse().unwrap();
    let b: Level = "Rb:63P1/2".parse().unwrap();

    let cold = solver_with(RadialIntegralCache::open(&path, header.clone()), grid);
    let v = cold.matrix_element(&table, &a, &b, 1).unwrap();
    let v2 = cold.matrix_element(&table, &a, &b, 2).unwrap();
    cold.cache().flush().unwrap();

    let warm = RadialIntegralCache::open(&path, header.clone());
    assert_eq!(warm.get(&IntegralKey::new(b, a, 1)).map(f64::to_bits), Some(v.to_bits()));
    assert_eq!(warm.get(&IntegralKey::new(a, b, 2)).map(f64::to_bits), Some(v2.to_bits()));

    let other = CacheHeader::new(&GridParams::with_step(0.02), data.checksum());
    assert!(RadialIntegralCache::open(&path, other).is_empty());
}

#[test]
fn cold_and_warm_c6_identical() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("radial.cache");
    let data = SpeciesData::bundled();
    let table = data.table(Species::Rb87).unwrap();
    let grid = GridParams::default();
    let header = CacheHeader::new(&grid, data.checksum());
    let params = PairBasisParams { window_hz: 20e9, delta_n: 3, ..Default::default() };
    let run = || {
        let solver = solver_with(RadialIntegralCache::open(&path, header.clone()), grid);
        let atom = Atom::new(table.clone(), solver.clone());
        let before = solver.cache().len();
        let c: Vec<u64> = [60, 70, 80]
            .iter()
            .map(|n| c6_perturbative(&atom, &st(&format!("Rb:{n}S1/2")), 0.0, &params).unwrap().c6_ghz_um6.to_bits())
            .collect();
        solver.cache().flush().unwrap();
        (before, c)
    };
    let (before_cold, cold) = run();
    let (before_warm, warm) = run();
    assert_eq!(before_cold, 0);
    assert!(before_warm > 0);
    assert_eq!(cold, warm);
}

#[test]
fn polarizability_of_80s() {
    let p = polarizability(&rb(), &st("Rb:80S1/2"), 6).unwrap();
    assert!(p.ghz_per_vcm2 < 0.0);
    assert!(p.converged(), "{}", p.window_sensitivity);
    // published nS fit 2.202e-9 n*^6 + 5.53e-11 n*^7 MHz/(V/cm)^2
    let ns = rb().effective_n(&st("Rb:80S1/2").level());
    let fit = (2.202e-9 * ns.powi(6) + 5.53e-11 * ns.powi(7)) * 1e-3;
    assert!((p.ghz_per_vcm2.abs() / fit - 1.0).abs() < 0.05, "{} vs {fit}", p.ghz_per_vcm2);
}

#[test]
fn polarizability_matches_stark_curvature() {
    let atom = rb();
    for s in ["Rb:60S1/2", "Rb:62D3/2:1/2", "Rb:59D3/2"] {
        let s = st(s);
        let p = polarizability(&atom, &s, 6).unwrap();
        let spec = StarkBasisSpec { delta_n: 6, l_max: s.l + 5 };
        let e = 2e-3;
        let shift = stark_shift(&atom, &s, &spec, e).unwrap();
        let alpha_fd = 2.0 * shift / (e * e) / 1e9;
        assert!((alpha_fd / p.ghz_per_vcm2 - 1.0).abs() < 0.02, "{s}: {alpha_fd} {}", p.ghz_per_vcm2);
    }
}

#[test]
fn stark_matrices_hermitian() {
    let atom = rb();
    let s = st("Rb:59D3/2");
    let basis = stark_basis(&atom, &s, &StarkBasisSpec::around(&s)).unwrap();
    let fields = SingleAtomFieldConfig { electric_v_cm: 0.3, magnetic_gauss: 5.0 };
    let h = stark_hamiltonian(&atom, &basis, &fields).unwrap();
    assert_eq!(h, h.transpose());
    assert!(h.symmetric_eigen().eigenvalues.iter().all(|e| e.is_finite()));
}
