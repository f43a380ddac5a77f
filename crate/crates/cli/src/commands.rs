use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use rydberg_core::angular::{
    polarizability, stark_basis, stark_hamiltonian_relative, SingleAtomFieldConfig, StarkBasisSpec,
    POLARIZABILITY_DELTA_N,
};
use rydberg_core::fit::power_law;
use rydberg_core::pair::{
    c3_coefficient, c6_effective_manifold, c6_perturbative, crossover_radius, forster_search, scan_distance,
    stark_tune_resonance, write_scan_csv, Crossover, PairBasisParams, PairHamiltonian, PairState, ScanRow,
    StarkTuneOptions, SCAN_SCHEMA_VERSION,
};
use rydberg_core::radial::{CacheHeader, GridParams, RadialIntegralCache, RadialSolver};
use rydberg_core::regimes::{
    blockade_radius, dressed_interaction, effective_two_photon, scattering_rate, DressingParams, TwoPhotonDrive,
};
use rydberg_core::species::properties::{lifetime, mean_radius, RadiusMethod};
use rydberg_core::spin::{bundled_scenario, format_configuration, run_scenario, Scenario};
use rydberg_core::{Atom, Error, Species, SpeciesData, StateLabel};
use serde_json::json;

use crate::args::{Command, Polarization};
use crate::output::{csv_bytes, table, Report};
use crate::CliError;

/// Species tables and the shared radial solver for one run.
pub struct Context {
    pub data: SpeciesData,
    pub cache: Arc<RadialIntegralCache>,
    solver: Arc<RadialSolver>,
}

impl Context {
    pub fn new(species_file: Option<&Path>, cache: Option<&Path>) -> Result<Self, CliError> {
        let data = match species_file {
            Some(p) => SpeciesData::load(p)?,
            None => SpeciesData::bundled(),
        };
        let grid = GridParams::default();
        let header = CacheHeader::new(&grid, data.checksum());
        let cache = Arc::new(match cache {
            Some(p) => RadialIntegralCache::open(p, header),
            None => RadialIntegralCache::in_memory(header),
        });
        let solver = Arc::new(RadialSolver::new(grid, cache.clone()));
        Ok(Context { data, cache, solver })
    }

    pub fn atom(&self, species: Species) -> Result<Atom, Error> {
        Ok(Atom::new(self.data.table(species)?, self.solver.clone()))
    }
}

fn g(x: f64) -> String {
    format!("{x}")
}

fn short(x: f64) -> String {
    format!("{x:.6e}")
}

fn with_n(s: &StateLabel, n: u32) -> StateLabel {
    StateLabel { n, ..*s }
}

fn n_range(start: u32, to: Option<u32>, step: u32) -> Result<Vec<u32>, CliError> {
    let end = to.unwrap_or(start);
    if end < start || step == 0 {
        return Err(CliError::Usage("--n-to must be >= n and --n-step > 0".into()));
    }
    Ok((start..=end).step_by(step as usize).collect())
}

pub fn run(ctx: &Context, cmd: &Command, seed: Option<u64>) -> Result<Report, CliError> {
    match cmd {
        Command::State { spec, temperature } => state(ctx, spec, *temperature),
        Command::C6 { spec, theta, window_ghz, delta_n, delta_l, polarization, n_to, n_step } => {
            let params = PairBasisParams {
                window_hz: window_ghz * 1e9,
                delta_n: *delta_n,
                delta_l: *delta_l,
                ..Default::default()
            };
            c6(ctx, spec, *theta, &params, *polarization, &n_range(spec.n, *n_to, *n_step)?)
        }
        Command::C3 { a, b, target_a, target_b, theta, n_to, n_step } => {
            let target = match (target_a, target_b) {
                (Some(c), Some(d)) => Some((*c, *d)),
                _ => None,
            };
            c3(ctx, a, b, target, *theta, &n_range(a.n, *n_to, *n_step)?)
        }
        Command::Forster { spec, window_mhz, resonance, field_max, distance_um } => {
            forster(ctx, spec, window_mhz * 1e6, *resonance, *field_max, *distance_um)
        }
        Command::Starkmap { spec, field_max, steps, delta_n, forster } => {
            starkmap(ctx, spec, *field_max, *steps, *delta_n, *forster)
        }
        Command::Scan {
            spec,
            partner,
            r_min,
            r_max,
            points,
            theta,
            field,
            window_ghz,
            delta_n,
            delta_l,
            all_m,
            min_weight,
        } => {
            if *theta != 0.0 && !all_m {
                return Err(CliError::Usage("theta != 0 mixes total m_j; add --all-m".into()));
            }
            if *points < 2 || !(r_max > r_min) {
                return Err(CliError::Usage("need --points >= 2 and --r-max > --r-min".into()));
            }
            let params = PairBasisParams {
                window_hz: window_ghz * 1e9,
                delta_n: *delta_n,
                delta_l: *delta_l,
                conserve_m: !all_m,
                ..Default::default()
            };
            let partner = partner.unwrap_or(*spec);
            let radii: Vec<f64> =
                (0..*points).map(|i| r_min + (r_max - r_min) * i as f64 / (*points - 1) as f64).collect();
            scan(ctx, PairState::new(*spec, partner)?, &params, *theta, *field, &radii, *min_weight)
        }
        Command::Dynamics { scenario, bundled } => dynamics(ctx, scenario.as_deref(), bundled.as_deref(), seed),
        Command::Regimes {
            c6_hz_um6,
            omega_hz,
            omega_red_hz,
            omega_blue_hz,
            delta_hz,
            two_photon_detuning_hz,
            gamma_hz,
            dress_omega_hz,
            dress_delta_hz,
        } => {
            let drive = match (omega_red_hz, omega_blue_hz, delta_hz) {
                (Some(r), Some(b), Some(d)) => Some(TwoPhotonDrive {
                    omega_red_hz: *r,
                    omega_blue_hz: *b,
                    delta_hz: *d,
                    two_photon_detuning_hz: *two_photon_detuning_hz,
                    gamma_hz: *gamma_hz,
                }),
                (None, None, None) => None,
                _ => return Err(CliError::Usage("two-photon drive needs --omega-red-hz, --omega-blue-hz and --delta-hz".into())),
            };
            let dressing = match (dress_omega_hz, dress_delta_hz) {
                (Some(o), Some(d)) => Some(DressingParams { omega_hz: *o, detuning_dress_hz: *d }),
                (None, None) => None,
                _ => return Err(CliError::Usage("dressing needs --dress-omega-hz and --dress-delta-hz".into())),
            };
            let blockade = match (c6_hz_um6, omega_hz) {
                (Some(c), Some(o)) => Some((*c, *o)),
                (None, None) => None,
                _ => return Err(CliError::Usage("blockade radius needs --c6-hz-um6 and --omega-hz".into())),
            };
            regimes(blockade, drive, dressing)
        }
        Command::Replay { .. } => unreachable!("replay is resolved before dispatch"),
    }
}

fn state(ctx: &Context, s: &StateLabel, temperature: f64) -> Result<Report, CliError> {
    let atom = ctx.atom(s.species)?;
    let energy = atom.state_energy(s)?;
    let n_star = atom.effective_n(&s.level());
    let radius = mean_radius(&atom, s, RadiusMethod::Numerov)?;
    let life = lifetime(&atom, s, temperature)?;
    let pol = polarizability(&atom, s, POLARIZABILITY_DELTA_N)?;
    let summary = json!({
        "state": s.to_string(),
        "energy_GHz": energy / 1e9,
        "n_star": n_star,
        "mean_radius_nm": radius,
        "temperature_K": temperature,
        "lifetime_us": life.microseconds(),
        "spontaneous_rate_per_s": life.spontaneous_rate,
        "blackbody_rate_per_s": life.blackbody_rate,
        "polarizability_GHz_per_Vcm2": pol.ghz_per_vcm2,
        "polarizability_window_sensitivity": pol.window_sensitivity,
    });
    let header = ["state", "energy_GHz", "n_star", "mean_radius_nm", "lifetime_us", "polarizability_GHz_per_Vcm2"];
    let row = vec![s.to_string(), g(energy / 1e9), g(n_star), g(radius), g(life.microseconds()), g(pol.ghz_per_vcm2)];
    let shown = vec![
        s.to_string(),
        format!("{:.3}", energy / 1e9),
        format!("{n_star:.4}"),
        format!("{radius:.1}"),
        format!("{:.1}", life.microseconds()),
        format!("{:.4}", pol.ghz_per_vcm2),
    ];
    Ok(Report::new(table(&header, &[shown]), &summary)
        .file("state.csv", csv_bytes(&header, &[row]))
        .json_file("state.json", &summary))
}

fn c6(
    ctx: &Context,
    s: &StateLabel,
    theta: f64,
    params: &PairBasisParams,
    polarization: Polarization,
    ns: &[u32],
) -> Result<Report, CliError> {
    let atom = ctx.atom(s.species)?;
    let values: Vec<(u32, f64, f64)> = ns
        .par_iter()
        .map(|&n| {
            let st = with_n(s, n);
            let c6 = if st.l == 0 {
                c6_perturbative(&atom, &st, theta, params)?.c6_ghz_um6
            } else {
                c6_effective_manifold(&atom, &st, theta, polarization.into(), params)?.weighted_ghz_um6
            };
            Ok((n, atom.effective_n(&st.level()), c6))
        })
        .collect::<Result<_, Error>>()?;
    let exponent = if values.len() >= 2 {
        let x: Vec<f64> = values.iter().map(|v| v.1).collect();
        let y: Vec<f64> = values.iter().map(|v| v.2).collect();
        Some(power_law(&x, &y)?.exponent)
    } else {
        None
    };
    let header = ["n", "n_star", "C6_GHz_um6"];
    let rows: Vec<Vec<String>> = values.iter().map(|v| vec![v.0.to_string(), g(v.1), g(v.2)]).collect();
    let shown: Vec<Vec<String>> = values.iter().map(|v| vec![v.0.to_string(), format!("{:.4}", v.1), short(v.2)]).collect();
    let summary = json!({
        "state": s.to_string(),
        "theta_rad": theta,
        "basis": params,
        "c6_GHz_um6": values.iter().map(|v| json!({"n": v.0, "n_star": v.1, "C6_GHz_um6": v.2})).collect::<Vec<_>>(),
        "exponent_vs_n_star": exponent,
    });
    let mut text = table(&header, &shown);
    if let Some(p) = exponent {
        text.push_str(&format!("exponent vs n*: {p:.3}\n"));
    }
    Ok(Report::new(text, &summary).file("c6.csv", csv_bytes(&header, &rows)).json_file("c6.json", &summary))
}

fn c3(
    ctx: &Context,
    a: &StateLabel,
    b: &StateLabel,
    target: Option<(StateLabel, StateLabel)>,
    theta: f64,
    ns: &[u32],
) -> Result<Report, CliError> {
    let atom = ctx.atom(a.species)?;
    let from = PairState::new(*a, *b)?;
    let to = match target {
        Some((c, d)) => PairState::new(c, d)?,
        None => from.swapped(),
    };
    let values: Vec<(u32, f64)> = ns
        .par_iter()
        .map(|&n| {
            let shift = |s: &StateLabel| with_n(s, s.n + n - a.n);
            let f = PairState { a: shift(&from.a), b: shift(&from.b) };
            let t = PairState { a: shift(&to.a), b: shift(&to.b) };
            Ok((n, c3_coefficient(&atom, &f, &t, theta)?))
        })
        .collect::<Result<_, Error>>()?;
    let exponent = if values.len() >= 2 {
        let x: Vec<f64> = values.iter().map(|v| v.0 as f64).collect();
        let y: Vec<f64> = values.iter().map(|v| v.1).collect();
        Some(power_law(&x, &y)?.exponent)
    } else {
        None
    };
    let header = ["n", "C3_GHz_um3"];
    let rows: Vec<Vec<String>> = values.iter().map(|v| vec![v.0.to_string(), g(v.1)]).collect();
    let summary = json!({
        "from": from.to_string(),
        "to": to.to_string(),
        "theta_rad": theta,
        "c3_GHz_um3": values.iter().map(|v| json!({"n": v.0, "C3_GHz_um3": v.1})).collect::<Vec<_>>(),
        "exponent_vs_n": exponent,
    });
    let shown: Vec<Vec<String>> = values.iter().map(|v| vec![v.0.to_string(), format!("{:.5}", v.1)]).collect();
    let mut text = format!("{from} -> {to}\n{}", table(&header, &shown));
    if let Some(p) = exponent {
        text.push_str(&format!("exponent vs n: {p:.3}\n"));
    }
    Ok(Report::new(text, &summary).file("c3.csv", csv_bytes(&header, &rows)).json_file("c3.json", &summary))
}

fn forster(
    ctx: &Context,
    s: &StateLabel,
    window_hz: f64,
    resonance: bool,
    field_max: f64,
    distance_um: f64,
) -> Result<Report, CliError> {
    let atom = ctx.atom(s.species)?;
    let channels = forster_search(&atom, s, window_hz)?;
    let radius = |c: &rydberg_core::pair::ForsterChannel| match crossover_radius(c.c3_ghz_um3, c.defect_hz) {
        Crossover::RadiusUm(r) => r,
        Crossover::Resonant => f64::INFINITY,
    };
    let header = ["target_a", "target_b", "defect_MHz", "C3_GHz_um3", "R_c_um"];
    let rows: Vec<Vec<String>> = channels
        .iter()
        .map(|c| vec![c.target.a.to_string(), c.target.b.to_string(), g(c.defect_hz / 1e6), g(c.c3_ghz_um3), g(radius(c))])
        .collect();
    let shown: Vec<Vec<String>> = channels
        .iter()
        .map(|c| {
            vec![
                c.target.a.to_string(),
                c.target.b.to_string(),
                format!("{:.3}", c.defect_hz / 1e6),
                format!("{:.4}", c.c3_ghz_um3),
                format!("{:.2}", radius(c)),
            ]
        })
        .collect();
    let mut text = table(&header, &shown);
    let res = if resonance {
        let first = channels
            .first()
            .ok_or_else(|| Error::NotFound(format!("no Förster channel of {s} within {window_hz} Hz")))?;
        let opts = StarkTuneOptions { field_max_v_cm: field_max, distance_um, ..Default::default() };
        let r = stark_tune_resonance(&atom, first, &opts)?;
        text.push_str(&format!("resonance: E* = {:.6} V/cm, gap at {} µm = {:.4e} Hz\n", r.field_v_cm, distance_um, r.gap_hz));
        Some(r)
    } else {
        None
    };
    let summary = json!({
        "state": s.to_string(),
        "window_Hz": window_hz,
        "channels": channels,
        "resonance": res,
    });
    Ok(Report::new(text, &summary).file("forster.csv", csv_bytes(&header, &rows)).json_file("forster.json", &summary))
}

fn starkmap(
    ctx: &Context,
    s: &StateLabel,
    field_max: f64,
    steps: usize,
    delta_n: u32,
    mark_forster: bool,
) -> Result<Report, CliError> {
    if steps < 2 || !(field_max > 0.0) {
        return Err(CliError::Usage("need --steps >= 2 and --field-max > 0".into()));
    }
    let atom = ctx.atom(s.species)?;
    let spec = StarkBasisSpec { delta_n, l_max: s.l + 5 };
    let basis = stark_basis(&atom, s, &spec)?;
    let t = basis.iter().position(|x| x == s).expect("state in its basis");
    let e0 = atom.state_energy(s)?;
    let fields: Vec<f64> = (0..steps).map(|i| field_max * i as f64 / (steps - 1) as f64).collect();
    let spectra: Vec<(f64, Vec<(f64, f64)>)> = fields
        .par_iter()
        .map(|&f| {
            let h = stark_hamiltonian_relative(&atom, &basis, &SingleAtomFieldConfig::electric(f), e0)?;
            let eig = h.symmetric_eigen();
            let mut levels: Vec<(f64, f64)> = (0..eig.eigenvalues.len())
                .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(t, k)].powi(2)))
                .collect();
            levels.sort_by(|a, b| a.0.total_cmp(&b.0));
            Ok((f, levels))
        })
        .collect::<Result<_, Error>>()?;
    let header = ["E_Vcm", "eigenvalue_Hz", "overlap"];
    let mut rows = Vec::new();
    let mut branch = Vec::new();
    for (f, levels) in &spectra {
        for (e, w) in levels {
            rows.push(vec![g(*f), g(*e), g(*w)]);
        }
        let best = levels.iter().fold((0.0, -1.0), |b, &(e, w)| if w > b.1 { (e, w) } else { b });
        branch.push(json!({"E_Vcm": f, "shift_Hz": best.0}));
    }
    let mut text = format!("{} basis states, {} fields up to {} V/cm\n", basis.len(), steps, field_max);
    let last = spectra.last().map(|(_, l)| l.iter().fold((0.0, -1.0), |b, &(e, w)| if w > b.1 { (e, w) } else { b }).0);
    if let Some(shift) = last {
        text.push_str(&format!("shift of {s} at {field_max} V/cm: {:.4} MHz\n", shift / 1e6));
    }
    let resonance = if mark_forster {
        let ch = forster_search(&atom, s, 200e6)?;
        let first = ch.first().ok_or_else(|| Error::NotFound(format!("no Förster channel of {s}")))?;
        let r = stark_tune_resonance(
            &atom,
            first,
            &StarkTuneOptions { field_max_v_cm: field_max, ..Default::default() },
        )?;
        text.push_str(&format!("Förster resonance {} at E* = {:.6} V/cm\n", first.target, r.field_v_cm));
        Some(r)
    } else {
        None
    };
    let summary = json!({
        "state": s.to_string(),
        "basis_size": basis.len(),
        "target_branch": branch,
        "forster_resonance": resonance,
        "e_star_Vcm": resonance.map(|r| r.field_v_cm),
    });
    Ok(Report::new(text, &summary).file("starkmap.csv", csv_bytes(&header, &rows)).json_file("starkmap.json", &summary))
}

fn scan(
    ctx: &Context,
    target: PairState,
    params: &PairBasisParams,
    theta: f64,
    field: f64,
    radii: &[f64],
    min_weight: f64,
) -> Result<Report, CliError> {
    let atom = ctx.atom(target.a.species)?;
    let basis = rydberg_core::pair::build_pair_basis(&atom, target, params)?;
    let size = basis.len();
    let h = PairHamiltonian::new(&atom, basis, theta, SingleAtomFieldConfig::electric(field))?;
    let spectra = scan_distance(&h, radii)?;
    let rows: Vec<ScanRow> = spectra.iter().flat_map(|s| ScanRow::from_spectrum(s, min_weight)).collect();
    let branch: Vec<(f64, f64)> = spectra.iter().map(|s| (s.geometry.distance_um, s.target_energy())).collect();
    let slope = if branch.iter().all(|b| b.1 != 0.0) {
        let x: Vec<f64> = branch.iter().map(|b| b.0).collect();
        let y: Vec<f64> = branch.iter().map(|b| b.1).collect();
        power_law(&x, &y).ok().map(|p| p.exponent)
    } else {
        None
    };
    let mut csv = Vec::new();
    write_scan_csv(&rows, &mut csv)?;
    let summary = json!({
        "schema_version": SCAN_SCHEMA_VERSION,
        "target": target.to_string(),
        "basis": params,
        "basis_size": size,
        "theta_rad": theta,
        "E_Vcm": field,
        "target_branch": branch.iter().map(|b| json!({"R_um": b.0, "eigenvalue_Hz": b.1})).collect::<Vec<_>>(),
        "loglog_slope": slope,
        "rows": rows,
    });
    let shown: Vec<Vec<String>> = branch.iter().map(|b| vec![format!("{:.3}", b.0), short(b.1)]).collect();
    let mut text = format!("{target}: {size} pair states\n{}", table(&["R_um", "eigenvalue_Hz"], &shown));
    if let Some(p) = slope {
        text.push_str(&format!("log-log slope: {p:.3}\n"));
    }
    Ok(Report::new(text, json!({"target": target.to_string(), "basis_size": size, "loglog_slope": slope}))
        .file("scan.csv", csv)
        .json_file("scan.json", &summary))
}

fn dynamics(ctx: &Context, path: Option<&Path>, bundled: Option<&str>, seed: Option<u64>) -> Result<Report, CliError> {
    let (mut scenario, input) = match (path, bundled) {
        (Some(p), _) => {
            let bytes = std::fs::read(p)?;
            let text = String::from_utf8(bytes.clone()).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
            (Scenario::from_json(&text)?, Some((p.display().to_string(), bytes)))
        }
        (None, Some(name)) => (bundled_scenario(name)?, None),
        (None, None) => return Err(CliError::Usage("give a scenario file or --bundled NAME".into())),
    };
    if let Some(s) = seed {
        scenario.seed = s;
    }
    let out = run_scenario(&scenario, &|sp| ctx.atom(sp))?;
    let n = scenario.positions_um.len();
    let configs: Vec<String> = (0..1usize << n).map(|c| format_configuration(c, n)).collect();
    let mut header: Vec<String> = vec!["time_s".into()];
    header.extend(configs.iter().map(|c| format!("P_{c}")));
    header.extend(configs.iter().map(|c| format!("measured_{c}")));
    let rows: Vec<Vec<String>> = out
        .result
        .times
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let mut r = vec![g(*t)];
            r.extend(out.result.populations[i].iter().map(|x| g(*x)));
            r.extend(out.result.measured[i].iter().map(|x| g(*x)));
            r
        })
        .collect();
    let header_ref: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut text = format!("scenario {} ({} atoms, {:?})\n", scenario.name, n, scenario.model);
    let peaks: Vec<Vec<String>> = out
        .peaks
        .iter()
        .map(|p| vec![p.configuration.clone(), format!("{:.4}", p.peak), format!("{:.4e}", p.peak_time_s)])
        .collect();
    text.push_str(&table(&["configuration", "peak", "peak_time_s"], &peaks));
    if let (Some(f), Some(d)) = (out.collective_frequency_hz, &scenario.drive) {
        text.push_str(&format!("collective frequency / Omega: {:.5}\n", f / d.omega_hz));
    }
    if let Some(c) = &out.collapse_revival {
        text.push_str(&format!(
            "collapse at lag {} ({:.3}), revival at lag {} ({:.3})\n",
            c.collapse_lag, c.collapse_value, c.revival_lag, c.revival_value
        ));
    }
    let summary = json!({
        "scenario": scenario.name,
        "peaks": out.peaks,
        "collective_frequency_Hz": out.collective_frequency_hz,
        "collapse_revival": out.collapse_revival,
        "retained_fraction": out.result.retained_fraction,
    });
    let mut report = Report::new(text, &summary)
        .file("dynamics.csv", csv_bytes(&header_ref, &rows))
        .json_file("dynamics.json", &out);
    if let Some(shots) = &out.shots {
        let rows: Vec<Vec<String>> = shots
            .outcomes
            .iter()
            .enumerate()
            .flat_map(|(i, row)| {
                let t = shots.times[i];
                row.iter().enumerate().map(move |(k, o)| {
                    vec![g(t), k.to_string(), o.map_or("lost".to_string(), |c| format_configuration(c, n))]
                })
            })
            .collect();
        report = report.file("shots.csv", csv_bytes(&["time_s", "shot", "outcome"], &rows));
    }
    if let Some(i) = input {
        report.inputs.push(i);
    }
    Ok(report)
}

fn regimes(
    blockade: Option<(f64, f64)>,
    drive: Option<TwoPhotonDrive>,
    dressing: Option<DressingParams>,
) -> Result<Report, CliError> {
    if blockade.is_none() && drive.is_none() && dressing.is_none() {
        return Err(CliError::Usage("give blockade, two-photon or dressing inputs".into()));
    }
    let mut rows: Vec<(String, f64, String)> = Vec::new();
    if let Some((c6, omega)) = blockade {
        rows.push(("blockade_radius".into(), blockade_radius(c6, omega)?, "um".into()));
    }
    if let Some(d) = drive {
        let e = effective_two_photon(&d)?;
        rows.push(("omega_eff".into(), e.omega_eff_hz, "Hz".into()));
        rows.push(("delta_eff".into(), e.delta_eff_hz, "Hz".into()));
        rows.push(("gamma_eff".into(), scattering_rate(&d)?, "Hz".into()));
    }
    if let Some(p) = dressing {
        let j = dressed_interaction(&p);
        rows.push(("dressed_J_formula".into(), j.formula_hz, "Hz".into()));
        rows.push(("dressed_J_oracle".into(), j.oracle_hz, "Hz".into()));
        rows.push(("dressed_J_reconciled".into(), j.reconciled_hz, "Hz".into()));
        rows.push(("dressed_consistent".into(), if j.consistent { 1.0 } else { 0.0 }, "bool".into()));
    }
    let csv_rows: Vec<Vec<String>> = rows.iter().map(|r| vec![r.0.clone(), g(r.1), r.2.clone()]).collect();
    let shown: Vec<Vec<String>> = rows.iter().map(|r| vec![r.0.clone(), short(r.1), r.2.clone()]).collect();
    let summary: serde_json::Map<String, serde_json::Value> =
        rows.iter().map(|r| (format!("{}_{}", r.0, r.2), json!(r.1))).collect();
    Ok(Report::new(table(&["quantity", "value", "unit"], &shown), &summary)
        .file("regimes.csv", csv_bytes(&["quantity", "value", "unit"], &csv_rows))
        .json_file("regimes.json", &summary))
}
