//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::collections::BTreeMap;
use std::time::Instant;

use adiabat::experiment::{
    checkpoint_indices, lindblad_check, run_point, HolonomySetup, ModelSetup, Problem, RunOptions, SweepMetrics,
};
use adiabat::linalg::ComplexMatrix;
use adiabat::models::holonomy::{
    analytic_eigenbasis, approximate_block_matrix, computational_projector, Gauge, SpherePath, HolonomyFamily, LABEL_DARK, LABEL_MINUS, LABEL_PLUS,
};
use adiabat::models::random::make_random_model;
use adiabat::propagation::{integrate, InvariantReport, Method, StepGrid};
use adiabat::resonance::{resonance_tensor_for, ResonanceOptions};
use adiabat::spectral::{BasisChoice, DEFAULT_DEGENERACY_TOL};
use adiabat_cli::presets::{preset, PresetKind, PRESET_NAMES};
use num_complex::Complex64 as C64;

const HOLONOMY_GAMMAS: [f64; 3] = [0.0, 0.01, 0.1];

struct Outcome {
    criterion: usize,
    title: &'static str,
    passed: bool,
    detail: String,
}

/// Sweep results keyed by (model, Γ bits, T bits).
type Key = (&'static str, u64, u64);

struct SweepPoint {
    metrics: SweepMetrics,
    invariants: InvariantReport,
    choi_min: f64,
}

struct Sweeps {
    coarse: BTreeMap<Key, SweepPoint>,
    fine: BTreeMap<Key, SweepMetrics>,
    /// Points of each sweep preset.
    presets: Vec<(&'static str, Vec<Key>)>,
}

fn key(setup: &ModelSetup, g: f64, t: f64) -> Key {
    (setup.name(), g.to_bits(), t.to_bits())
}

fn run_sweeps() -> Sweeps {
    let mut coarse = BTreeMap::new();
    let mut fine = BTreeMap::new();
    let mut presets = Vec::new();
    for name in PRESET_NAMES {
        let p = preset(name).unwrap();
        if !matches!(p.kind, PresetKind::Sweep(_)) {
            continue;
        }
        let setup = p.config.model_setup();
        let mut keys = Vec::new();
        for (g, t) in p.config.points() {
            let k = key(&setup, g, t);
            keys.push(k);
            if coarse.contains_key(&k) {
                continue;
            }
            let options = RunOptions { dt: p.config.dt, checkpoints: p.config.checkpoints, ..RunOptions::default() };
            let o = run_point(&setup, g, t, &options).unwrap();
            coarse.insert(k, SweepPoint { metrics: o.metrics, invariants: o.invariants, choi_min: o.choi_min.unwrap() });
            let options = RunOptions { dt: p.config.dt / 2.0, check_cp: false, ..options };
            fine.insert(k, run_point(&setup, g, t, &options).unwrap().metrics);
        }
        presets.push((name, keys));
    }
    Sweeps { coarse, fine, presets }
}

fn metrics<'a>(sweeps: &'a Sweeps, model: &'static str, g: f64, t: f64) -> &'a SweepMetrics {
    &sweeps.coarse[&(model, g.to_bits(), t.to_bits())].metrics
}

/// Integrates the 6×6 block equation over the orange-slice loop and compares
/// the dark block with the closed form.
fn closed_form_vs_ode() -> Outcome {
    let setup = HolonomySetup::default();
    let run_time = 100.0;
    let mut worst: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    for gamma in HOLONOMY_GAMMAS {
        let start = Instant::now();
        let path = setup.path(run_time).unwrap();
        let grid = StepGrid::uniform(0.01, run_time, &path.breakpoints()).unwrap();
        // the loop starts at the north pole, where χ₁ = |0⟩ and χ₂ = |1⟩
        let rho0 = setup.initial_density().unwrap();
        let v0 = [rho0[(0, 0)], rho0[(0, 1)], rho0[(1, 0)], rho0[(1, 1)], rho0[(2, 2)], rho0[(3, 3)]];
        let x0 = ComplexMatrix::from_row_major(6, 1, v0.to_vec()).unwrap();
        let xs = integrate(|s| Ok(approximate_block_matrix(&path, gamma, run_time, s)), &x0, &grid, Method::Magnus4).unwrap();
        let v = xs.last().unwrap().column(0);
        let rho_a = ComplexMatrix::from_rows(&[&[v[0], v[1]], &[v[2], v[3]]]);
        // back to the lab frame with the dark columns of the final eigenbasis
        let (theta, phi) = path.angles(1.0);
        let b = analytic_eigenbasis(theta, phi, Gauge::EquatorRegular).unwrap();
        let dark = ComplexMatrix::from_fn(2, 2, |i, j| b[(i, j)]);
        let block = dark.matmul(&rho_a).matmul(&dark.adjoint());
        let expected = setup.closed_form(gamma, run_time);
        worst = worst.max((&block - &expected).max_abs());
        slowest = slowest.max(start.elapsed().as_secs_f64());
    }
    Outcome {
        criterion: 1,
        title: "closed-form output vs. integrated block equation",
        passed: worst <= 1e-6 && slowest < 5.0,
        detail: format!("max entrywise deviation {worst:.3e} (bound 1e-6), slowest case {slowest:.2} s (bound 5 s)"),
    }
}

fn lindblad_factorization() -> Outcome {
    let samples: Vec<f64> = (0..10).map(|j| j as f64 / 9.0).collect();
    let setup = HolonomySetup::default();
    let family = setup.family(1.0).unwrap();
    let diss = setup.dissipator().unwrap();
    let tensor = resonance_tensor_for(&family, DEFAULT_DEGENERACY_TOL, ResonanceOptions::default()).unwrap();
    let a = lindblad_check(&family, &diss, &tensor, &samples).unwrap();
    let model = make_random_model(adiabat::experiment::DEFAULT_SEED, 4).unwrap();
    let diss = model.dissipator().unwrap();
    let tensor = resonance_tensor_for(&model, DEFAULT_DEGENERACY_TOL, ResonanceOptions::default()).unwrap();
    let b = lindblad_check(&model, &diss, &tensor, &samples).unwrap();
    let residual = a.max_residual.max(b.max_residual);
    let lambda = a.min_g_eigenvalue.min(b.min_g_eigenvalue);
    Outcome {
        criterion: 2,
        title: "Lindblad re-factorization of the filtered dissipator",
        passed: residual <= 1e-9 && lambda >= -1e-10,
        detail: format!("max Frobenius residual {residual:.3e} (bound 1e-9), min λ {lambda:.3e} (bound −1e-10)"),
    }
}

fn complete_positivity(sweeps: &Sweeps) -> Outcome {
    let mut parts = Vec::new();
    let mut passed = true;
    for (name, keys) in &sweeps.presets {
        let min = keys.iter().map(|k| sweeps.coarse[k].choi_min).fold(f64::INFINITY, f64::min);
        passed &= min >= -1e-8;
        parts.push(format!("{name} {min:.3e}"));
    }
    Outcome {
        criterion: 3,
        title: "complete positivity of the approximate propagator",
        passed,
        detail: format!("min Choi eigenvalue per preset: {} (bound −1e-8)", parts.join(", ")),
    }
}

/// Lab-frame vs. rotated-frame evolution, and the two gauges, on the block
/// decomposition at the checkpoints.
fn frame_equivalence() -> Outcome {
    let run_time = 100.0;
    let method = Method::Magnus4;
    let setup = HolonomySetup::default();
    let diss = setup.dissipator().unwrap();
    let rho0 = setup.initial_density().unwrap();
    let equator = HolonomyFamily::new(setup.path(run_time).unwrap(), Gauge::EquatorRegular);
    let north = HolonomyFamily::new(setup.path(run_time).unwrap(), Gauge::NorthPoleRegular);
    let pe = Problem { family: &equator, dissipator: &diss, rho0: rho0.clone(), projector: computational_projector(), model: "holonomy" };
    let pn = Problem { family: &north, dissipator: &diss, rho0, projector: computational_projector(), model: "holonomy" };
    let grid = pe.grid(0.01, run_time).unwrap();
    let nodes = checkpoint_indices(&grid, 10);
    let tensor = pe.tensor().unwrap();
    let (mut frame, mut gauge): (f64, f64) = (0.0, 0.0);
    for gamma in HOLONOMY_GAMMAS {
        let lab = pe.lab_trajectory(&tensor, gamma, run_time, &grid, method).unwrap();
        let rot_e = pe.rotated_trajectory(&tensor, gamma, run_time, &grid, method, BasisChoice::Analytic).unwrap();
        let rot_n = pn.rotated_trajectory(&tensor, gamma, run_time, &grid, method, BasisChoice::Analytic).unwrap();
        frame = frame.max(pe.block_distance(&grid, &lab, &rot_e, &nodes).unwrap());
        gauge = gauge.max(pe.block_distance(&grid, &rot_e, &rot_n, &nodes).unwrap());
    }
    Outcome {
        criterion: 4,
        title: "frame and gauge independence of the approximate evolution",
        passed: frame <= 1e-8 && gauge <= 1e-8,
        detail: format!("lab vs. rotated {frame:.3e}, equator vs. north-pole gauge {gauge:.3e} (bound 1e-8)"),
    }
}

fn closed_system_limit() -> Outcome {
    let setup = HolonomySetup::default();
    let model = ModelSetup::Holonomy(setup.clone());
    let p = computational_projector();
    let options = RunOptions { check_cp: false, checkpoints: 1, ..RunOptions::default() };
    let distances: Vec<f64> = [20.0, 50.0, 100.0, 200.0]
        .iter()
        .map(|&t| {
            let o = run_point(&model, 0.0, t, &options).unwrap();
            let end = p.matmul(o.exact.final_state()).matmul(&p);
            let block = ComplexMatrix::from_fn(2, 2, |i, j| end[(i, j)]);
            block.distance(&setup.closed_form(0.0, t))
        })
        .collect();
    let monotone = distances.windows(2).all(|w| w[1] <= w[0]);
    let last = *distances.last().unwrap();
    Outcome {
        criterion: 5,
        title: "closed-system limit approaches the holonomic gate",
        passed: monotone && last < 0.02,
        detail: format!(
            "distances at T = 20, 50, 100, 200: {} (non-increasing: {monotone}; bound 0.02 at T = 200)",
            distances.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>().join(", ")
        ),
    }
}

fn decoherence_ordering(sweeps: &Sweeps) -> Outcome {
    let at100: Vec<&SweepMetrics> = HOLONOMY_GAMMAS.iter().map(|&g| metrics(sweeps, "holonomy", g, 100.0)).collect();
    let increasing = |v: Vec<f64>| v.windows(2).all(|w| w[1] > w[0]);
    let loss_exact = increasing(at100.iter().map(|m| m.loss_exact).collect());
    let loss_approx = increasing(at100.iter().map(|m| m.loss_approx).collect());
    let fid_times = &preset("fig-fidelity").unwrap().config.t_list;
    let fidelity = HOLONOMY_GAMMAS
        .iter()
        .all(|&g| increasing(fid_times.iter().map(|&t| metrics(sweeps, "holonomy", g, t).fidelity_norm).collect()));
    let d: Vec<f64> = at100.iter().map(|m| m.fidelity_norm).collect();
    let near = (d[0] - d[1]).abs();
    let far = (d[0] - d[2]).abs().min((d[1] - d[2]).abs());
    Outcome {
        criterion: 6,
        title: "decoherence ordering of losses and fidelities",
        passed: loss_exact && loss_approx && fidelity && near < far,
        detail: format!(
            "losses increasing in Γ at T = 100: exact {loss_exact}, approx {loss_approx}; D increasing in T: {fidelity}; \
             |D(0) − D(0.01)| = {near:.3e} < {far:.3e}"
        ),
    }
}

fn interior_minimum(sweeps: &Sweeps) -> Outcome {
    let config = preset("fig-sweep-random").unwrap().config;
    let mut parts = Vec::new();
    let mut passed = true;
    for &g in &config.gamma_list {
        let errors: Vec<f64> = config.t_list.iter().map(|&t| metrics(sweeps, "random_rotating", g, t).max_hs_error).collect();
        let argmin = errors.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        let ok = if g == 0.0 {
            errors.windows(2).all(|w| w[1] < w[0])
        } else {
            argmin > 0 && argmin + 1 < errors.len()
        };
        passed &= ok;
        parts.push(format!("Γ={g}: min at T={}", config.t_list[argmin]));
    }
    Outcome {
        criterion: 7,
        title: "interior minimum of the maximal error for the random model",
        passed,
        detail: format!("seed {}; {}", config.seed, parts.join(", ")),
    }
}

fn resonance_tensor() -> Outcome {
    let setup = HolonomySetup::default();
    let family = setup.family(1.0).unwrap();
    let tensor = resonance_tensor_for(&family, DEFAULT_DEGENERACY_TOL, ResonanceOptions::default()).unwrap();
    // constant gaps from the eigenvalues by label
    let mut energy = [0.0; 3];
    energy[LABEL_MINUS] = -1.0;
    energy[LABEL_DARK] = 0.0;
    energy[LABEL_PLUS] = 1.0;
    let mut mismatches = 0;
    for k in 0..3 {
        for l in 0..3 {
            for kp in 0..3 {
                for lp in 0..3 {
                    let brute = energy[k] - energy[l] == energy[kp] - energy[lp];
                    mismatches += usize::from(tensor.g(k, l, kp, lp) != brute);
                }
            }
        }
    }
    let dark_plus = tensor.g(LABEL_DARK, LABEL_PLUS, LABEL_MINUS, LABEL_DARK);
    let model = make_random_model(adiabat::experiment::DEFAULT_SEED, 4).unwrap();
    let random = resonance_tensor_for(&model, DEFAULT_DEGENERACY_TOL, ResonanceOptions::default()).unwrap();
    let violations = tensor.identity_violations().len() + random.identity_violations().len();
    Outcome {
        criterion: 8,
        title: "resonance tensor vs. brute-force enumeration",
        passed: mismatches == 0 && dark_plus && violations == 0,
        detail: format!("{mismatches} of 81 entries differ, g(d+,−d) = {dark_plus}, {violations} identity violations"),
    }
}

fn step_halving(sweeps: &Sweeps) -> Outcome {
    let (mut worst, mut at) = (0.0_f64, String::new());
    for (k, point) in &sweeps.coarse {
        let fine = &sweeps.fine[k];
        for ((a, b), name) in point.metrics.values().iter().zip(fine.values()).zip(adiabat::experiment::METRIC_NAMES) {
            let diff = (a - b).abs();
            if diff > worst {
                worst = diff;
                at = format!("{name} at {} Γ={} T={}", k.0, point.metrics.gamma, point.metrics.run_time);
            }
        }
    }
    Outcome {
        criterion: 9,
        title: "step halving leaves the sweep metrics unchanged",
        passed: worst <= 1e-4,
        detail: format!("max metric change {worst:.3e} ({at}; bound 1e-4)"),
    }
}

fn off_diagonal(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |i, j| {
        if i == j {
            C64::new(0.0, 0.0)
        } else {
            C64::new(0.05 * (i + j) as f64, 0.03 * (i as f64 - j as f64))
        }
    })
}

fn invariant_suite(sweeps: &Sweeps) -> Outcome {
    let all = sweeps.coarse.values().map(|p| p.invariants).reduce(InvariantReport::merge).unwrap();
    let run_time = 100.0;
    let setup = HolonomySetup::default();
    let family = setup.family(run_time).unwrap();
    let diss = setup.dissipator().unwrap();
    let p = Problem {
        family: &family,
        dissipator: &diss,
        rho0: setup.initial_density().unwrap(),
        projector: computational_projector(),
        model: "holonomy",
    };
    let grid = p.grid(0.01, run_time).unwrap();
    let tensor = p.tensor().unwrap();
    let autonomy = HOLONOMY_GAMMAS
        .iter()
        .map(|&g| p.diagonal_autonomy_error(&tensor, g, run_time, &grid, Method::Magnus4, &off_diagonal(4)).unwrap())
        .fold(0.0, f64::max);
    Outcome {
        criterion: 10,
        title: "state invariants and diagonal-block autonomy",
        passed: all.holds(1e-7, 1e-8, 1e-6) && autonomy <= 1e-12,
        detail: format!(
            "trace {:.3e} (≤ 1e-7), hermiticity {:.3e} (≤ 1e-8), min eigenvalue {:.3e} (≥ −1e-6), autonomy {autonomy:.3e} (≤ 1e-12)",
            all.max_trace_error, all.max_hermiticity_error, all.min_eigenvalue
        ),
    }
}

fn main() {
    let start = Instant::now();
    let mut outcomes = vec![closed_form_vs_ode(), lindblad_factorization()];
    let sweep_start = Instant::now();
    let sweeps = run_sweeps();
    eprintln!("sweeps at two step sizes: {:.0} s", sweep_start.elapsed().as_secs_f64());
    outcomes.extend([
        complete_positivity(&sweeps),
        frame_equivalence(),
        closed_system_limit(),
        decoherence_ordering(&sweeps),
        interior_minimum(&sweeps),
        resonance_tensor(),
        step_halving(&sweeps),
        invariant_suite(&sweeps),
    ]);
    outcomes.sort_by_key(|o| o.criterion);
    for o in &outcomes {
        let status = if o.passed { "PASS" } else { "FAIL" };
        println!("{status} criterion {:>2}: {}: {}", o.criterion, o.title, o.detail);
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("acceptance: {} passed, {failed} failed in {:.0} s", outcomes.len() - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
