//! Executes presets and configs: sweeps on a worker pool, then CSV output and
//! assertions.

use std::path::{Path, PathBuf};

use adiabat::experiment::{
    checkpoint_indices, lindblad_check, run_point, HolonomySetup, ModelSetup, Problem, RunOptions, SweepMetrics,
};
use adiabat::linalg::ComplexMatrix;
use adiabat::models::holonomy::{computational_projector, Gauge, HolonomyFamily, PolarLoop};
use adiabat::models::random::make_random_model;
use adiabat::propagation::{intensity_loss, purity, InvariantReport, Method};
use adiabat::resonance::{resonance_tensor_for, ResonanceOptions};
use adiabat::spectral::{BasisChoice, DEFAULT_DEGENERACY_TOL};
use adiabat::Error;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::presets::{Preset, PresetKind, SweepChecks};
use crate::report::{fmt_f64, Assertion, Table};
use crate::CliError;

pub const TRACE_TOL: f64 = 1e-7;
pub const HERMITICITY_TOL: f64 = 1e-8;
pub const POSITIVITY_TOL: f64 = 1e-6;
pub const CHOI_TOL: f64 = 1e-8;
pub const FRAME_TOL: f64 = 1e-8;
pub const AUTONOMY_TOL: f64 = 1e-12;
pub const LINDBLAD_TOL: f64 = 1e-9;
pub const G_EIGEN_TOL: f64 = 1e-10;

/// Number of s-samples in the factorization check.
const LINDBLAD_SAMPLES: usize = 10;

#[derive(Clone, Debug)]
pub struct Settings {
    pub out: PathBuf,
    pub timestamp: bool,
    /// Worker count; `None` uses all available cores.
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub assertions: Vec<Assertion>,
    pub files: Vec<PathBuf>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    fn extend(&mut self, other: RunReport) {
        self.assertions.extend(other.assertions);
        self.files.extend(other.files);
    }
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Run(e.to_string()))
}

fn run_err(e: Error) -> CliError {
    CliError::Run(e.to_string())
}

pub fn run_preset(preset: &Preset, settings: &Settings) -> Result<RunReport, CliError> {
    preset.config.validate()?;
    match preset.kind {
        PresetKind::Sweep(checks) => run_sweep(&preset.config, checks, settings),
        PresetKind::Lindblad => run_lindblad(&preset.config, settings),
        PresetKind::Gauge => run_gauge(&preset.config, settings),
    }
}

pub fn run_config(config: &ExperimentConfig, settings: &Settings) -> Result<RunReport, CliError> {
    config.validate()?;
    run_sweep(config, SweepChecks::None, settings)
}

/// Everything kept from one (Γ, T) run once the full trajectories are dropped.
struct PointSummary {
    metrics: SweepMetrics,
    /// (evolution, s, state) at the checkpoints.
    samples: Vec<(&'static str, f64, ComplexMatrix)>,
    invariants: InvariantReport,
    choi_min: Option<f64>,
}

fn projector(setup: &ModelSetup) -> ComplexMatrix {
    match setup {
        ModelSetup::Holonomy(_) => computational_projector(),
        ModelSetup::RandomRotating { dim, .. } => ComplexMatrix::identity(*dim),
    }
}

fn run_one(setup: &ModelSetup, gamma: f64, run_time: f64, options: &RunOptions) -> Result<PointSummary, CliError> {
    let outcome = run_point(setup, gamma, run_time, options).map_err(run_err)?;
    let mut samples = Vec::new();
    for (name, traj) in [("exact", &outcome.exact), ("approximate", &outcome.approx)] {
        for &i in &outcome.checkpoints {
            samples.push((name, traj.grid()[i], traj.states()[i].clone()));
        }
    }
    Ok(PointSummary { metrics: outcome.metrics, samples, invariants: outcome.invariants, choi_min: outcome.choi_min })
}

const SWEEP_HEADER: [&str; 11] = [
    "model",
    "gamma",
    "T",
    "dt",
    "elem11_exact",
    "elem11_approx",
    "fidelity_norm",
    "loss_exact",
    "loss_approx",
    "end_hs_error",
    "max_hs_error",
];

fn sweep_table(points: &[PointSummary]) -> Table {
    let mut table = Table::new(&SWEEP_HEADER);
    for p in points {
        let m = &p.metrics;
        let mut row = vec![m.model.clone(), fmt_f64(m.gamma), fmt_f64(m.run_time), fmt_f64(m.dt)];
        row.extend(m.values().iter().map(|&v| fmt_f64(v)));
        table.push(row);
    }
    table
}

fn trajectory_table(points: &[PointSummary], projector: &ComplexMatrix) -> Table {
    let d = projector.rows();
    let mut header: Vec<String> = ["gamma", "T", "evolution", "s", "trace", "loss", "purity"].map(String::from).to_vec();
    for k in 0..d * d {
        let (i, j) = (k % d, k / d);
        header.push(format!("re_{i}_{j}"));
        header.push(format!("im_{i}_{j}"));
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut table = Table::new(&header_refs);
    for p in points {
        for (evolution, s, rho) in &p.samples {
            let mut row = vec![
                fmt_f64(p.metrics.gamma),
                fmt_f64(p.metrics.run_time),
                evolution.to_string(),
                fmt_f64(*s),
                fmt_f64(rho.trace().re),
                fmt_f64(intensity_loss(rho, projector)),
                fmt_f64(purity(rho)),
            ];
            for c in rho.vectorize() {
                row.push(fmt_f64(c.re));
                row.push(fmt_f64(c.im));
            }
            table.push(row);
        }
    }
    table
}

fn run_sweep(config: &ExperimentConfig, checks: SweepChecks, settings: &Settings) -> Result<RunReport, CliError> {
    let setup = config.model_setup();
    let options = RunOptions { dt: config.dt, checkpoints: config.checkpoints, ..RunOptions::default() };
    let points = config.points();
    let results: Vec<Result<PointSummary, CliError>> = pool(settings.threads)?
        .install(|| points.par_iter().map(|&(g, t)| run_one(&setup, g, t, &options)).collect());
    let mut summaries = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    summaries.sort_by(|a, b| {
        a.metrics.gamma.total_cmp(&b.metrics.gamma).then(a.metrics.run_time.total_cmp(&b.metrics.run_time))
    });

    let mut report = RunReport::default();
    report.files.push(sweep_table(&summaries).write(&settings.out, "sweep.csv", settings.timestamp)?);
    report.files.push(
        trajectory_table(&summaries, &projector(&setup)).write(&settings.out, "trajectory.csv", settings.timestamp)?,
    );
    report.assertions.extend(common_assertions(&summaries));
    let metrics: Vec<&SweepMetrics> = summaries.iter().map(|p| &p.metrics).collect();
    report.assertions.extend(sweep_assertions(checks, &metrics));
    Ok(report)
}

fn label(m: &SweepMetrics) -> String {
    format!("Γ={} T={}", m.gamma, m.run_time)
}

fn worst(points: &[PointSummary], key: impl Fn(&PointSummary) -> f64) -> (f64, &SweepMetrics) {
    let p = points.iter().max_by(|a, b| key(a).total_cmp(&key(b))).expect("non-empty sweep");
    (key(p), &p.metrics)
}

fn common_assertions(points: &[PointSummary]) -> Vec<Assertion> {
    let (trace, at) = worst(points, |p| p.invariants.max_trace_error);
    let mut out = vec![Assertion::at_most(format!("trace preservation (worst {})", label(at)), trace, TRACE_TOL)];
    let (herm, at) = worst(points, |p| p.invariants.max_hermiticity_error);
    out.push(Assertion::at_most(format!("hermiticity (worst {})", label(at)), herm, HERMITICITY_TOL));
    let (neg, at) = worst(points, |p| -p.invariants.min_eigenvalue);
    out.push(Assertion::at_least(format!("positivity (worst {})", label(at)), -neg, -POSITIVITY_TOL));
    let (neg, at) = worst(points, |p| -p.choi_min.unwrap_or(f64::INFINITY));
    out.push(Assertion::at_least(format!("complete positivity of the approximate map (worst {})", label(at)), -neg, -CHOI_TOL));
    out
}

/// Γ values in ascending order, each with its rows sorted by T.
fn by_gamma<'a>(metrics: &[&'a SweepMetrics]) -> Vec<(f64, Vec<&'a SweepMetrics>)> {
    let mut out: Vec<(f64, Vec<&SweepMetrics>)> = Vec::new();
    for &m in metrics {
        match out.iter_mut().find(|(g, _)| *g == m.gamma) {
            Some((_, rows)) => rows.push(m),
            None => out.push((m.gamma, vec![m])),
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (_, rows) in &mut out {
        rows.sort_by(|a, b| a.run_time.total_cmp(&b.run_time));
    }
    out
}

/// Rows at run time `t`, ascending in Γ.
fn at_time<'a>(metrics: &[&'a SweepMetrics], t: f64) -> Vec<&'a SweepMetrics> {
    let mut rows: Vec<&SweepMetrics> = metrics.iter().copied().filter(|m| m.run_time == t).collect();
    rows.sort_by(|a, b| a.gamma.total_cmp(&b.gamma));
    rows
}

/// Smallest step of a sequence that must increase; negative when it does not.
fn min_increase(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    v.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

pub fn sweep_assertions(checks: SweepChecks, metrics: &[&SweepMetrics]) -> Vec<Assertion> {
    let mut out = Vec::new();
    match checks {
        SweepChecks::None => {}
        SweepChecks::Element => {
            let t_max = metrics.iter().map(|m| m.run_time).fold(f64::NEG_INFINITY, f64::max);
            let rows = at_time(metrics, t_max);
            let exact = min_increase(rows.iter().map(|m| -m.elem11_exact));
            out.push(Assertion::positive(format!("exact ⟨1|ρ|1⟩ decreasing in Γ at T={t_max}"), exact));
            let approx = min_increase(rows.iter().map(|m| -m.elem11_approx));
            out.push(Assertion::positive(format!("approximate ⟨1|ρ|1⟩ decreasing in Γ at T={t_max}"), approx));
        }
        SweepChecks::Fidelity => {
            for (g, rows) in by_gamma(metrics) {
                let step = min_increase(rows.iter().map(|m| m.fidelity_norm));
                out.push(Assertion::positive(format!("fidelity increasing in T at Γ={g}"), step));
            }
        }
        SweepChecks::Loss => {
            let rows = at_time(metrics, 100.0);
            let exact = min_increase(rows.iter().map(|m| m.loss_exact));
            out.push(Assertion::positive("exact loss increasing in Γ at T=100", exact));
            let approx = min_increase(rows.iter().map(|m| m.loss_approx));
            out.push(Assertion::positive("approximate loss increasing in Γ at T=100", approx));
            let find = |g: f64| rows.iter().find(|m| m.gamma == g).map(|m| m.fidelity_norm);
            if let (Some(d0), Some(d1), Some(d2)) = (find(0.0), find(0.01), find(0.1)) {
                let near = (d0 - d1).abs();
                let far = (d0 - d2).abs().min((d1 - d2).abs());
                out.push(Assertion::positive(
                    "fidelity gap to Γ=0.1 minus gap between Γ=0 and Γ=0.01 at T=100",
                    far - near,
                ));
            }
        }
        SweepChecks::InteriorMinimum => {
            for (g, rows) in by_gamma(metrics) {
                let errors: Vec<f64> = rows.iter().map(|m| m.max_hs_error).collect();
                if g == 0.0 {
                    let step = min_increase(errors.iter().map(|e| -e));
                    out.push(Assertion::positive("max error decreasing in T at Γ=0", step));
                } else {
                    // how far the smallest interior value sits below both end points
                    let interior = errors[1..errors.len().saturating_sub(1)].iter().copied().fold(f64::INFINITY, f64::min);
                    let margin = errors[0].min(errors[errors.len() - 1]) - interior;
                    out.push(Assertion::positive(format!("interior minimum of max error over T at Γ={g}"), margin));
                }
            }
        }
    }
    out
}

fn run_lindblad(config: &ExperimentConfig, settings: &Settings) -> Result<RunReport, CliError> {
    let samples: Vec<f64> = (0..LINDBLAD_SAMPLES).map(|j| j as f64 / (LINDBLAD_SAMPLES - 1) as f64).collect();
    let mut table = Table::new(&["model", "s", "residual", "min_g_eigenvalue"]);
    let mut report = RunReport::default();

    let holonomy = match config.model_setup() {
        ModelSetup::Holonomy(h) => h,
        ModelSetup::RandomRotating { .. } => HolonomySetup::default(),
    };
    let family = holonomy.family(1.0).map_err(run_err)?;
    let dissipator = holonomy.dissipator().map_err(run_err)?;
    let random = make_random_model(config.seed, 4).map_err(run_err)?;
    let random_dissipator = random.dissipator().map_err(run_err)?;

    let mut check = |name: &str, family: &dyn adiabat::spectral::HamiltonianFamily, dissipator: &dyn adiabat::generators::LindbladDissipator| -> Result<(), CliError> {
        let tensor = resonance_tensor_for(family, DEFAULT_DEGENERACY_TOL, ResonanceOptions::default()).map_err(run_err)?;
        let mut worst: f64 = 0.0;
        let mut min_g = f64::INFINITY;
        for &s in &samples {
            let c = lindblad_check(family, dissipator, &tensor, &[s]).map_err(run_err)?;
            table.push(vec![name.into(), fmt_f64(s), fmt_f64(c.max_residual), fmt_f64(c.min_g_eigenvalue)]);
            worst = worst.max(c.max_residual);
            min_g = min_g.min(c.min_g_eigenvalue);
        }
        report.assertions.push(Assertion::at_most(format!("{name}: factorization reconstructs the filtered dissipator"), worst, LINDBLAD_TOL));
        report.assertions.push(Assertion::at_least(format!("{name}: resonance matrix positive semidefinite"), min_g, -G_EIGEN_TOL));
        let violations = tensor.identity_violations();
        report.assertions.push(Assertion::at_most(format!("{name}: resonance tensor identities"), violations.len() as f64, 0.0));
        let file = format!("resonance_{name}.csv");
        report.files.push(write_text(&settings.out, &file, &tensor.to_csv())?);
        Ok(())
    };
    check("holonomy", &family, &dissipator)?;
    check("random_rotating", &random, &random_dissipator)?;
    report.files.push(table.write(&settings.out, "lindblad.csv", settings.timestamp)?);
    Ok(report)
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

/// One row of gauge.csv.
struct GaugeRow {
    check: &'static str,
    path: &'static str,
    gamma: f64,
    run_time: f64,
    value: f64,
    bound: f64,
}

/// Off-diagonal Hermitian perturbation used for the autonomy check.
fn perturbation(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |i, j| {
        if i == j {
            C64::new(0.0, 0.0)
        } else {
            C64::new(0.05 * (i + j) as f64, 0.03 * (i as f64 - j as f64))
        }
    })
}

fn gauge_rows(setup: &HolonomySetup, gamma: f64, run_time: f64, dt: f64, checkpoints: usize) -> Result<Vec<GaugeRow>, Error> {
    let method = Method::Magnus4;
    let mut rows = Vec::new();
    let dissipator = setup.dissipator()?;
    let rho0 = setup.initial_density()?;
    let projector = computational_projector();
    let make = |family| Problem { family, dissipator: &dissipator, rho0: rho0.clone(), projector: projector.clone(), model: "holonomy" };

    let equator = setup.path(run_time).map(|p| HolonomyFamily::new(p, Gauge::EquatorRegular))?;
    let north = setup.path(run_time).map(|p| HolonomyFamily::new(p, Gauge::NorthPoleRegular))?;
    let (pe, pn) = (make(&equator), make(&north));
    let grid = pe.grid(dt, run_time)?;
    let nodes = checkpoint_indices(&grid, checkpoints);
    let tensor = pe.tensor()?;
    let lab = pe.lab_trajectory(&tensor, gamma, run_time, &grid, method)?;
    let rot_e = pe.rotated_trajectory(&tensor, gamma, run_time, &grid, method, BasisChoice::Analytic)?;
    let rot_n = pn.rotated_trajectory(&tensor, gamma, run_time, &grid, method, BasisChoice::Analytic)?;
    let rot_c = pe.rotated_trajectory(&tensor, gamma, run_time, &grid, method, BasisChoice::Continued)?;
    let mut push = |check, path, value| rows.push(GaugeRow { check, path, gamma, run_time, value, bound: FRAME_TOL });
    push("frame", "orange", pe.block_distance(&grid, &lab, &rot_e, &nodes)?);
    push("gauge", "orange", pe.block_distance(&grid, &rot_e, &rot_n, &nodes)?);
    push("continued", "orange", pe.block_distance(&grid, &rot_e, &rot_c, &nodes)?);
    let autonomy = pe.diagonal_autonomy_error(&tensor, gamma, run_time, &grid, method, &perturbation(4))?;
    rows.push(GaugeRow { check: "autonomy", path: "orange", gamma, run_time, value: autonomy, bound: AUTONOMY_TOL });

    // a loop through the north pole, where only the north-pole gauge is regular
    let polar = PolarLoop { amplitude: std::f64::consts::FRAC_PI_4 };
    let loop_north = HolonomyFamily::new(polar, Gauge::NorthPoleRegular);
    let loop_equator = HolonomyFamily::new(polar, Gauge::EquatorRegular);
    let ln = Problem { family: &loop_north, dissipator: &dissipator, rho0: rho0.clone(), projector: projector.clone(), model: "holonomy" };
    let le = Problem { family: &loop_equator, dissipator: &dissipator, rho0: rho0.clone(), projector: projector.clone(), model: "holonomy" };
    let grid = ln.grid(dt, run_time)?;
    let nodes = checkpoint_indices(&grid, checkpoints);
    let tensor = ln.tensor()?;
    let lab = ln.lab_trajectory(&tensor, gamma, run_time, &grid, method)?;
    let rot_n = ln.rotated_trajectory(&tensor, gamma, run_time, &grid, method, BasisChoice::Analytic)?;
    rows.push(GaugeRow {
        check: "frame",
        path: "polar",
        gamma,
        run_time,
        value: ln.block_distance(&grid, &lab, &rot_n, &nodes)?,
        bound: FRAME_TOL,
    });
    let refused = matches!(
        le.rotated_trajectory(&tensor, gamma, run_time, &grid, method, BasisChoice::Analytic),
        Err(Error::FrameDiscontinuity { .. })
    );
    // 0 when the singular gauge is rejected as it should be
    rows.push(GaugeRow {
        check: "singular_gauge_rejected",
        path: "polar",
        gamma,
        run_time,
        value: if refused { 0.0 } else { 1.0 },
        bound: 0.0,
    });
    Ok(rows)
}

fn run_gauge(config: &ExperimentConfig, settings: &Settings) -> Result<RunReport, CliError> {
    let setup = match config.model_setup() {
        ModelSetup::Holonomy(h) => h,
        ModelSetup::RandomRotating { .. } => {
            return Err(CliError::Config("check-gauge needs the holonomy model".into()));
        }
    };
    let points = config.points();
    let results: Vec<Result<Vec<GaugeRow>, Error>> = pool(settings.threads)?.install(|| {
        points.par_iter().map(|&(g, t)| gauge_rows(&setup, g, t, config.dt, config.checkpoints)).collect()
    });
    let mut table = Table::new(&["check", "path", "gamma", "T", "value", "bound", "passed"]);
    let mut report = RunReport::default();
    for rows in results {
        for r in rows.map_err(run_err)? {
            let a = Assertion::at_most(format!("{} on {} path, Γ={} T={}", r.check, r.path, r.gamma, r.run_time), r.value, r.bound);
            table.push(vec![
                r.check.into(),
                r.path.into(),
                fmt_f64(r.gamma),
                fmt_f64(r.run_time),
                fmt_f64(r.value),
                fmt_f64(r.bound),
                a.passed.to_string(),
            ]);
            report.assertions.push(a);
        }
    }
    report.files.push(table.write(&settings.out, "gauge.csv", settings.timestamp)?);
    Ok(report)
}

/// `check --all`: every check preset, each in its own subdirectory.
pub fn run_checks(settings: &Settings) -> Result<RunReport, CliError> {
    let mut report = RunReport::default();
    for name in crate::presets::CHECK_NAMES {
        let preset = crate::presets::preset(name).expect("check presets exist");
        let sub = Settings { out: settings.out.join(name), ..settings.clone() };
        report.extend(run_preset(&preset, &sub)?);
    }
    Ok(report)
}
