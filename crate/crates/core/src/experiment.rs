//! Sweep runs shared by the CLI and the acceptance suite.
//!
//! A run evolves one initial state under the exact and the approximate
//! generator for a single (Γ, T) and reports end-point metrics. The checks at
//! the bottom compare the approximate evolution computed in different frames
//! and gauges, and the Lindblad re-factorization against the direct filter.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::generators::{
    cp_check, exact_generator, filtered_dissipator_direct, lindblad_factorize, ApproximateGenerator, BlockSet, LindbladDissipator,
    RotatedGenerator, StaticDissipator,
};
use crate::linalg::{ComplexMatrix, SuperOperatorMatrix};
use crate::models::holonomy::{self, computational_projector, input_state, Gauge, HolonomyFamily, HolonomyPath};
use crate::models::random::make_random_model;
use crate::propagation::{
    hs_error_max, integrate_visit, intensity_loss, normalized_fidelity, propagate, InvariantReport, Method, StepGrid,
    Trajectory, TrajectoryMeta,
};
use crate::resonance::{resonance_tensor_for, ResonanceOptions, ResonanceTensor};
use crate::spectral::{
    build_transport_frame, BasisChoice, FrameOptions, HamiltonianFamily, SpectralTracker, DEFAULT_DEGENERACY_TOL,
};

pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_CHECKPOINTS: usize = 10;
/// Seed of the random rotating model used by the shipped sweep.
pub const DEFAULT_SEED: u64 = 16;

/// Index of the basis state whose population is reported as `elem11`.
const ELEMENT_INDEX: usize = 1;

/// Settings of the four-level holonomic gate.
#[derive(Clone, Debug, PartialEq)]
pub struct HolonomySetup {
    pub delta_phi: f64,
    pub split: [f64; 4],
    /// Bloch angles of the input state cos(x/2)|0⟩ + e^{−iy} sin(x/2)|1⟩.
    pub x: f64,
    pub y: f64,
    /// Explicit initial vector; overrides (x, y) when present.
    pub vector: Option<Vec<C64>>,
    pub gauge: Gauge,
}

impl Default for HolonomySetup {
    fn default() -> Self {
        Self { delta_phi: PI / 4.0, split: [0.4, 0.2, 0.4, 0.0], x: PI / 5.0, y: 0.75 * PI, vector: None, gauge: Gauge::EquatorRegular }
    }
}

impl HolonomySetup {
    pub fn path(&self, run_time: f64) -> Result<HolonomyPath> {
        holonomy::build_orange_path(self.delta_phi, run_time, self.split)
    }

    pub fn family(&self, run_time: f64) -> Result<HolonomyFamily<HolonomyPath>> {
        Ok(HolonomyFamily::new(self.path(run_time)?, self.gauge))
    }

    pub fn initial_density(&self) -> Result<ComplexMatrix> {
        match &self.vector {
            Some(v) => pure_density(v, 4),
            None => pure_density(&input_state(self.x, self.y), 4),
        }
    }

    pub fn dissipator(&self) -> Result<StaticDissipator> {
        StaticDissipator::from_jumps(vec![holonomy::ancilla_projector()])
    }

    /// Computational block predicted by the approximation in closed form.
    pub fn closed_form(&self, gamma: f64, run_time: f64) -> ComplexMatrix {
        let [t1, t2, t3, _] = self.split.map(|f| f * run_time);
        holonomy::closed_form_output(self.x, self.y, self.delta_phi, gamma, t1, t2, t3)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelSetup {
    Holonomy(HolonomySetup),
    RandomRotating {
        seed: u64,
        dim: usize,
        /// Explicit initial vector; overrides the seeded draw when present.
        state: Option<Vec<C64>>,
    },
}

/// |ψ⟩⟨ψ| for ψ normalized; rejects wrong lengths and zero or non-finite vectors.
pub fn pure_density(psi: &[C64], dim: usize) -> Result<ComplexMatrix> {
    if psi.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: psi.len() });
    }
    let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::InvalidInitialState { reason: format!("vector norm {norm}") });
    }
    let v: Vec<C64> = psi.iter().map(|c| c / norm).collect();
    Ok(ComplexMatrix::outer(&v, &v))
}

impl ModelSetup {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Holonomy(_) => "holonomy",
            Self::RandomRotating { .. } => "random_rotating",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    /// Physical time step.
    pub dt: f64,
    /// Number of evenly spaced checkpoints in (0, 1]; s = 0 is always included.
    pub checkpoints: usize,
    pub method: Method,
    /// Certify complete positivity of the approximate propagator at every checkpoint.
    pub check_cp: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { dt: DEFAULT_DT, checkpoints: DEFAULT_CHECKPOINTS, method: Method::ExponentialMidpoint, check_cp: true }
    }
}

/// One row of a sweep table.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepMetrics {
    pub model: String,
    pub gamma: f64,
    pub run_time: f64,
    pub dt: f64,
    pub elem11_exact: f64,
    pub elem11_approx: f64,
    pub fidelity_norm: f64,
    pub loss_exact: f64,
    pub loss_approx: f64,
    pub end_hs_error: f64,
    pub max_hs_error: f64,
}

impl SweepMetrics {
    /// The numeric columns in table order.
    pub fn values(&self) -> [f64; 7] {
        [
            self.elem11_exact,
            self.elem11_approx,
            self.fidelity_norm,
            self.loss_exact,
            self.loss_approx,
            self.end_hs_error,
            self.max_hs_error,
        ]
    }
}

pub const METRIC_NAMES: [&str; 7] =
    ["elem11_exact", "elem11_approx", "fidelity_norm", "loss_exact", "loss_approx", "end_hs_error", "max_hs_error"];

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub metrics: SweepMetrics,
    pub exact: Trajectory,
    pub approx: Trajectory,
    /// Node indices of the checkpoints, starting with 0.
    pub checkpoints: Vec<usize>,
    /// Smallest Choi eigenvalue of the approximate propagator over the checkpoints.
    pub choi_min: Option<f64>,
    pub invariants: InvariantReport,
}

/// Nodes nearest to s = j/n for j = 0..=n.
pub fn checkpoint_indices(grid: &StepGrid, n: usize) -> Vec<usize> {
    let nodes = grid.nodes();
    let mut out: Vec<usize> = (0..=n.max(1))
        .map(|j| {
            let target = j as f64 / n.max(1) as f64;
            let i = nodes.partition_point(|&x| x < target);
            if i == nodes.len() || (i > 0 && target - nodes[i - 1] < nodes[i] - target) {
                i - 1
            } else {
                i
            }
        })
        .collect();
    out.dedup();
    out
}

pub fn run_point(setup: &ModelSetup, gamma: f64, run_time: f64, options: &RunOptions) -> Result<RunOutcome> {
    match setup {
        ModelSetup::Holonomy(h) => {
            let family = h.family(run_time)?;
            let dissipator = h.dissipator()?;
            let problem = Problem {
                family: &family,
                dissipator: &dissipator,
                rho0: h.initial_density()?,
                projector: computational_projector(),
                model: setup.name(),
            };
            problem.run(gamma, run_time, options)
        }
        ModelSetup::RandomRotating { seed, dim, state } => {
            let model = make_random_model(*seed, *dim)?;
            let dissipator = model.dissipator()?;
            let rho0 = match state {
                Some(v) => pure_density(v, *dim)?,
                None => model.initial_density(),
            };
            let problem = Problem {
                family: &model,
                dissipator: &dissipator,
                rho0,
                projector: model.computational_projector(),
                model: setup.name(),
            };
            problem.run(gamma, run_time, options)
        }
    }
}

/// A family, a dissipator and an initial state.
pub struct Problem<'a, F: ?Sized, D: ?Sized> {
    pub family: &'a F,
    pub dissipator: &'a D,
    pub rho0: ComplexMatrix,
    pub projector: ComplexMatrix,
    pub model: &'static str,
}

impl<F, D> Problem<'_, F, D>
where
    F: HamiltonianFamily + ?Sized,
    D: LindbladDissipator + ?Sized,
{
    pub fn tensor(&self) -> Result<ResonanceTensor> {
        resonance_tensor_for(self.family, DEFAULT_DEGENERACY_TOL, ResonanceOptions::default())
    }

    pub fn grid(&self, dt: f64, run_time: f64) -> Result<StepGrid> {
        StepGrid::uniform(dt, run_time, &self.family.breakpoints())
    }

    pub fn run(&self, gamma: f64, run_time: f64, options: &RunOptions) -> Result<RunOutcome> {
        let grid = self.grid(options.dt, run_time)?;
        let checkpoints = checkpoint_indices(&grid, options.checkpoints);
        let tensor = self.tensor()?;
        let meta = |generator: &str| TrajectoryMeta {
            run_time,
            gamma,
            dt: options.dt,
            generator: generator.into(),
            model: self.model.into(),
        };

        let exact = propagate(
            |s| exact_generator(self.family, self.dissipator, run_time, gamma, s),
            &self.rho0,
            &grid,
            options.method,
            meta("exact"),
        )?;

        let generator = ApproximateGenerator::new(self.family, self.dissipator, &tensor, run_time, gamma)?;
        let (approx, choi_min) = if options.check_cp {
            self.approximate_with_cp(&generator, &grid, options.method, &checkpoints, meta("approximate"))?
        } else {
            let traj = propagate(|s| generator.at(s), &self.rho0, &grid, options.method, meta("approximate"))?;
            (traj, None)
        };

        let end_exact = exact.final_state();
        let end_approx = approx.final_state();
        let metrics = SweepMetrics {
            model: self.model.into(),
            gamma,
            run_time,
            dt: options.dt,
            elem11_exact: end_exact[(ELEMENT_INDEX, ELEMENT_INDEX)].re,
            elem11_approx: end_approx[(ELEMENT_INDEX, ELEMENT_INDEX)].re,
            fidelity_norm: normalized_fidelity(end_exact, end_approx, &self.projector)?,
            loss_exact: intensity_loss(end_exact, &self.projector),
            loss_approx: intensity_loss(end_approx, &self.projector),
            end_hs_error: end_exact.distance(end_approx),
            max_hs_error: hs_error_max(&exact, &approx)?,
        };
        let invariants = exact.invariants().merge(approx.invariants());
        Ok(RunOutcome { metrics, exact, approx, checkpoints, choi_min, invariants })
    }

    /// Propagates the full propagator so that complete positivity can be
    /// certified at the checkpoints; states follow by applying it to ρ₀.
    fn approximate_with_cp(
        &self,
        generator: &ApproximateGenerator<'_, F, D>,
        grid: &StepGrid,
        method: Method,
        checkpoints: &[usize],
        meta: TrajectoryMeta,
    ) -> Result<(Trajectory, Option<f64>)> {
        crate::propagation::validate_density(&self.rho0)?;
        let d = self.rho0.rows();
        let v0 = self.rho0.vectorize();
        let mut states = Vec::with_capacity(grid.nodes().len());
        let mut choi_min = f64::INFINITY;
        integrate_visit(
            |s| Ok(generator.at(s)?.into_matrix()),
            &ComplexMatrix::identity(d * d),
            grid,
            method,
            |i, x| {
                states.push(ComplexMatrix::devectorize(&x.matvec(&v0), d)?);
                if checkpoints.binary_search(&i).is_ok() {
                    let (min, _) = cp_check(&SuperOperatorMatrix::new(d, x.clone())?, 0.0)?;
                    choi_min = choi_min.min(min);
                }
                Ok(())
            },
        )?;
        Ok((Trajectory::new(grid.nodes().to_vec(), states, meta), Some(choi_min)))
    }

    /// Approximate evolution computed in the rotated frame of `choice` and
    /// mapped back to the lab frame, at every node of `grid`.
    pub fn rotated_trajectory(
        &self,
        tensor: &ResonanceTensor,
        gamma: f64,
        run_time: f64,
        grid: &StepGrid,
        method: Method,
        choice: BasisChoice,
    ) -> Result<Vec<ComplexMatrix>> {
        let frame = build_transport_frame(self.family, &grid.evaluation_points(method), choice, FrameOptions::default())?;
        let generator = RotatedGenerator::new(self.dissipator, tensor, &frame, run_time, gamma, BlockSet::All)?;
        let d = self.rho0.rows();
        let start = frame.to_reference_basis(0, &self.rho0).vectorize();
        let start = ComplexMatrix::from_row_major(d * d, 1, start)?;
        let mut out = Vec::with_capacity(grid.nodes().len());
        integrate_visit(|s| Ok(generator.full_at(s)?.into_matrix()), &start, grid, method, |i, x| {
            let rho_a = ComplexMatrix::devectorize(x.as_slice(), d)?;
            out.push(frame.from_reference_basis(frame.index_of(grid.nodes()[i])?, &rho_a));
            Ok(())
        })?;
        Ok(out)
    }

    /// Approximate evolution with the lab-frame generator, at every node.
    pub fn lab_trajectory(
        &self,
        tensor: &ResonanceTensor,
        gamma: f64,
        run_time: f64,
        grid: &StepGrid,
        method: Method,
    ) -> Result<Vec<ComplexMatrix>> {
        let generator = ApproximateGenerator::new(self.family, self.dissipator, tensor, run_time, gamma)?;
        let traj = propagate(|s| generator.at(s), &self.rho0, grid, method, TrajectoryMeta::default())?;
        Ok(traj.states().to_vec())
    }

    /// max over the given nodes and all (k, l) of ‖P_k(s)(ρ_a − ρ_b)P_l(s)‖_F.
    pub fn block_distance(&self, grid: &StepGrid, a: &[ComplexMatrix], b: &[ComplexMatrix], nodes: &[usize]) -> Result<f64> {
        let tracker = SpectralTracker::new(self.family, DEFAULT_DEGENERACY_TOL)?;
        let mut worst: f64 = 0.0;
        for &i in nodes {
            let dec = tracker.decompose(grid.nodes()[i])?;
            let diff = &a[i] - &b[i];
            for pk in &dec.projectors {
                for pl in &dec.projectors {
                    worst = worst.max(pk.matmul(&diff).matmul(pl).frobenius_norm());
                }
            }
        }
        Ok(worst)
    }

    /// Change of the diagonal blocks of ρ^a(s) when the off-diagonal blocks of
    /// ρ^a(0) are perturbed by the off-diagonal part of `perturbation`.
    #[allow(clippy::too_many_arguments)]
    pub fn diagonal_autonomy_error(
        &self,
        tensor: &ResonanceTensor,
        gamma: f64,
        run_time: f64,
        grid: &StepGrid,
        method: Method,
        perturbation: &ComplexMatrix,
    ) -> Result<f64> {
        let frame =
            build_transport_frame(self.family, &grid.evaluation_points(method), BasisChoice::Analytic, FrameOptions::default())?;
        let generator = RotatedGenerator::new(self.dissipator, tensor, &frame, run_time, gamma, BlockSet::All)?;
        let d = self.rho0.rows();
        // eigenspace projectors in reference-basis coordinates are label masks
        let labels = frame.labels();
        let projectors: Vec<ComplexMatrix> = (0..frame.num_spaces())
            .map(|k| ComplexMatrix::real_diagonal(&labels.iter().map(|&l| if l == k { 1.0 } else { 0.0 }).collect::<Vec<_>>()))
            .collect();
        let projectors = &projectors;
        let mut off = perturbation.clone();
        for pk in projectors {
            off -= &pk.matmul(perturbation).matmul(pk);
        }
        let base = frame.to_reference_basis(0, &self.rho0);
        let v0 = base.vectorize();
        let v1 = (&base + &off).vectorize();
        let start = ComplexMatrix::from_fn(d * d, 2, |r, c| if c == 0 { v0[r] } else { v1[r] });
        let mut worst: f64 = 0.0;
        integrate_visit(|s| Ok(generator.full_at(s)?.into_matrix()), &start, grid, method, |_, x| {
            let a = ComplexMatrix::devectorize(&x.column(0), d)?;
            let b = ComplexMatrix::devectorize(&x.column(1), d)?;
            let diff = &a - &b;
            for pk in projectors {
                worst = worst.max(pk.matmul(&diff).matmul(pk).frobenius_norm());
            }
            Ok(())
        })?;
        Ok(worst)
    }
}

/// Residuals of the Lindblad re-factorization against the direct projector
/// filter at the given s.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LindbladCheck {
    pub max_residual: f64,
    pub min_g_eigenvalue: f64,
}

pub fn lindblad_check<F, D>(family: &F, dissipator: &D, tensor: &ResonanceTensor, samples: &[f64]) -> Result<LindbladCheck>
where
    F: HamiltonianFamily + ?Sized,
    D: LindbladDissipator + ?Sized,
{
    let tracker = SpectralTracker::new(family, DEFAULT_DEGENERACY_TOL)?;
    let mut out = LindbladCheck { max_residual: 0.0, min_g_eigenvalue: f64::INFINITY };
    for &s in samples {
        let dec = tracker.decompose(s)?;
        let factor = lindblad_factorize(dissipator, tensor, &dec, s)?;
        let direct = filtered_dissipator_direct(&dissipator.superoperator(s)?, &dec.projectors, tensor)?;
        let residual = factor.superoperator()?.matrix().distance(direct.matrix());
        out.max_residual = out.max_residual.max(residual);
        out.min_g_eigenvalue = out.min_g_eigenvalue.min(factor.min_g_eigenvalue());
    }
    Ok(out)
}

/// Rejects non-finite or negative sweep values.
pub fn validate_sweep(gammas: &[f64], run_times: &[f64], dt: f64) -> Result<()> {
    if gammas.is_empty() || run_times.is_empty() {
        return Err(Error::InvalidArgument("empty Γ or T list".into()));
    }
    if let Some(g) = gammas.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
        return Err(Error::InvalidArgument(format!("Γ = {g} must be finite and ≥ 0")));
    }
    if let Some(t) = run_times.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(Error::InvalidArgument(format!("T = {t} must be finite and > 0")));
    }
    let t_min = run_times.iter().copied().fold(f64::INFINITY, f64::min);
    if !(dt.is_finite() && dt > 0.0 && dt <= t_min / 10.0) {
        return Err(Error::InvalidArgument(format!("dt = {dt} must be positive and at most min(T)/10 = {}", t_min / 10.0)));
    }
    Ok(())
}
