use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigendecompose, psd_sqrt, ComplexMatrix};

/// Projected traces at or below this cannot be renormalized.
pub const EPS_NORM: f64 = 1e-12;

/// Negative eigenvalues of propagated states down to this size are clamped
/// when taking square roots for the fidelity.
pub const FIDELITY_PSD_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrajectoryMeta {
    pub run_time: f64,
    pub gamma: f64,
    pub dt: f64,
    pub generator: String,
    pub model: String,
}

/// Density operators ρ(s) at the step nodes of one propagation.
#[derive(Clone, Debug)]
pub struct Trajectory {
    grid: Vec<f64>,
    states: Vec<ComplexMatrix>,
    pub meta: TrajectoryMeta,
}

/// Worst-case invariant residuals over a trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantReport {
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl InvariantReport {
    pub fn holds(&self, trace_tol: f64, hermiticity_tol: f64, positivity_tol: f64) -> bool {
        self.max_trace_error <= trace_tol
            && self.max_hermiticity_error <= hermiticity_tol
            && self.min_eigenvalue >= -positivity_tol
    }

    pub fn merge(self, other: Self) -> Self {
        Self {
            max_trace_error: self.max_trace_error.max(other.max_trace_error),
            max_hermiticity_error: self.max_hermiticity_error.max(other.max_hermiticity_error),
            min_eigenvalue: self.min_eigenvalue.min(other.min_eigenvalue),
        }
    }
}

impl Trajectory {
    pub fn new(grid: Vec<f64>, states: Vec<ComplexMatrix>, meta: TrajectoryMeta) -> Self {
        assert_eq!(grid.len(), states.len(), "one state per grid sample");
        Self { grid, states, meta }
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn states(&self) -> &[ComplexMatrix] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn final_state(&self) -> &ComplexMatrix {
        self.states.last().expect("trajectory is never empty")
    }

    /// State at the sample equal to `s` (within 1e-12).
    pub fn state_at(&self, s: f64) -> Option<&ComplexMatrix> {
        let i = self.grid.partition_point(|&x| x < s - 1e-12);
        (i < self.grid.len() && (self.grid[i] - s).abs() <= 1e-12).then(|| &self.states[i])
    }

    pub fn invariants(&self) -> InvariantReport {
        let mut report = InvariantReport { max_trace_error: 0.0, max_hermiticity_error: 0.0, min_eigenvalue: f64::INFINITY };
        for rho in &self.states {
            report.max_trace_error = report.max_trace_error.max((rho.trace() - 1.0).norm());
            report.max_hermiticity_error = report.max_hermiticity_error.max(rho.hermiticity_error());
            let min = hermitian_eigendecompose(&rho.hermitian_part(), f64::INFINITY)
                .map(|e| e.values[0])
                .unwrap_or(f64::NEG_INFINITY);
            report.min_eigenvalue = report.min_eigenvalue.min(min);
        }
        report
    }
}

/// 1 − Tr(P ρ).
pub fn intensity_loss(rho: &ComplexMatrix, projector: &ComplexMatrix) -> f64 {
    1.0 - projector.matmul(rho).trace().re
}

/// Tr ρ².
pub fn purity(rho: &ComplexMatrix) -> f64 {
    rho.matmul(rho).trace().re
}

fn project_normalized(rho: &ComplexMatrix, projector: &ComplexMatrix) -> Result<ComplexMatrix> {
    let projected = projector.matmul(rho).matmul(projector);
    let trace = projected.trace().re;
    if trace <= EPS_NORM {
        return Err(Error::EmptySubspace { trace });
    }
    Ok(projected.scale_real(1.0 / trace).hermitian_part())
}

/// Uhlmann fidelity Tr √(√σ₁ σ₂ √σ₁) of the states projected by P and renormalized.
pub fn normalized_fidelity(rho_a: &ComplexMatrix, rho_b: &ComplexMatrix, projector: &ComplexMatrix) -> Result<f64> {
    let s1 = project_normalized(rho_a, projector)?;
    let s2 = project_normalized(rho_b, projector)?;
    let r1 = psd_sqrt(&s1, FIDELITY_PSD_TOL)?;
    let inner = r1.matmul(&s2).matmul(&r1).hermitian_part();
    let tol = FIDELITY_PSD_TOL.max(1e-12 * inner.max_abs());
    let eig = hermitian_eigendecompose(&inner, f64::INFINITY)?;
    if eig.values[0] < -tol {
        return Err(Error::NotPsd { min_eigenvalue: eig.values[0], tol });
    }
    Ok(eig.values.iter().map(|&v| v.max(0.0).sqrt()).sum())
}

/// max_s ‖ρ_a(s) − ρ_b(s)‖_HS over two trajectories on the same grid.
pub fn hs_error_max(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    if a.grid.len() != b.grid.len() || a.grid.iter().zip(&b.grid).any(|(x, y)| (x - y).abs() > 1e-12) {
        return Err(Error::GridMismatch);
    }
    Ok(a.states.iter().zip(&b.states).map(|(x, y)| x.distance(y)).fold(0.0, f64::max))
}
