use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, I};

use super::{polar_unitary, Differentiator, HamiltonianFamily, SpectralTracker, DEFAULT_DEGENERACY_TOL};

/// Source of the instantaneous eigenbasis χ_k(s) defining U(s) = Σ_k |χ_k(0)⟩⟨χ_k(s)|.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisChoice {
    /// The family's closed-form eigenbasis.
    Analytic,
    /// Numerical eigenvectors, each degenerate block aligned to the previous
    /// sample by the polar factor of the overlap matrix.
    Continued,
}

#[derive(Clone, Copy, Debug)]
pub struct FrameOptions {
    pub degeneracy_tol: f64,
    pub differentiator: Differentiator,
    /// Largest accepted ‖U(s_{i+1}) − U(s_i)‖_F between neighbouring samples.
    pub frame_jump_tol: f64,
}

impl Default for FrameOptions {
    fn default() -> Self {
        Self {
            degeneracy_tol: DEFAULT_DEGENERACY_TOL,
            differentiator: Differentiator::default(),
            frame_jump_tol: 0.5,
        }
    }
}

/// U(s) and Z(s) = i U̇(s) U†(s) sampled on a grid starting at s = 0.
///
/// The basis B(s) has the eigenvectors χ_k(s) as columns, so U = B(0) B(s)†.
/// Operators in the "reference basis" are expressed in the columns of B(0).
#[derive(Clone, Debug)]
pub struct TransportFrame {
    grid: Vec<f64>,
    bases: Vec<ComplexMatrix>,
    labels: Vec<usize>,
    energies: Vec<Vec<f64>>,
    unitaries: Vec<ComplexMatrix>,
    generators: Vec<ComplexMatrix>,
    reference_projectors: Vec<ComplexMatrix>,
}

struct BasisSample {
    basis: ComplexMatrix,
    labels: Vec<usize>,
    energies: Vec<f64>,
}

pub fn build_transport_frame<F: HamiltonianFamily + ?Sized>(
    family: &F,
    grid: &[f64],
    choice: BasisChoice,
    options: FrameOptions,
) -> Result<TransportFrame> {
    if grid.is_empty() || grid[0] != 0.0 {
        return Err(Error::InvalidArgument("transport frame grid must start at s = 0".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) || grid[grid.len() - 1] > 1.0 {
        return Err(Error::InvalidArgument("transport frame grid must increase within [0, 1]".into()));
    }
    let tracker = SpectralTracker::new(family, options.degeneracy_tol)?;
    let breakpoints = family.breakpoints();

    let sample = |x: f64, reference: Option<&ComplexMatrix>| -> Result<BasisSample> {
        let dec = tracker.decompose(x)?;
        match choice {
            BasisChoice::Analytic => {
                let eb = family.analytic_eigenbasis(x)?.ok_or_else(|| {
                    Error::InvalidArgument("family provides no analytic eigenbasis".into())
                })?;
                let labels = eb
                    .energies
                    .iter()
                    .map(|e| {
                        (0..dec.num_spaces())
                            .min_by(|&a, &b| (dec.energies[a] - e).abs().total_cmp(&(dec.energies[b] - e).abs()))
                            .unwrap_or(0)
                    })
                    .collect();
                Ok(BasisSample { basis: eb.vectors, labels, energies: dec.energies })
            }
            BasisChoice::Continued => {
                let mut basis = dec.basis.clone();
                if let Some(prev) = reference {
                    for k in 0..dec.num_spaces() {
                        let cols = dec.columns_of(k);
                        let new_block = dec.basis.select_columns(&cols);
                        let old_block = prev.select_columns(&cols);
                        let w = polar_unitary(&new_block.adjoint().matmul(&old_block))?;
                        let aligned = new_block.matmul(&w);
                        for (i, &c) in cols.iter().enumerate() {
                            basis.set_column(c, &aligned.column(i));
                        }
                    }
                }
                Ok(BasisSample { basis, labels: dec.labels, energies: dec.energies })
            }
        }
    };

    let first = sample(0.0, None)?;
    let b0 = first.basis.clone();
    let labels = first.labels.clone();
    let reference_projectors = tracker.reference().projectors.clone();

    let mut bases = Vec::with_capacity(grid.len());
    let mut energies = Vec::with_capacity(grid.len());
    let mut unitaries: Vec<ComplexMatrix> = Vec::with_capacity(grid.len());
    let mut generators = Vec::with_capacity(grid.len());
    let mut prev_basis = b0.clone();

    for (i, &s) in grid.iter().enumerate() {
        let current = if i == 0 { sample(0.0, None)? } else { sample(s, Some(&prev_basis))? };
        if current.labels != labels {
            return Err(Error::InvalidArgument(format!("eigenbasis column labels change at s = {s}")));
        }
        let u = b0.matmul(&current.basis.adjoint());
        if let Some(prev_u) = unitaries.last() {
            let jump = u.distance(prev_u);
            if jump > options.frame_jump_tol {
                return Err(Error::FrameDiscontinuity { from: grid[i - 1], to: s, jump });
            }
        }
        let bdot = options
            .differentiator
            .matrix_derivative(s, &breakpoints, |x| Ok(sample(x, Some(&current.basis))?.basis))?;
        let z = b0.matmul(&bdot.adjoint()).matmul(&current.basis).matmul(&b0.adjoint()).scale(I);

        prev_basis = current.basis.clone();
        bases.push(current.basis);
        energies.push(current.energies);
        unitaries.push(u);
        generators.push(z.hermitian_part());
    }

    Ok(TransportFrame {
        grid: grid.to_vec(),
        bases,
        labels,
        energies,
        unitaries,
        generators,
        reference_projectors,
    })
}

impl TransportFrame {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.bases[0].rows()
    }

    /// Index of the grid sample equal to `s` (within 1e-12).
    pub fn index_of(&self, s: f64) -> Result<usize> {
        let i = self.grid.partition_point(|&x| x < s - 1e-12);
        if i < self.grid.len() && (self.grid[i] - s).abs() <= 1e-12 {
            Ok(i)
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn basis(&self, i: usize) -> &ComplexMatrix {
        &self.bases[i]
    }

    pub fn reference_basis(&self) -> &ComplexMatrix {
        &self.bases[0]
    }

    /// Eigenspace label of each basis column.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_spaces(&self) -> usize {
        self.reference_projectors.len()
    }

    /// E_k(s_i) by label.
    pub fn energies(&self, i: usize) -> &[f64] {
        &self.energies[i]
    }

    pub fn unitary(&self, i: usize) -> &ComplexMatrix {
        &self.unitaries[i]
    }

    /// Z(s_i) in the lab basis.
    pub fn generator(&self, i: usize) -> &ComplexMatrix {
        &self.generators[i]
    }

    /// Z(s_i) expressed in the reference basis, B(0)† Z B(0).
    pub fn generator_in_reference_basis(&self, i: usize) -> ComplexMatrix {
        let b0 = self.reference_basis();
        b0.adjoint().matmul(&self.generators[i]).matmul(b0)
    }

    pub fn reference_projectors(&self) -> &[ComplexMatrix] {
        &self.reference_projectors
    }

    /// ρ ↦ B(s_i)† ρ B(s_i): the rotated state U ρ U† in reference-basis coordinates.
    pub fn to_reference_basis(&self, i: usize, rho: &ComplexMatrix) -> ComplexMatrix {
        let b = &self.bases[i];
        b.adjoint().matmul(rho).matmul(b)
    }

    pub fn from_reference_basis(&self, i: usize, rho: &ComplexMatrix) -> ComplexMatrix {
        let b = &self.bases[i];
        b.matmul(rho).matmul(&b.adjoint())
    }

    /// Largest ‖U U† − 1‖_F over the grid.
    pub fn unitarity_error(&self) -> f64 {
        let d = self.dim();
        self.unitaries
            .iter()
            .map(|u| u.matmul(&u.adjoint()).distance(&ComplexMatrix::identity(d)))
            .fold(0.0, f64::max)
    }

    /// Largest ‖U(s) P_k(s) U(s)† − P_k(0)‖_F over grid samples and labels.
    pub fn transport_error<F: HamiltonianFamily + ?Sized>(&self, family: &F, degeneracy_tol: f64) -> Result<f64> {
        let tracker = SpectralTracker::new(family, degeneracy_tol)?;
        let mut worst: f64 = 0.0;
        for (i, &s) in self.grid.iter().enumerate() {
            let dec = tracker.decompose(s)?;
            let u = &self.unitaries[i];
            for (p, p0) in dec.projectors.iter().zip(&self.reference_projectors) {
                worst = worst.max(u.matmul(p).matmul(&u.adjoint()).distance(p0));
            }
        }
        Ok(worst)
    }
}
