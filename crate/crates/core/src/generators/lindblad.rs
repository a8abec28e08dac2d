//! Lindblad form of the filtered dissipator.
//!
//! With G_(kk'),(ll') = g_klk'l' = Σ_m λ_m c^(m)_kk' c^(m)*_ll', the filtered
//! dissipator equals −i[Σ_k P_k F P_k, ·] plus the jump terms of
//! M_n^(m) = Σ_kk' √λ_m c^(m)_kk' P_k V_n P_k'.

use num_complex::Complex64 as C64;

use super::LindbladDissipator;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigendecompose, ComplexMatrix, SuperOperatorMatrix};
use crate::resonance::ResonanceTensor;
use crate::spectral::SpectralDecomposition;

/// Most negative eigenvalue of G tolerated as rounding.
pub const G_SPECTRUM_TOL: f64 = 1e-10;

/// Eigenvalues below this are treated as zero and contribute no operators.
const ZERO_WEIGHT: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct LindbladFactorization {
    pub effective_hamiltonian: ComplexMatrix,
    pub lindblad_ops: Vec<ComplexMatrix>,
    pub g_eigenvalues: Vec<f64>,
    /// Eigenvectors c^(m) of G as columns, indexed k·K + k'.
    pub g_eigenvectors: ComplexMatrix,
}

impl LindbladFactorization {
    pub fn superoperator(&self) -> Result<SuperOperatorMatrix> {
        SuperOperatorMatrix::lindblad(&self.effective_hamiltonian, &self.lindblad_ops)
    }

    pub fn min_g_eigenvalue(&self) -> f64 {
        self.g_eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn nonzero_weights(&self) -> usize {
        self.g_eigenvalues.iter().filter(|&&l| l > ZERO_WEIGHT).count()
    }
}

pub fn lindblad_factorize<D: LindbladDissipator + ?Sized>(
    dissipator: &D,
    tensor: &ResonanceTensor,
    dec: &SpectralDecomposition,
    s: f64,
) -> Result<LindbladFactorization> {
    let k_count = tensor.num_spaces();
    if dec.num_spaces() != k_count {
        return Err(Error::DimensionMismatch { expected: dec.num_spaces(), found: k_count });
    }
    let g = tensor.g_matrix();
    let eig = hermitian_eigendecompose(&g, 1e-12)?;
    if let Some(&min) = eig.values.first() {
        if min < -G_SPECTRUM_TOL {
            return Err(Error::NegativeGSpectrum { value: min });
        }
    }

    let p = &dec.projectors;
    let f = dissipator.hamiltonian_part(s);
    let d = f.rows();
    let mut effective = ComplexMatrix::zeros(d, d);
    for pk in p {
        effective += &pk.matmul(&f).matmul(pk);
    }

    let jumps = dissipator.jump_operators(s);
    // P_k V_n P_k' for every n, k, k'
    let sandwiched: Vec<Vec<ComplexMatrix>> = jumps
        .iter()
        .map(|v| {
            (0..k_count * k_count)
                .map(|idx| p[idx / k_count].matmul(v).matmul(&p[idx % k_count]))
                .collect()
        })
        .collect();

    let mut ops = Vec::new();
    for (m, &lambda) in eig.values.iter().enumerate() {
        if lambda <= ZERO_WEIGHT {
            continue;
        }
        let weight = lambda.sqrt();
        for pieces in &sandwiched {
            let mut op = ComplexMatrix::zeros(d, d);
            for (idx, piece) in pieces.iter().enumerate() {
                let c = eig.vectors[(idx, m)];
                if c != C64::new(0.0, 0.0) {
                    op += &piece.scale(c * weight);
                }
            }
            ops.push(op);
        }
    }

    Ok(LindbladFactorization {
        effective_hamiltonian: effective.hermitian_part(),
        lindblad_ops: ops,
        g_eigenvalues: eig.values,
        g_eigenvectors: eig.vectors,
    })
}
