//! Dense complex linear algebra: matrices, Hermitian eigensolver, matrix
//! exponential and superoperator vectorization.

mod eigen;
mod expm;
mod matrix;
mod superop;

pub use eigen::{hermitian_eigendecompose, psd_sqrt, HermitianEigen};
pub use expm::matrix_exponential;
pub use matrix::{ComplexMatrix, I, ONE, ZERO};
pub use superop::{sandwich_superop, vec_identity, SuperOperatorMatrix};

/// Default clamping tolerance for PSD square roots of propagated states.
pub const PSD_TOL: f64 = 1e-10;
