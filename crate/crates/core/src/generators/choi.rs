use crate::error::Result;
use crate::linalg::{hermitian_eigendecompose, ComplexMatrix, SuperOperatorMatrix};

/// C = Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|), indexed C[(i·d + a), (j·d + b)] = Φ(|i⟩⟨j|)_ab.
pub fn choi_matrix(channel: &SuperOperatorMatrix) -> ComplexMatrix {
    let d = channel.dim();
    let s = channel.matrix();
    ComplexMatrix::from_fn(d * d, d * d, |r, c| {
        let (i, a) = (r / d, r % d);
        let (j, b) = (c / d, c % d);
        s[(a + d * b, i + d * j)]
    })
}

/// Smallest eigenvalue of the Choi matrix, and whether it is ≥ −tol.
pub fn cp_check(channel: &SuperOperatorMatrix, tol: f64) -> Result<(f64, bool)> {
    let choi = choi_matrix(channel);
    // a channel that preserves Hermiticity only up to rounding has a slightly non-Hermitian Choi matrix
    let eig = hermitian_eigendecompose(&choi.hermitian_part(), f64::INFINITY)?;
    let min = eig.values.first().copied().unwrap_or(0.0);
    Ok((min, min >= -tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{matrix_exponential, sandwich_superop};
    use num_complex::Complex64 as C64;

    #[test]
    fn identity_channel_is_maximally_entangled() {
        let d = 3;
        let choi = choi_matrix(&SuperOperatorMatrix::identity(d));
        let (min, ok) = cp_check(&SuperOperatorMatrix::identity(d), 1e-12).unwrap();
        assert!(ok && min.abs() < 1e-14);
        assert!((choi.trace().re - d as f64).abs() < 1e-14);
        let eig = hermitian_eigendecompose(&choi, 1e-12).unwrap();
        assert!((eig.values[d * d - 1] - d as f64).abs() < 1e-12);
    }

    #[test]
    fn unitary_channel_has_rank_one_choi() {
        let h = ComplexMatrix::from_rows(&[&[C64::new(0.3, 0.0), C64::new(0.1, 0.4)], &[C64::new(0.1, -0.4), C64::new(-0.2, 0.0)]]);
        let u = matrix_exponential(&h.scale(C64::new(0.0, -1.0))).unwrap();
        let channel = sandwich_superop(&u, &u.adjoint()).unwrap();
        let (min, ok) = cp_check(&channel, 1e-12).unwrap();
        assert!(ok && min >= -1e-12);
        let eig = hermitian_eigendecompose(&choi_matrix(&channel), 1e-12).unwrap();
        assert_eq!(eig.values.iter().filter(|&&v| v.abs() > 1e-10).count(), 1);
    }

    #[test]
    fn transpose_is_not_completely_positive() {
        let d = 2;
        let mut m = ComplexMatrix::zeros(4, 4);
        for i in 0..d {
            for j in 0..d {
                m[(j + d * i, i + d * j)] = C64::new(1.0, 0.0);
            }
        }
        let (min, ok) = cp_check(&SuperOperatorMatrix::new(d, m).unwrap(), 1e-8).unwrap();
        assert!(!ok);
        assert!((min + 1.0).abs() < 1e-12);
    }
}
