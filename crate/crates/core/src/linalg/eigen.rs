use num_complex::Complex64 as C64;

use super::matrix::{ComplexMatrix, ZERO};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// V f(Λ) V†.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|x| x)
    }
}

/// Cyclic complex Jacobi diagonalization of a Hermitian matrix.
///
/// Each rotation first removes the phase of the pivot element, then applies
/// a real Givens rotation, so the accumulated eigenvector matrix stays
/// unitary to rounding.
pub fn hermitian_eigendecompose(a: &ComplexMatrix, tol: f64) -> Result<HermitianEigen> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: a.rows(), found: a.cols() });
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let herm_err = a.hermiticity_error();
    if herm_err > tol {
        return Err(Error::NotHermitian { residual: herm_err, tol });
    }
    let n = a.rows();
    let mut m = a.hermitian_part();
    for i in 0..n {
        m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
    }
    let mut v = ComplexMatrix::identity(n);
    let scale = m.frobenius_norm();
    let target = 1e-15 * scale.max(f64::MIN_POSITIVE);

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&m) <= target {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&m) > target {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = v.select_columns(&order);
    Ok(HermitianEigen { values, vectors })
}

fn off_diagonal_norm(m: &ComplexMatrix) -> f64 {
    let n = m.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let b = apq.norm();
    if b == 0.0 {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let phase = apq / b;
    let phase_conj = phase.conj();
    let theta = (aqq - app) / (2.0 * b);
    let t = if theta.is_infinite() {
        0.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = m.rows();

    // M ← M J with J = [[c, s], [−s e^{−iα}, c e^{−iα}]] on (p, q).
    for i in 0..n {
        let mp = m[(i, p)];
        let mq = m[(i, q)];
        m[(i, p)] = mp * c - mq * phase_conj * s;
        m[(i, q)] = mp * s + mq * phase_conj * c;
        let vp = v[(i, p)];
        let vq = v[(i, q)];
        v[(i, p)] = vp * c - vq * phase_conj * s;
        v[(i, q)] = vp * s + vq * phase_conj * c;
    }
    // M ← J† M.
    for j in 0..n {
        let mp = m[(p, j)];
        let mq = m[(q, j)];
        m[(p, j)] = mp * c - mq * phase * s;
        m[(q, j)] = mp * s + mq * phase * c;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
}

/// Principal square root of a positive semidefinite matrix.
///
/// Eigenvalues in `[−tol, 0)` are clamped to zero.
pub fn psd_sqrt(a: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eigendecompose(a, tol.max(1e-12 * a.max_abs()))?;
    if let Some(&min) = eig.values.first() {
        if min < -tol {
            return Err(Error::NotPsd { min_eigenvalue: min, tol });
        }
    }
    Ok(eig.reconstruct_with(|x| x.max(0.0).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        let g = ComplexMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        g.hermitian_part()
    }

    #[test]
    fn diagonal_input_sorts_eigenvalues() {
        let a = ComplexMatrix::real_diagonal(&[3.0, 1.0, 2.0]);
        let eig = hermitian_eigendecompose(&a, 1e-12).unwrap();
        assert_eq!(eig.values, vec![1.0, 2.0, 3.0]);
        // eigenvector for 1 is e_1, for 3 is e_0
        assert!((eig.vectors[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((eig.vectors[(2, 1)].norm() - 1.0).abs() < 1e-15);
        assert!((eig.vectors[(0, 2)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_x_eigenpairs() {
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let eig = hermitian_eigendecompose(&x, 1e-12).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-15);
        assert!((eig.values[1] - 1.0).abs() < 1e-15);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = eig.vectors.column(0);
        // (1, −1)/√2 up to a global phase
        let phase = v0[0] / v0[0].norm();
        assert!((v0[0] / phase - C64::new(r, 0.0)).norm() < 1e-14);
        assert!((v0[1] / phase - C64::new(-r, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2, 4, 9, 16] {
            let a = random_hermitian(&mut rng, n);
            let eig = hermitian_eigendecompose(&a, 1e-12).unwrap();
            assert!(eig.reconstruct().distance(&a) <= 1e-10, "n = {n}");
            assert!(eig.vectors.is_unitary(1e-10));
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn degenerate_spectrum_is_handled() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(&mut rng, 4);
        let basis = hermitian_eigendecompose(&h, 1e-12).unwrap().vectors;
        let d = ComplexMatrix::real_diagonal(&[-1.0, 0.0, 0.0, 1.0]);
        let a = basis.matmul(&d).matmul(&basis.adjoint());
        let eig = hermitian_eigendecompose(&a, 1e-12).unwrap();
        assert!(eig.values[1].abs() < 1e-14 && eig.values[2].abs() < 1e-14);
        assert!(eig.reconstruct().distance(&a) < 1e-12);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(matches!(hermitian_eigendecompose(&a, 1e-8), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn sqrt_of_simple_inputs() {
        let id = ComplexMatrix::identity(3);
        assert!(psd_sqrt(&id, 1e-10).unwrap().distance(&id) < 1e-15);
        let d = ComplexMatrix::real_diagonal(&[4.0, 9.0]);
        let s = psd_sqrt(&d, 1e-10).unwrap();
        assert!(s.distance(&ComplexMatrix::real_diagonal(&[2.0, 3.0])) < 1e-14);
    }

    #[test]
    fn sqrt_of_random_psd_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let g = ComplexMatrix::from_fn(2, 2, |_, _| {
                C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            let a = g.matmul(&g.adjoint());
            let s = psd_sqrt(&a, 1e-10).unwrap();
            assert!(s.matmul(&s).distance(&a) <= 1e-10);
            assert!(s.is_psd(1e-12));
        }
    }

    #[test]
    fn sqrt_rejects_negative_and_clamps_tiny() {
        let a = ComplexMatrix::real_diagonal(&[1.0, -0.1]);
        assert!(matches!(psd_sqrt(&a, 1e-10), Err(Error::NotPsd { .. })));
        let b = ComplexMatrix::real_diagonal(&[1.0, -1e-12]);
        let s = psd_sqrt(&b, 1e-10).unwrap();
        assert_eq!(s[(1, 1)], ZERO);
    }
}
