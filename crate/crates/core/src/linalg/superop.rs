use std::ops::{Add, Mul, Sub};

use num_complex::Complex64 as C64;

use super::matrix::{ComplexMatrix, I, ONE};
use crate::error::{Error, Result};

/// Linear map on `dim × dim` operators, acting on column-stacked vectors.
///
/// With `vec(ρ)[i + d·j] = ρ[i][j]`, the map ρ ↦ XρY has matrix `Yᵀ ⊗ X`.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperOperatorMatrix {
    dim: usize,
    matrix: ComplexMatrix,
}

impl SuperOperatorMatrix {
    pub fn new(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        let n = dim * dim;
        if matrix.rows() != n || matrix.cols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.rows() });
        }
        Ok(Self { dim, matrix })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, matrix: ComplexMatrix::zeros(dim * dim, dim * dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, matrix: ComplexMatrix::identity(dim * dim) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let v = self.matrix.matvec(&rho.vectorize());
        ComplexMatrix::devectorize(&v, self.dim).expect("dimension checked at construction")
    }

    pub fn compose(&self, inner: &Self) -> Self {
        Self { dim: self.dim, matrix: self.matrix.matmul(&inner.matrix) }
    }

    pub fn scale_real(&self, a: f64) -> Self {
        Self { dim: self.dim, matrix: self.matrix.scale_real(a) }
    }

    /// Norm of vec(I)†·L, zero for trace-preserving generators.
    pub fn trace_defect(&self) -> f64 {
        let d = self.dim;
        let n = d * d;
        let mut acc = 0.0;
        for col in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for i in 0..d {
                s += self.matrix[(i + d * i, col)];
            }
            acc += s.norm_sqr();
        }
        acc.sqrt()
    }

    /// `−i[H, ·]`.
    pub fn commutator(h: &ComplexMatrix) -> Result<Self> {
        let id = ComplexMatrix::identity(h.dim());
        let left = sandwich_superop(h, &id)?;
        let right = sandwich_superop(&id, h)?;
        Ok((&left - &right).scale_complex(-I))
    }

    /// `−i[F, ·] + Σₙ (VₙρVₙ† − ½{Vₙ†Vₙ, ρ})`.
    pub fn lindblad(hamiltonian: &ComplexMatrix, jumps: &[ComplexMatrix]) -> Result<Self> {
        let d = hamiltonian.dim();
        let id = ComplexMatrix::identity(d);
        let mut out = Self::commutator(hamiltonian)?;
        for v in jumps {
            if v.rows() != d || v.cols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: v.rows() });
            }
            let vdv = v.adjoint().matmul(v).scale_real(-0.5);
            out = &out + &sandwich_superop(v, &v.adjoint())?;
            out = &out + &sandwich_superop(&vdv, &id)?;
            out = &out + &sandwich_superop(&id, &vdv)?;
        }
        Ok(out)
    }

    pub fn scale_complex(&self, a: C64) -> Self {
        Self { dim: self.dim, matrix: self.matrix.scale(a) }
    }

    /// The same map with the operator space re-expressed in the basis given
    /// by the columns of the unitary `basis`: X ↦ B†·L(B X B†)·B.
    pub fn in_basis(&self, basis: &ComplexMatrix) -> Result<Self> {
        let to = sandwich_superop(&basis.adjoint(), basis)?;
        let from = sandwich_superop(basis, &basis.adjoint())?;
        Ok(to.compose(self).compose(&from))
    }
}

/// Superoperator of ρ ↦ XρY, i.e. `Yᵀ ⊗ X` under column stacking.
pub fn sandwich_superop(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<SuperOperatorMatrix> {
    if !x.is_square() || !y.is_square() || x.rows() != y.rows() {
        return Err(Error::DimensionMismatch { expected: x.rows(), found: y.rows() });
    }
    let d = x.rows();
    Ok(SuperOperatorMatrix { dim: d, matrix: y.transpose().kron(x) })
}

/// vec(I) for dimension d.
pub fn vec_identity(d: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        v[i + d * i] = ONE;
    }
    v
}

impl Add for &SuperOperatorMatrix {
    type Output = SuperOperatorMatrix;

    fn add(self, rhs: &SuperOperatorMatrix) -> SuperOperatorMatrix {
        assert_eq!(self.dim, rhs.dim);
        SuperOperatorMatrix { dim: self.dim, matrix: &self.matrix + &rhs.matrix }
    }
}

impl Sub for &SuperOperatorMatrix {
    type Output = SuperOperatorMatrix;

    fn sub(self, rhs: &SuperOperatorMatrix) -> SuperOperatorMatrix {
        assert_eq!(self.dim, rhs.dim);
        SuperOperatorMatrix { dim: self.dim, matrix: &self.matrix - &rhs.matrix }
    }
}

impl Mul for &SuperOperatorMatrix {
    type Output = SuperOperatorMatrix;

    fn mul(self, rhs: &SuperOperatorMatrix) -> SuperOperatorMatrix {
        self.compose(rhs)
    }
}
