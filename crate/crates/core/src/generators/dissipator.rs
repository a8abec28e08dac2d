use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, SuperOperatorMatrix};

/// D_s(ρ) = −i[F(s), ρ] + Σ_n (V_n ρ V_n† − ½{V_n†V_n, ρ}).
pub trait LindbladDissipator: Send + Sync {
    fn dim(&self) -> usize;

    /// F(s), Hermitian.
    fn hamiltonian_part(&self, s: f64) -> ComplexMatrix;

    fn jump_operators(&self, s: f64) -> Vec<ComplexMatrix>;

    fn superoperator(&self, s: f64) -> Result<SuperOperatorMatrix> {
        SuperOperatorMatrix::lindblad(&self.hamiltonian_part(s), &self.jump_operators(s))
    }

    fn apply(&self, s: f64, rho: &ComplexMatrix) -> ComplexMatrix {
        let f = self.hamiltonian_part(s);
        let mut out = f.commutator(rho).scale(-crate::linalg::I);
        for v in self.jump_operators(s) {
            let vd = v.adjoint();
            let vdv = vd.matmul(&v);
            out += &v.matmul(rho).matmul(&vd);
            out -= &(&vdv.matmul(rho) + &rho.matmul(&vdv)).scale_real(0.5);
        }
        out
    }
}

/// A dissipator whose F and V_n do not depend on s.
#[derive(Clone, Debug)]
pub struct StaticDissipator {
    hamiltonian: ComplexMatrix,
    jumps: Vec<ComplexMatrix>,
}

impl StaticDissipator {
    pub fn new(hamiltonian: ComplexMatrix, jumps: Vec<ComplexMatrix>) -> Result<Self> {
        let d = hamiltonian.rows();
        if !hamiltonian.is_square() {
            return Err(Error::DimensionMismatch { expected: d, found: hamiltonian.cols() });
        }
        let residual = hamiltonian.hermiticity_error();
        if residual > 1e-12 {
            return Err(Error::NotHermitian { residual, tol: 1e-12 });
        }
        if let Some(v) = jumps.iter().find(|v| v.rows() != d || v.cols() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: v.rows() });
        }
        Ok(Self { hamiltonian, jumps })
    }

    /// Jump operators only, F = 0.
    pub fn from_jumps(jumps: Vec<ComplexMatrix>) -> Result<Self> {
        let d = jumps.first().map_or(0, |v| v.rows());
        Self::new(ComplexMatrix::zeros(d, d), jumps)
    }

    /// −[A, [A, ρ]], written as the single jump √2·A with F = 0.
    pub fn double_commutator(a: &ComplexMatrix) -> Result<Self> {
        Self::from_jumps(vec![a.scale_real(std::f64::consts::SQRT_2)])
    }
}

impl LindbladDissipator for StaticDissipator {
    fn dim(&self) -> usize {
        self.hamiltonian.rows()
    }

    fn hamiltonian_part(&self, _s: f64) -> ComplexMatrix {
        self.hamiltonian.clone()
    }

    fn jump_operators(&self, _s: f64) -> Vec<ComplexMatrix> {
        self.jumps.clone()
    }
}
