//! Randomly generated rotating model H(s) = e^{−isZ} H₀ e^{isZ} with the
//! dephasing dissipator D(ρ) = −[A, [A, ρ]].
//!
//! Draws use ChaCha8 seeded with `seed_from_u64(seed)`; H₀, Z, A and the
//! initial state each come from their own stream (0, 1, 2, 3), so changing one
//! draw never shifts the others.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::generators::StaticDissipator;
use crate::linalg::{hermitian_eigendecompose, ComplexMatrix};
use crate::spectral::{Eigenbasis, HamiltonianFamily};

pub const DEFAULT_DIM: usize = 4;

const STREAM_H0: u64 = 0;
const STREAM_Z: u64 = 1;
const STREAM_A: u64 = 2;
const STREAM_STATE: u64 = 3;

#[derive(Clone, Debug)]
pub struct RandomRotatingModel {
    pub seed: u64,
    pub h0: ComplexMatrix,
    pub z: ComplexMatrix,
    pub a: ComplexMatrix,
    pub initial_state: Vec<C64>,
    h0_eigen_values: Vec<f64>,
    h0_eigen_vectors: ComplexMatrix,
    z_values: Vec<f64>,
    z_vectors: ComplexMatrix,
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Standard complex Gaussian: real and imaginary parts each N(0, 1/2).
fn complex_gaussian(rng: &mut ChaCha8Rng) -> C64 {
    let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid deviation");
    C64::new(normal.sample(rng), normal.sample(rng))
}

fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    (&g + &g.adjoint()).scale_real(0.5)
}

pub fn make_random_model(seed: u64, dim: usize) -> Result<RandomRotatingModel> {
    let h0 = random_hermitian(&mut stream(seed, STREAM_H0), dim);
    let z = random_hermitian(&mut stream(seed, STREAM_Z), dim);
    let a = random_hermitian(&mut stream(seed, STREAM_A), dim);
    let mut rng = stream(seed, STREAM_STATE);
    let raw: Vec<C64> = (0..dim).map(|_| complex_gaussian(&mut rng)).collect();
    let norm = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let initial_state = raw.iter().map(|c| c / norm).collect();
    let h0_eigen = hermitian_eigendecompose(&h0, 1e-12)?;
    let z_eigen = hermitian_eigendecompose(&z, 1e-12)?;
    Ok(RandomRotatingModel {
        seed,
        h0,
        z,
        a,
        initial_state,
        h0_eigen_values: h0_eigen.values,
        h0_eigen_vectors: h0_eigen.vectors,
        z_values: z_eigen.values,
        z_vectors: z_eigen.vectors,
    })
}

impl RandomRotatingModel {
    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    /// e^{−isZ}.
    pub fn rotation(&self, s: f64) -> ComplexMatrix {
        let w = &self.z_vectors;
        let phases: Vec<C64> = self.z_values.iter().map(|&z| C64::from_polar(1.0, -s * z)).collect();
        w.matmul(&ComplexMatrix::diagonal(&phases)).matmul(&w.adjoint())
    }

    pub fn initial_density(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.initial_state, &self.initial_state)
    }

    pub fn dissipator(&self) -> Result<StaticDissipator> {
        StaticDissipator::double_commutator(&self.a)
    }

    /// Fidelity and loss are taken over the whole space.
    pub fn computational_projector(&self) -> ComplexMatrix {
        ComplexMatrix::identity(self.dim())
    }
}

impl HamiltonianFamily for RandomRotatingModel {
    fn dim(&self) -> usize {
        self.h0.dim()
    }

    fn hamiltonian(&self, s: f64) -> ComplexMatrix {
        let r = self.rotation(s);
        r.matmul(&self.h0).matmul(&r.adjoint()).hermitian_part()
    }

    /// The rotated eigenvectors of H₀, smooth in s by construction.
    fn analytic_eigenbasis(&self, s: f64) -> Result<Option<Eigenbasis>> {
        Ok(Some(Eigenbasis {
            energies: self.h0_eigen_values.clone(),
            vectors: self.rotation(s).matmul(&self.h0_eigen_vectors),
        }))
    }
}
