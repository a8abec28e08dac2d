//! Adiabatic approximation for weakly open quantum systems.
//!
//! The crate compares exact time-dependent Lindblad evolution
//! `dρ/ds = −iT[H(s), ρ] + ΓT·D_s(ρ)` with its adiabatic approximation, in
//! which the dissipator is filtered through the instantaneous eigenprojectors
//! of `H(s)` according to which eigenvalue gaps coincide.
//!
//! Module map:
//! - [`linalg`]: dense complex matrices, Jacobi eigensolver, `expm`, vectorization.
//! - [`spectral`]: eigenspace tracking, projector derivatives, the geometric
//!   term `Q(s)` and transport frames `U(s)`, `Z(s)`.
//! - [`resonance`]: gap functions and the 0/1 resonance tensor.
//! - [`generators`]: exact, approximate and rotated-block generators, the
//!   Lindblad re-factorization and Choi-matrix positivity checks.
//! - [`propagation`]: piecewise-exponential and RK4 integrators, trajectory metrics.
//! - [`models`]: the four-level holonomic gate and the random rotating model.
//! - [`experiment`]: sweep runs shared by the CLI and the acceptance suite.

pub mod error;
pub mod experiment;
pub mod generators;
pub mod linalg;
pub mod models;
pub mod propagation;
pub mod resonance;
pub mod spectral;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, SuperOperatorMatrix};
