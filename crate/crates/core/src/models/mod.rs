//! The two concrete systems: a four-level holonomic gate driven around a
//! path on the parameter sphere, and a randomly generated rotating-frame model.

pub mod holonomy;
pub mod random;

pub use holonomy::{
    approximate_block_matrix, build_orange_path, closed_form_output, holonomy_gate, holonomy_hamiltonian,
    Gauge, HolonomyFamily, HolonomyPath, PolarLoop, SpherePath,
};
pub use random::{make_random_model, RandomRotatingModel};
