//! Generators of the exact and the adiabatically approximated master equation,
//! as superoperator matrices acting on column-stacked density operators.
//!
//! Exact: `L(s) = −iT[H(s), ·] + ΓT·D_s`.
//!
//! Approximate: `L_a(s) = −i[T·H(s) + Q(s), ·] + ΓT Σ g_klk'l' P_k D_s(P_k' · P_l') P_l`.

mod choi;
mod dissipator;
mod lindblad;
mod rotated;

pub use choi::{choi_matrix, cp_check};
pub use dissipator::{LindbladDissipator, StaticDissipator};
pub use lindblad::{lindblad_factorize, LindbladFactorization, G_SPECTRUM_TOL};
pub use rotated::{rotated_block_generator, BlockGenerator, BlockSet, RotatedGenerator};

use crate::error::{Error, Result};
use crate::linalg::{sandwich_superop, ComplexMatrix, SuperOperatorMatrix};
use crate::resonance::ResonanceTensor;
use crate::spectral::{HamiltonianFamily, SpectralDecomposition, SpectralTracker};

fn check_dims(h: usize, d: usize) -> Result<()> {
    if h != d {
        return Err(Error::DimensionMismatch { expected: h, found: d });
    }
    Ok(())
}

/// `−iT[H(s), ·] + ΓT·D_s`.
pub fn exact_generator<F, D>(family: &F, dissipator: &D, run_time: f64, gamma: f64, s: f64) -> Result<SuperOperatorMatrix>
where
    F: HamiltonianFamily + ?Sized,
    D: LindbladDissipator + ?Sized,
{
    check_dims(family.dim(), dissipator.dim())?;
    let coherent = SuperOperatorMatrix::commutator(&family.hamiltonian(s).scale_real(run_time))?;
    if gamma == 0.0 {
        return Ok(coherent);
    }
    Ok(&coherent + &dissipator.superoperator(s)?.scale_real(gamma * run_time))
}

/// `Σ g_klk'l' P_k D(P_k' · P_l') P_l`, computed by masking `D` in the
/// instantaneous eigenbasis.
pub fn filtered_dissipator(
    dissipator: &SuperOperatorMatrix,
    dec: &SpectralDecomposition,
    tensor: &ResonanceTensor,
) -> Result<SuperOperatorMatrix> {
    let d = dissipator.dim();
    let b = &dec.basis;
    let in_eigenbasis = dissipator.in_basis(b)?;
    let masked = mask_by_tensor(in_eigenbasis.matrix(), &dec.labels, tensor);
    let masked = SuperOperatorMatrix::new(d, masked)?;
    masked.in_basis(&b.adjoint())
}

/// Zeroes entry [(i, j), (i', j')] unless g(lab i, lab j, lab i', lab j') = 1.
pub(crate) fn mask_by_tensor(m: &ComplexMatrix, labels: &[usize], tensor: &ResonanceTensor) -> ComplexMatrix {
    let d = labels.len();
    ComplexMatrix::from_fn(d * d, d * d, |r, c| {
        let (i, j) = (r % d, r / d);
        let (ip, jp) = (c % d, c / d);
        if tensor.g(labels[i], labels[j], labels[ip], labels[jp]) {
            m[(r, c)]
        } else {
            num_complex::Complex64::new(0.0, 0.0)
        }
    })
}

/// The same filtered dissipator as a literal sum of K⁴ projector sandwiches.
pub fn filtered_dissipator_direct(
    dissipator: &SuperOperatorMatrix,
    projectors: &[ComplexMatrix],
    tensor: &ResonanceTensor,
) -> Result<SuperOperatorMatrix> {
    let d = dissipator.dim();
    let k_count = projectors.len();
    let mut out = SuperOperatorMatrix::zeros(d);
    for k in 0..k_count {
        for l in 0..k_count {
            let outer = sandwich_superop(&projectors[k], &projectors[l])?;
            for kp in 0..k_count {
                for lp in 0..k_count {
                    if !tensor.g(k, l, kp, lp) {
                        continue;
                    }
                    let inner = sandwich_superop(&projectors[kp], &projectors[lp])?;
                    out = &out + &outer.compose(dissipator).compose(&inner);
                }
            }
        }
    }
    Ok(out)
}

/// `−i[T·H + Q, ·] + ΓT Σ g P_k D(P_k' · P_l') P_l` at one s, given Q(s).
pub fn approximate_generator<F, D>(
    family: &F,
    dissipator: &D,
    tensor: &ResonanceTensor,
    run_time: f64,
    gamma: f64,
    s: f64,
    q: &ComplexMatrix,
) -> Result<SuperOperatorMatrix>
where
    F: HamiltonianFamily + ?Sized,
    D: LindbladDissipator + ?Sized,
{
    check_dims(family.dim(), dissipator.dim())?;
    let tracker = SpectralTracker::new(family, crate::spectral::DEFAULT_DEGENERACY_TOL)?;
    let dec = tracker.decompose(s)?;
    assemble_approximate(&family.hamiltonian(s), &dec, q, dissipator, tensor, run_time, gamma, s)
}

#[allow(clippy::too_many_arguments)]
fn assemble_approximate<D: LindbladDissipator + ?Sized>(
    h: &ComplexMatrix,
    dec: &SpectralDecomposition,
    q: &ComplexMatrix,
    dissipator: &D,
    tensor: &ResonanceTensor,
    run_time: f64,
    gamma: f64,
    s: f64,
) -> Result<SuperOperatorMatrix> {
    if tensor.num_spaces() != dec.num_spaces() {
        return Err(Error::DimensionMismatch { expected: dec.num_spaces(), found: tensor.num_spaces() });
    }
    let coherent = SuperOperatorMatrix::commutator(&(&h.scale_real(run_time) + q))?;
    if gamma == 0.0 {
        return Ok(coherent);
    }
    let filtered = filtered_dissipator(&dissipator.superoperator(s)?, dec, tensor)?;
    Ok(&coherent + &filtered.scale_real(gamma * run_time))
}

/// The approximate generator as a function of s, with Q(s) from the
/// family's projector derivatives.
pub struct ApproximateGenerator<'a, F: ?Sized, D: ?Sized> {
    tracker: SpectralTracker<'a, F>,
    dissipator: &'a D,
    tensor: &'a ResonanceTensor,
    run_time: f64,
    gamma: f64,
}

impl<'a, F, D> ApproximateGenerator<'a, F, D>
where
    F: HamiltonianFamily + ?Sized,
    D: LindbladDissipator + ?Sized,
{
    pub fn new(
        family: &'a F,
        dissipator: &'a D,
        tensor: &'a ResonanceTensor,
        run_time: f64,
        gamma: f64,
    ) -> Result<Self> {
        check_dims(family.dim(), dissipator.dim())?;
        let tracker = SpectralTracker::new(family, crate::spectral::DEFAULT_DEGENERACY_TOL)?;
        Ok(Self { tracker, dissipator, tensor, run_time, gamma })
    }

    pub fn at(&self, s: f64) -> Result<SuperOperatorMatrix> {
        let dec = self.tracker.decompose(s)?;
        let q = self.tracker.geometric_term(s)?;
        let h = self.tracker.family().hamiltonian(s);
        assemble_approximate(&h, &dec, &q, self.dissipator, self.tensor, self.run_time, self.gamma, s)
    }
}
