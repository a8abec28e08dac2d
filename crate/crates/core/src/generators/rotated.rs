//! The approximate equation in the transport frame ρ̃ = UρU†, written in the
//! coordinates of the reference eigenbasis B(0): ρ^a = B(s)† ρ B(s).
//!
//! Block (k, l) obeys
//! dρ̃^(kl)/ds = −iTΔ_kl ρ̃^(kl) − iZ_k ρ̃^(kl) + iρ̃^(kl) Z_l + ΓT Σ g_klk'l' P_k(0) D̃(ρ̃^(k'l')) P_l(0),
//! so a set of blocks closed under g evolves on its own.

use num_complex::Complex64 as C64;

use super::{check_dims, LindbladDissipator};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, SuperOperatorMatrix, ZERO};
use crate::resonance::ResonanceTensor;
use crate::spectral::TransportFrame;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BlockSet {
    /// Every (k, k) block.
    Diagonal,
    /// The whole operator space.
    All,
    Blocks(Vec<(usize, usize)>),
}

impl BlockSet {
    fn blocks(&self, k_count: usize) -> Vec<(usize, usize)> {
        match self {
            Self::Diagonal => (0..k_count).map(|k| (k, k)).collect(),
            Self::All => (0..k_count).flat_map(|k| (0..k_count).map(move |l| (k, l))).collect(),
            Self::Blocks(b) => b.clone(),
        }
    }
}

/// A generator restricted to selected matrix elements (i, j) of ρ^a.
#[derive(Clone, Debug)]
pub struct BlockGenerator {
    pub indices: Vec<(usize, usize)>,
    pub matrix: ComplexMatrix,
}

/// Matrix elements covered by `blocks`: blocks ordered by their first element
/// in column-stacking order, column-stacked within each block.
pub(crate) fn block_indices(labels: &[usize], blocks: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let d = labels.len();
    let mut groups: Vec<Vec<(usize, usize)>> = blocks
        .iter()
        .map(|&(k, l)| {
            let mut v: Vec<(usize, usize)> = (0..d)
                .flat_map(|j| (0..d).map(move |i| (i, j)))
                .filter(|&(i, j)| labels[i] == k && labels[j] == l)
                .collect();
            v.sort_by_key(|&(i, j)| i + d * j);
            v
        })
        .filter(|v| !v.is_empty())
        .collect();
    groups.sort_by_key(|v| v[0].0 + d * v[0].1);
    groups.into_iter().flatten().collect()
}

impl BlockGenerator {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// The selected entries of ρ^a, in generator order.
    pub fn extract(&self, rho: &ComplexMatrix) -> Vec<C64> {
        self.indices.iter().map(|&(i, j)| rho[(i, j)]).collect()
    }

    /// A d×d matrix holding `values` at the selected entries and zero elsewhere.
    pub fn embed(&self, values: &[C64], dim: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (&(i, j), v) in self.indices.iter().zip(values) {
            m[(i, j)] = *v;
        }
        m
    }
}

fn check_closed(tensor: &ResonanceTensor, blocks: &[(usize, usize)]) -> Result<()> {
    for &(k, l) in blocks {
        for (kp, lp) in tensor.coupled_blocks(k, l) {
            if !blocks.contains(&(kp, lp)) {
                return Err(Error::BlockNotClosed { k, l, kp, lp });
            }
        }
    }
    Ok(())
}

/// Generator of ρ^a restricted to `block_set`, at a sample of the frame grid.
#[allow(clippy::too_many_arguments)]
pub fn rotated_block_generator<D: LindbladDissipator + ?Sized>(
    dissipator: &D,
    tensor: &ResonanceTensor,
    frame: &TransportFrame,
    run_time: f64,
    gamma: f64,
    s: f64,
    block_set: &BlockSet,
) -> Result<BlockGenerator> {
    RotatedGenerator::new(dissipator, tensor, frame, run_time, gamma, block_set.clone())?.at(s)
}

/// [`rotated_block_generator`] as a function of s.
pub struct RotatedGenerator<'a, D: ?Sized> {
    dissipator: &'a D,
    tensor: &'a ResonanceTensor,
    frame: &'a TransportFrame,
    run_time: f64,
    gamma: f64,
    indices: Vec<(usize, usize)>,
}

impl<'a, D: LindbladDissipator + ?Sized> RotatedGenerator<'a, D> {
    pub fn new(
        dissipator: &'a D,
        tensor: &'a ResonanceTensor,
        frame: &'a TransportFrame,
        run_time: f64,
        gamma: f64,
        block_set: BlockSet,
    ) -> Result<Self> {
        check_dims(frame.dim(), dissipator.dim())?;
        if tensor.num_spaces() != frame.num_spaces() {
            return Err(Error::DimensionMismatch { expected: frame.num_spaces(), found: tensor.num_spaces() });
        }
        let blocks = block_set.blocks(tensor.num_spaces());
        check_closed(tensor, &blocks)?;
        let indices = block_indices(frame.labels(), &blocks);
        Ok(Self { dissipator, tensor, frame, run_time, gamma, indices })
    }

    pub fn indices(&self) -> &[(usize, usize)] {
        &self.indices
    }

    pub fn frame(&self) -> &TransportFrame {
        self.frame
    }

    /// The generator on all d² entries of ρ^a, column-stacked.
    pub fn full_at(&self, s: f64) -> Result<SuperOperatorMatrix> {
        let i = self.frame.index_of(s)?;
        let labels = self.frame.labels();
        let d = labels.len();
        let energies = self.frame.energies(i);
        let z = self.frame.generator_in_reference_basis(i);
        let mut coherent = ComplexMatrix::from_fn(d, d, |a, b| if labels[a] == labels[b] { z[(a, b)] } else { ZERO });
        for a in 0..d {
            coherent[(a, a)] += C64::new(self.run_time * energies[labels[a]], 0.0);
        }
        let mut out = SuperOperatorMatrix::commutator(&coherent)?;
        if self.gamma != 0.0 {
            let rotated = self.dissipator.superoperator(s)?.in_basis(self.frame.basis(i))?;
            let masked = super::mask_by_tensor(rotated.matrix(), labels, self.tensor);
            out = &out + &SuperOperatorMatrix::new(d, masked)?.scale_real(self.gamma * self.run_time);
        }
        Ok(out)
    }

    pub fn at(&self, s: f64) -> Result<BlockGenerator> {
        let full = self.full_at(s)?;
        let d = self.frame.dim();
        let pos: Vec<usize> = self.indices.iter().map(|&(i, j)| i + d * j).collect();
        let m = full.matrix();
        let matrix = ComplexMatrix::from_fn(pos.len(), pos.len(), |r, c| m[(pos[r], pos[c])]);
        Ok(BlockGenerator { indices: self.indices.clone(), matrix })
    }
}
