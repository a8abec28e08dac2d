//! Instantaneous spectral structure of a Hamiltonian family `H(s)`, s ∈ [0, 1].
//!
//! Eigenspaces are labelled by ascending energy. Since the eigenvalues of
//! distinct eigenspaces never cross, this labelling is continuous in `s`;
//! [`track_labels`] re-derives it from projector overlaps as a check.

mod frame;

pub use frame::{build_transport_frame, BasisChoice, FrameOptions, TransportFrame};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigendecompose, ComplexMatrix, I};

pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-8;
pub const DEFAULT_DERIVATIVE_STEP: f64 = 1e-4;

/// Tolerance for accepting H(s) as Hermitian before diagonalizing.
const HERMITIAN_TOL: f64 = 1e-10;

/// A family of Hermitian operators parametrized by scaled time s ∈ [0, 1].
pub trait HamiltonianFamily: Send + Sync {
    fn dim(&self) -> usize;

    fn hamiltonian(&self, s: f64) -> ComplexMatrix;

    /// Closed-form orthonormal eigenbasis, or `Ok(None)` if the model has none.
    fn analytic_eigenbasis(&self, _s: f64) -> Result<Option<Eigenbasis>> {
        Ok(None)
    }

    /// Interior points where `H(s)` is continuous but not smooth.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl<F: HamiltonianFamily + ?Sized> HamiltonianFamily for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn hamiltonian(&self, s: f64) -> ComplexMatrix {
        (**self).hamiltonian(s)
    }

    fn analytic_eigenbasis(&self, s: f64) -> Result<Option<Eigenbasis>> {
        (**self).analytic_eigenbasis(s)
    }

    fn breakpoints(&self) -> Vec<f64> {
        (**self).breakpoints()
    }
}

impl<F: HamiltonianFamily + ?Sized> HamiltonianFamily for std::sync::Arc<F> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn hamiltonian(&self, s: f64) -> ComplexMatrix {
        (**self).hamiltonian(s)
    }

    fn analytic_eigenbasis(&self, s: f64) -> Result<Option<Eigenbasis>> {
        (**self).analytic_eigenbasis(s)
    }

    fn breakpoints(&self) -> Vec<f64> {
        (**self).breakpoints()
    }
}

/// Eigenvectors (columns) with their energies, in no particular order.
#[derive(Clone, Debug)]
pub struct Eigenbasis {
    pub energies: Vec<f64>,
    pub vectors: ComplexMatrix,
}

/// H(s) = Σ_k E_k P_k with eigenspaces labelled by ascending energy.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub energies: Vec<f64>,
    pub projectors: Vec<ComplexMatrix>,
    pub ranks: Vec<usize>,
    /// Orthonormal eigenvectors grouped by label.
    pub basis: ComplexMatrix,
    /// Eigenspace label of each column of `basis`.
    pub labels: Vec<usize>,
}

impl SpectralDecomposition {
    pub fn num_spaces(&self) -> usize {
        self.energies.len()
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    /// Largest violation of P_k P_l = δ_kl P_k and Σ P_k = 1 (Frobenius).
    pub fn projector_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        let mut sum = ComplexMatrix::zeros(d, d);
        for (k, pk) in self.projectors.iter().enumerate() {
            sum += pk;
            for (l, pl) in self.projectors.iter().enumerate() {
                let prod = pk.matmul(pl);
                let target = if k == l { pk.clone() } else { ComplexMatrix::zeros(d, d) };
                worst = worst.max(prod.distance(&target));
            }
        }
        worst.max(sum.distance(&ComplexMatrix::identity(d)))
    }

    /// Σ_k E_k P_k.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut h = ComplexMatrix::zeros(d, d);
        for (e, p) in self.energies.iter().zip(&self.projectors) {
            h += &p.scale_real(*e);
        }
        h
    }

    /// Columns of `basis` belonging to eigenspace `k`.
    pub fn columns_of(&self, k: usize) -> Vec<usize> {
        (0..self.labels.len()).filter(|&c| self.labels[c] == k).collect()
    }

    fn from_eigenbasis(basis: Eigenbasis, s: f64, tol: f64) -> Result<Self> {
        let n = basis.energies.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| basis.energies[a].total_cmp(&basis.energies[b]));
        let sorted: Vec<f64> = order.iter().map(|&c| basis.energies[c]).collect();

        let mut labels = vec![0usize; n];
        let mut label = 0;
        for c in 1..n {
            let gap = sorted[c] - sorted[c - 1];
            if gap >= tol {
                label += 1;
            } else if gap > 0.1 * tol {
                return Err(Error::AmbiguousClustering { s, gap });
            }
            labels[c] = label;
        }
        let k_count = label + 1;
        let vectors = basis.vectors.select_columns(&order);
        let d = vectors.rows();

        let mut energies = vec![0.0; k_count];
        let mut ranks = vec![0usize; k_count];
        let mut projectors = vec![ComplexMatrix::zeros(d, d); k_count];
        for c in 0..n {
            let k = labels[c];
            energies[k] += sorted[c];
            ranks[k] += 1;
            let v = vectors.column(c);
            projectors[k] += &ComplexMatrix::outer(&v, &v);
        }
        for k in 0..k_count {
            energies[k] /= ranks[k] as f64;
        }
        Ok(Self { energies, projectors, ranks, basis: vectors, labels })
    }
}

fn raw_decomposition<F: HamiltonianFamily + ?Sized>(
    family: &F,
    s: f64,
    tol: f64,
) -> Result<SpectralDecomposition> {
    let basis = match family.analytic_eigenbasis(s)? {
        Some(b) => b,
        None => {
            let eig = hermitian_eigendecompose(&family.hamiltonian(s), HERMITIAN_TOL)?;
            Eigenbasis { energies: eig.values, vectors: eig.vectors }
        }
    };
    SpectralDecomposition::from_eigenbasis(basis, s, tol)
}

/// Eigenspace decomposition of `H(s)`.
///
/// Fails with [`Error::DegeneracyChange`] if the number of distinct
/// eigenvalues differs from the one at s = 0.
pub fn decompose_at<F: HamiltonianFamily + ?Sized>(
    family: &F,
    s: f64,
    degeneracy_tol: f64,
) -> Result<SpectralDecomposition> {
    SpectralTracker::new(family, degeneracy_tol)?.decompose(s)
}

/// Finite-difference settings for s-derivatives.
#[derive(Clone, Copy, Debug)]
pub struct Differentiator {
    pub step: f64,
    /// Combine steps h and h/2 to cancel the leading h² error term.
    pub richardson: bool,
}

impl Default for Differentiator {
    fn default() -> Self {
        Self { step: DEFAULT_DERIVATIVE_STEP, richardson: true }
    }
}

impl Differentiator {
    pub fn plain(step: f64) -> Self {
        Self { step, richardson: false }
    }

    /// Picks a stencil that stays inside the smooth piece containing `s`,
    /// then evaluates `f` at the stencil nodes.
    pub fn derivative<T, E>(
        &self,
        s: f64,
        breakpoints: &[f64],
        mut eval: impl FnMut(f64) -> std::result::Result<T, E>,
        combine: impl Fn(&[(f64, T)], f64) -> T,
        lincomb: impl Fn(&T, f64, &T, f64) -> T,
    ) -> std::result::Result<T, E> {
        let (lo, hi) = smooth_piece(s, breakpoints);
        let mut h = self.step;
        if hi - lo < 4.0 * h {
            h = (hi - lo) / 4.0;
        }
        let mut single = |h: f64| -> std::result::Result<T, E> {
            let stencil: Vec<(f64, f64)> = if s - h >= lo && s + h <= hi {
                vec![(s - h, -0.5), (s + h, 0.5)]
            } else if s + 2.0 * h <= hi {
                vec![(s, -1.5), (s + h, 2.0), (s + 2.0 * h, -0.5)]
            } else {
                vec![(s, 1.5), (s - h, -2.0), (s - 2.0 * h, 0.5)]
            };
            let mut samples = Vec::with_capacity(stencil.len());
            for &(x, w) in &stencil {
                samples.push((w, eval(x)?));
            }
            Ok(combine(&samples, h))
        };
        let coarse = single(h)?;
        if !self.richardson {
            return Ok(coarse);
        }
        let fine = single(h / 2.0)?;
        Ok(lincomb(&fine, 4.0 / 3.0, &coarse, -1.0 / 3.0))
    }

    pub fn matrix_derivative(
        &self,
        s: f64,
        breakpoints: &[f64],
        eval: impl FnMut(f64) -> Result<ComplexMatrix>,
    ) -> Result<ComplexMatrix> {
        self.derivative(
            s,
            breakpoints,
            eval,
            |samples, h| {
                let mut acc = samples[0].1.scale_real(samples[0].0 / h);
                for (w, m) in &samples[1..] {
                    acc += &m.scale_real(w / h);
                }
                acc
            },
            |a, wa, b, wb| &a.scale_real(wa) + &b.scale_real(wb),
        )
    }
}

/// The interval between consecutive breakpoints (or 0, 1) containing `s`.
/// A point exactly on a breakpoint belongs to the piece on its right.
pub(crate) fn smooth_piece(s: f64, breakpoints: &[f64]) -> (f64, f64) {
    let mut lo: f64 = 0.0;
    let mut hi: f64 = 1.0;
    for &b in breakpoints {
        if b <= 0.0 || b >= 1.0 {
            continue;
        }
        if b <= s {
            lo = lo.max(b);
        } else {
            hi = hi.min(b);
        }
    }
    (lo, hi)
}

/// A family bundled with its s = 0 eigenspace count and numerical settings.
pub struct SpectralTracker<'a, F: ?Sized> {
    family: &'a F,
    degeneracy_tol: f64,
    differentiator: Differentiator,
    reference: SpectralDecomposition,
    breakpoints: Vec<f64>,
}

impl<'a, F: HamiltonianFamily + ?Sized> SpectralTracker<'a, F> {
    pub fn new(family: &'a F, degeneracy_tol: f64) -> Result<Self> {
        let reference = raw_decomposition(family, 0.0, degeneracy_tol)?;
        Ok(Self {
            family,
            degeneracy_tol,
            differentiator: Differentiator::default(),
            reference,
            breakpoints: family.breakpoints(),
        })
    }

    pub fn with_differentiator(mut self, differentiator: Differentiator) -> Self {
        self.differentiator = differentiator;
        self
    }

    pub fn family(&self) -> &'a F {
        self.family
    }

    pub fn reference(&self) -> &SpectralDecomposition {
        &self.reference
    }

    pub fn num_spaces(&self) -> usize {
        self.reference.num_spaces()
    }

    pub fn degeneracy_tol(&self) -> f64 {
        self.degeneracy_tol
    }

    pub fn decompose(&self, s: f64) -> Result<SpectralDecomposition> {
        let dec = raw_decomposition(self.family, s, self.degeneracy_tol)?;
        if dec.num_spaces() != self.reference.num_spaces() || dec.ranks != self.reference.ranks {
            return Err(Error::DegeneracyChange {
                expected: self.reference.num_spaces(),
                found: dec.num_spaces(),
                s,
            });
        }
        Ok(dec)
    }

    /// dP_k/ds for every label k.
    pub fn projector_derivatives(&self, s: f64) -> Result<Vec<ComplexMatrix>> {
        let k_count = self.num_spaces();
        let d = self.family.dim();
        // Differentiate the block-stacked matrix diag(P_1, …, P_K) in one pass.
        let stacked = self.differentiator.matrix_derivative(s, &self.breakpoints, |x| {
            let dec = self.decompose(x)?;
            let mut m = ComplexMatrix::zeros(k_count * d, d);
            for (k, p) in dec.projectors.iter().enumerate() {
                for i in 0..d {
                    for j in 0..d {
                        m[(k * d + i, j)] = p[(i, j)];
                    }
                }
            }
            Ok(m)
        })?;
        Ok((0..k_count)
            .map(|k| ComplexMatrix::from_fn(d, d, |i, j| stacked[(k * d + i, j)]))
            .collect())
    }

    /// Q(s) = i Σ_k Ṗ_k P_k.
    pub fn geometric_term(&self, s: f64) -> Result<ComplexMatrix> {
        let dec = self.decompose(s)?;
        let dots = self.projector_derivatives(s)?;
        Ok(assemble_geometric_term(&dec.projectors, &dots))
    }
}

pub(crate) fn assemble_geometric_term(projectors: &[ComplexMatrix], dots: &[ComplexMatrix]) -> ComplexMatrix {
    let d = projectors[0].rows();
    let mut q = ComplexMatrix::zeros(d, d);
    for (p, pdot) in projectors.iter().zip(dots) {
        q += &pdot.matmul(p);
    }
    q.scale(I)
}

/// Plain central-difference projector derivatives with step `h`
/// (one-sided at the ends of smooth pieces).
pub fn projector_derivative<F: HamiltonianFamily + ?Sized>(
    family: &F,
    s: f64,
    h: f64,
) -> Result<Vec<ComplexMatrix>> {
    SpectralTracker::new(family, DEFAULT_DEGENERACY_TOL)?
        .with_differentiator(Differentiator::plain(h))
        .projector_derivatives(s)
}

/// Q(s) = i Σ_k Ṗ_k P_k with plain central differences of step `h`.
pub fn geometric_term<F: HamiltonianFamily + ?Sized>(family: &F, s: f64, h: f64) -> Result<ComplexMatrix> {
    SpectralTracker::new(family, DEFAULT_DEGENERACY_TOL)?
        .with_differentiator(Differentiator::plain(h))
        .geometric_term(s)
}

/// Decomposes `H` along `grid`, fixing labels at the first sample by energy and
/// carrying them forward by maximal projector overlap `Tr(P_k(prev) P_j(cur))`.
pub fn track_labels<F: HamiltonianFamily + ?Sized>(
    family: &F,
    grid: &[f64],
    degeneracy_tol: f64,
) -> Result<Vec<SpectralDecomposition>> {
    let tracker = SpectralTracker::new(family, degeneracy_tol)?;
    let mut out: Vec<SpectralDecomposition> = Vec::with_capacity(grid.len());
    for &s in grid {
        let dec = tracker.decompose(s)?;
        let dec = match out.last() {
            None => dec,
            Some(prev) => relabel_by_overlap(prev, dec),
        };
        out.push(dec);
    }
    Ok(out)
}

fn relabel_by_overlap(prev: &SpectralDecomposition, cur: SpectralDecomposition) -> SpectralDecomposition {
    let k_count = cur.num_spaces();
    let overlap: Vec<Vec<f64>> = (0..k_count)
        .map(|k| (0..k_count).map(|j| prev.projectors[k].matmul(&cur.projectors[j]).trace().re).collect())
        .collect();
    // new label k is assigned old label perm[k]
    let perm = best_assignment(&overlap);
    let mut energies = vec![0.0; k_count];
    let mut ranks = vec![0; k_count];
    let mut projectors = vec![ComplexMatrix::zeros(1, 1); k_count];
    for (k, &j) in perm.iter().enumerate() {
        energies[k] = cur.energies[j];
        ranks[k] = cur.ranks[j];
        projectors[k] = cur.projectors[j].clone();
    }
    let mut inverse = vec![0; k_count];
    for (k, &j) in perm.iter().enumerate() {
        inverse[j] = k;
    }
    let mut columns: Vec<usize> = (0..cur.labels.len()).collect();
    columns.sort_by_key(|&c| inverse[cur.labels[c]]);
    let basis = cur.basis.select_columns(&columns);
    let labels = columns.iter().map(|&c| inverse[cur.labels[c]]).collect();
    SpectralDecomposition { energies, projectors, ranks, basis, labels }
}

/// Permutation maximizing Σ_k overlap[k][perm[k]].
fn best_assignment(overlap: &[Vec<f64>]) -> Vec<usize> {
    let n = overlap.len();
    let mut best = (f64::NEG_INFINITY, (0..n).collect::<Vec<_>>());
    let mut perm: Vec<usize> = (0..n).collect();
    permute(&mut perm, 0, &mut |p| {
        let score: f64 = p.iter().enumerate().map(|(k, &j)| overlap[k][j]).sum();
        if score > best.0 {
            best = (score, p.to_vec());
        }
    });
    best.1
}

fn permute(p: &mut Vec<usize>, start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == p.len() {
        visit(p);
        return;
    }
    for i in start..p.len() {
        p.swap(start, i);
        permute(p, start + 1, visit);
        p.swap(start, i);
    }
}

/// Unitary factor W of the polar decomposition O = W·|O| of a square matrix.
pub(crate) fn polar_unitary(o: &ComplexMatrix) -> Result<ComplexMatrix> {
    if o.rows() == 1 {
        let z = o[(0, 0)];
        let r = z.norm();
        let phase = if r > 0.0 { z / r } else { C64::new(1.0, 0.0) };
        return Ok(ComplexMatrix::diagonal(&[phase]));
    }
    let gram = o.adjoint().matmul(o);
    let eig = hermitian_eigendecompose(&gram.hermitian_part(), 1e-8)?;
    let inv_sqrt = eig.reconstruct_with(|x| if x > 1e-300 { 1.0 / x.sqrt() } else { 0.0 });
    Ok(o.matmul(&inv_sqrt))
}
