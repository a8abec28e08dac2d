//! Four-level Λ-type system: ground states |0⟩, |1⟩, |a⟩ coupled to |e⟩ by
//! H = |e⟩(ω₀⟨0| + ω₁⟨1| + ω_a⟨a|) + h.c. with
//! (ω₀, ω₁, ω_a) = (sinθ sinφ, sinθ cosφ, cosθ).
//!
//! Energies are in units of ω = 1. The dark (zero-energy) subspace is two
//! dimensional; the bright states have energies ±1. Eigenspace labels follow
//! ascending energy: 0 ↔ −1, 1 ↔ dark, 2 ↔ +1.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::spectral::{Eigenbasis, HamiltonianFamily};

pub const STATE_0: usize = 0;
pub const STATE_1: usize = 1;
pub const STATE_A: usize = 2;
pub const STATE_E: usize = 3;

/// Labels of the eigenspaces.
pub const LABEL_MINUS: usize = 0;
pub const LABEL_DARK: usize = 1;
pub const LABEL_PLUS: usize = 2;

/// Energies of the basis vectors χ₁…χ₄.
pub const BASIS_ENERGIES: [f64; 4] = [0.0, 0.0, 1.0, -1.0];

/// Distance from the south pole below which the north-pole gauge is refused.
const SOUTH_POLE_TOL: f64 = 1e-9;

pub fn holonomy_hamiltonian(theta: f64, phi: f64) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(4, 4);
    let couplings = [
        (STATE_0, theta.sin() * phi.sin()),
        (STATE_1, theta.sin() * phi.cos()),
        (STATE_A, theta.cos()),
    ];
    for (g, w) in couplings {
        h[(STATE_E, g)] = C64::new(w, 0.0);
        h[(g, STATE_E)] = C64::new(w, 0.0);
    }
    h
}

/// Choice of dark-state basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gauge {
    /// χ₁ = cosφ|0⟩ − sinφ|1⟩, χ₂ = cosθ(sinφ|0⟩ + cosφ|1⟩) − sinθ|a⟩.
    /// The connection is singular at both poles.
    EquatorRegular,
    /// The dark pair rotated by angle φ, which removes the singularity at the
    /// north pole: at θ = 0 it is (|0⟩, |1⟩) for every φ.
    NorthPoleRegular,
}

/// Columns χ₁…χ₄: two dark states, then the bright states with energy +1 and −1.
pub fn analytic_eigenbasis(theta: f64, phi: f64, gauge: Gauge) -> Result<ComplexMatrix> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let mut chi1 = [cp, -sp, 0.0, 0.0];
    let mut chi2 = [sp * ct, cp * ct, -st, 0.0];
    if gauge == Gauge::NorthPoleRegular {
        if (theta - std::f64::consts::PI).abs() < SOUTH_POLE_TOL {
            return Err(Error::GaugeSingularity { theta, phi });
        }
        let r1: Vec<f64> = (0..4).map(|i| cp * chi1[i] + sp * chi2[i]).collect();
        let r2: Vec<f64> = (0..4).map(|i| -sp * chi1[i] + cp * chi2[i]).collect();
        chi1.copy_from_slice(&r1);
        chi2.copy_from_slice(&r2);
    }
    let n = [st * sp, st * cp, ct];
    let chi3 = [n[0] * FRAC_1_SQRT_2, n[1] * FRAC_1_SQRT_2, n[2] * FRAC_1_SQRT_2, FRAC_1_SQRT_2];
    let chi4 = [n[0] * FRAC_1_SQRT_2, n[1] * FRAC_1_SQRT_2, n[2] * FRAC_1_SQRT_2, -FRAC_1_SQRT_2];
    let cols = [chi1, chi2, chi3, chi4];
    Ok(ComplexMatrix::from_fn(4, 4, |i, j| C64::new(cols[j][i], 0.0)))
}

/// A path s ↦ (θ(s), φ(s)) on the parameter sphere.
pub trait SpherePath: Send + Sync {
    fn angles(&self, s: f64) -> (f64, f64);

    /// Points in (0, 1) where the path has a corner.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// The "orange slice" loop
/// (θ, φ) = (0, 0) → (π/2, 0) → (π/2, δφ) → (0, δφ) → (0, 0)
/// with run-time fractions `split` for the four segments.
#[derive(Clone, Debug, PartialEq)]
pub struct HolonomyPath {
    pub delta_phi: f64,
    pub run_time: f64,
    pub split: [f64; 4],
    /// Vertices (θ, φ) in visiting order, first repeated at the end.
    vertices: [(f64, f64); 5],
    /// Cumulative split fractions, starting at 0 and ending at 1.
    cumulative: [f64; 5],
}

pub fn build_orange_path(delta_phi: f64, run_time: f64, split: [f64; 4]) -> Result<HolonomyPath> {
    if !(0.0..2.0 * std::f64::consts::PI).contains(&delta_phi) {
        return Err(Error::InvalidArgument(format!("δφ = {delta_phi} outside [0, 2π)")));
    }
    if split.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(Error::BadSplit { reason: format!("negative or non-finite fraction in {split:?}") });
    }
    let total: f64 = split.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::BadSplit { reason: format!("fractions sum to {total}, not 1") });
    }
    let mut cumulative = [0.0; 5];
    for i in 0..4 {
        cumulative[i + 1] = cumulative[i] + split[i];
    }
    cumulative[4] = 1.0;
    Ok(HolonomyPath {
        delta_phi,
        run_time,
        split,
        vertices: [(0.0, 0.0), (FRAC_PI_2, 0.0), (FRAC_PI_2, delta_phi), (0.0, delta_phi), (0.0, 0.0)],
        cumulative,
    })
}

impl HolonomyPath {
    /// A zero opening angle encloses no solid angle; the holonomy is trivial.
    pub fn is_degenerate(&self) -> bool {
        self.delta_phi == 0.0
    }

    /// (T₁, T₂, T₃, T₄).
    pub fn segment_runtimes(&self) -> [f64; 4] {
        self.split.map(|x| x * self.run_time)
    }

    /// Segment containing s; a point on a segment boundary belongs to the later segment.
    fn segment(&self, s: f64) -> usize {
        let mut seg = 0;
        for i in 0..4 {
            if self.split[i] > 0.0 && s >= self.cumulative[i] {
                seg = i;
            }
        }
        seg
    }

    /// (dθ/ds, dφ/ds) on the segment containing s.
    pub fn rates(&self, s: f64) -> (f64, f64) {
        let i = self.segment(s);
        let (a, b) = (self.vertices[i], self.vertices[i + 1]);
        ((b.0 - a.0) / self.split[i], (b.1 - a.1) / self.split[i])
    }
}

impl SpherePath for HolonomyPath {
    fn angles(&self, s: f64) -> (f64, f64) {
        let s = s.clamp(0.0, 1.0);
        let i = self.segment(s);
        let (a, b) = (self.vertices[i], self.vertices[i + 1]);
        let t = ((s - self.cumulative[i]) / self.split[i]).clamp(0.0, 1.0);
        (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1))
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.cumulative[1..4].iter().copied().filter(|&c| c > 0.0 && c < 1.0).collect();
        out.dedup();
        out
    }
}

/// A smooth loop that passes through the north pole twice, swinging in the
/// (ω₁, ω_a) plane: n(s) = (0, sin β, cos β) with β = A·sin(2πs).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarLoop {
    pub amplitude: f64,
}

impl SpherePath for PolarLoop {
    fn angles(&self, s: f64) -> (f64, f64) {
        let beta = self.amplitude * (2.0 * std::f64::consts::PI * s).sin();
        let n = [0.0, beta.sin(), beta.cos()];
        let theta = n[2].clamp(-1.0, 1.0).acos();
        // atan2 of a signed zero would flip φ at the pole itself
        let phi = if n[1] >= 0.0 { 0.0 } else { std::f64::consts::PI };
        (theta, phi)
    }
}

/// H(s) along a path, with the analytic eigenbasis in a fixed gauge.
#[derive(Clone, Debug)]
pub struct HolonomyFamily<P> {
    pub path: P,
    pub gauge: Gauge,
}

impl<P: SpherePath> HolonomyFamily<P> {
    pub fn new(path: P, gauge: Gauge) -> Self {
        Self { path, gauge }
    }

    pub fn basis(&self, s: f64) -> Result<ComplexMatrix> {
        let (theta, phi) = self.path.angles(s);
        analytic_eigenbasis(theta, phi, self.gauge)
    }
}

impl<P: SpherePath> HamiltonianFamily for HolonomyFamily<P> {
    fn dim(&self) -> usize {
        4
    }

    fn hamiltonian(&self, s: f64) -> ComplexMatrix {
        let (theta, phi) = self.path.angles(s);
        holonomy_hamiltonian(theta, phi)
    }

    fn analytic_eigenbasis(&self, s: f64) -> Result<Option<Eigenbasis>> {
        Ok(Some(Eigenbasis { energies: BASIS_ENERGIES.to_vec(), vectors: self.basis(s)? }))
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.path.breakpoints()
    }
}

/// The dephasing jump operator |a⟩⟨a|.
pub fn ancilla_projector() -> ComplexMatrix {
    let mut v = ComplexMatrix::zeros(4, 4);
    v[(STATE_A, STATE_A)] = C64::new(1.0, 0.0);
    v
}

/// Projector onto span{|0⟩, |1⟩}.
pub fn computational_projector() -> ComplexMatrix {
    ComplexMatrix::real_diagonal(&[1.0, 1.0, 0.0, 0.0])
}

/// cos(x/2)|0⟩ + e^{−iy} sin(x/2)|1⟩.
pub fn input_state(x: f64, y: f64) -> Vec<C64> {
    vec![
        C64::new((x / 2.0).cos(), 0.0),
        C64::from_polar((x / 2.0).sin(), -y),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
    ]
}

/// exp(−Ω(|0⟩⟨1| − |1⟩⟨0|)) on span{|0⟩, |1⟩}.
pub fn holonomy_gate(omega: f64) -> ComplexMatrix {
    let (s, c) = omega.sin_cos();
    ComplexMatrix::from_real_rows(&[&[c, -s], &[s, c]])
}

/// M^a(s) in the equator gauge, acting on
/// (ρ^a₁₁, ρ^a₁₂, ρ^a₂₁, ρ^a₂₂, ρ^a₃₃, ρ^a₄₄).
pub fn approximate_block_matrix(path: &HolonomyPath, gamma: f64, run_time: f64, s: f64) -> ComplexMatrix {
    let (theta, _) = path.angles(s);
    let (_, phi_rate) = path.rates(s);
    let (st, ct) = theta.sin_cos();
    let (s2, c2) = (st * st, ct * ct);
    let gt = gamma * run_time;
    let w = phi_rate * ct;
    let f = gt * s2 * c2;
    let g = gt * (1.0 + s2) * c2;
    let c4 = gt * c2 * c2 / 4.0;
    let h = -gt / 2.0 * s2;
    ComplexMatrix::from_real_rows(&[
        &[0.0, -w, -w, 0.0, 0.0, 0.0],
        &[w, h, 0.0, -w, 0.0, 0.0],
        &[w, 0.0, h, -w, 0.0, 0.0],
        &[0.0, w, w, -f, f / 2.0, f / 2.0],
        &[0.0, 0.0, 0.0, f / 2.0, -g / 4.0, c4],
        &[0.0, 0.0, 0.0, f / 2.0, c4, -g / 4.0],
    ])
}

/// Dark-coherence factor and dark-population factor of the approximate output.
pub fn output_factors(x: f64, y: f64, gamma: f64, t: [f64; 3]) -> (C64, f64) {
    let [t1, t2, t3] = t;
    let f1 = C64::from_polar(0.5 * x.sin() * (-0.25 * gamma * (t3 + 2.0 * t2 + t1)).exp(), -y);
    let f2 = 1.0 / 3.0 + 2.0 / 3.0 * (-3.0 / 16.0 * gamma * (t3 + t1)).exp();
    (f1, f2)
}

/// Computational block of the approximate output for the input state
/// cos(x/2)|0⟩ + e^{−iy} sin(x/2)|1⟩ after the orange-slice loop with T₄ = 0.
///
/// The dark block in the initial eigenbasis is ρ' with ρ'₂₁ = f₁ and
/// ρ'₂₂ = (1 − cos x)/2 · f₂. The loop traverses the slice so that the
/// solid angle is −δφ, and the output is u(−δφ) ρ' u(−δφ)†.
pub fn closed_form_output(x: f64, y: f64, delta_phi: f64, gamma: f64, t1: f64, t2: f64, t3: f64) -> ComplexMatrix {
    let (f1, f2) = output_factors(x, y, gamma, [t1, t2, t3]);
    let rho = ComplexMatrix::from_rows(&[
        &[C64::new(0.5 + 0.5 * x.cos(), 0.0), f1.conj()],
        &[f1, C64::new((0.5 - 0.5 * x.cos()) * f2, 0.0)],
    ]);
    let u = holonomy_gate(-delta_phi);
    u.matmul(&rho).matmul(&u.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn hamiltonian_at_special_points() {
        let h = holonomy_hamiltonian(0.0, 0.0);
        let mut expected = ComplexMatrix::zeros(4, 4);
        expected[(STATE_E, STATE_A)] = C64::new(1.0, 0.0);
        expected[(STATE_A, STATE_E)] = C64::new(1.0, 0.0);
        assert!(h.distance(&expected) < 1e-15);
        let h = holonomy_hamiltonian(FRAC_PI_2, 0.0);
        assert!((h[(STATE_E, STATE_1)].re - 1.0).abs() < 1e-15);
        assert!(h[(STATE_E, STATE_A)].norm() < 1e-15);
    }

    #[test]
    fn eigenbasis_at_equator_point() {
        let b = analytic_eigenbasis(FRAC_PI_2, 0.0, Gauge::EquatorRegular).unwrap();
        // χ₁ = |0⟩, χ₂ = −|a⟩
        assert!((b[(STATE_0, 0)].re - 1.0).abs() < 1e-15);
        assert!((b[(STATE_A, 1)].re + 1.0).abs() < 1e-15);
        assert!(b[(STATE_1, 1)].norm() < 1e-15);
    }

    #[test]
    fn north_pole_gauge_is_computational_at_the_pole() {
        for phi in [0.0, 0.3, 2.0] {
            let b = analytic_eigenbasis(0.0, phi, Gauge::NorthPoleRegular).unwrap();
            assert!(b.select_columns(&[0, 1]).distance(&ComplexMatrix::identity(4).select_columns(&[0, 1])) < 1e-15);
        }
        assert!(matches!(analytic_eigenbasis(PI, 0.1, Gauge::NorthPoleRegular), Err(Error::GaugeSingularity { .. })));
    }

    #[test]
    fn path_vertices_and_breakpoints() {
        let p = build_orange_path(PI / 4.0, 100.0, [0.4, 0.2, 0.4, 0.0]).unwrap();
        let bps = p.breakpoints();
        assert!(bps.len() == 2 && (bps[0] - 0.4).abs() < 1e-15 && (bps[1] - 0.6).abs() < 1e-15);
        let (t, f) = p.angles(0.2);
        assert!((t - PI / 4.0).abs() < 1e-15 && f == 0.0);
        let (t, f) = p.angles(0.6);
        assert!((t - FRAC_PI_2).abs() < 1e-15 && (f - PI / 4.0).abs() < 1e-15);
        let (t, f) = p.angles(1.0);
        assert!(t.abs() < 1e-15 && (f - PI / 4.0).abs() < 1e-15);
        assert_eq!(p.segment_runtimes(), [40.0, 20.0, 40.0, 0.0]);
        assert!(matches!(build_orange_path(PI / 4.0, 1.0, [0.5, 0.2, 0.4, 0.0]), Err(Error::BadSplit { .. })));
        assert!(build_orange_path(0.0, 1.0, [0.4, 0.2, 0.4, 0.0]).unwrap().is_degenerate());
    }

    #[test]
    fn gate_closed_forms() {
        assert!(holonomy_gate(0.0).distance(&ComplexMatrix::identity(2)) < 1e-15);
        let r = FRAC_1_SQRT_2;
        assert!(holonomy_gate(PI / 4.0).distance(&ComplexMatrix::from_real_rows(&[&[r, -r], &[r, r]])) < 1e-15);
        assert!(holonomy_gate(PI / 2.0).distance(&ComplexMatrix::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]])) < 1e-15);
    }

    #[test]
    fn block_matrix_at_equator_and_pole() {
        let p = build_orange_path(PI / 4.0, 100.0, [0.4, 0.2, 0.4, 0.0]).unwrap();
        let (gamma, t) = (0.1, 100.0);
        let m = approximate_block_matrix(&p, gamma, t, 0.5);
        let expected = ComplexMatrix::real_diagonal(&[0.0, -gamma * t / 2.0, -gamma * t / 2.0, 0.0, 0.0, 0.0]);
        assert!(m.distance(&expected) < 1e-12);
        let m = approximate_block_matrix(&p, gamma, t, 0.0);
        let q = gamma * t / 4.0;
        assert!((m[(4, 4)].re + q).abs() < 1e-12 && (m[(4, 5)].re - q).abs() < 1e-12);
        assert!((m[(5, 5)].re + q).abs() < 1e-12 && (m[(5, 4)].re - q).abs() < 1e-12);
        assert!(m.select_columns(&[0, 1, 2, 3]).max_abs() < 1e-15);
    }

    #[test]
    fn closed_form_is_pure_without_decoherence() {
        let (x, y) = (PI / 5.0, 0.75 * PI);
        let out = closed_form_output(x, y, PI / 4.0, 0.0, 40.0, 20.0, 40.0);
        let psi = input_state(x, y);
        let psi = [psi[0], psi[1]];
        let u = holonomy_gate(-PI / 4.0);
        let v = u.matvec(&psi);
        assert!(out.distance(&ComplexMatrix::outer(&v, &v)) < 1e-15);
        let (f1, f2) = output_factors(x, y, 0.1, [40.0, 20.0, 40.0]);
        assert!((f1.norm() - 0.5 * x.sin() * (-3.0f64).exp()).abs() < 1e-15);
        assert!((f2 - (1.0 / 3.0 + 2.0 / 3.0 * (-1.5f64).exp())).abs() < 1e-15);
    }
}
