//! Gap functions Δ_kl(s) = E_k(s) − E_l(s) and the resonance tensor
//! g_klk'l' ∈ {0, 1}, which is 1 exactly when Δ_kl and Δ_k'l' coincide on all of [0, 1].

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::spectral::{HamiltonianFamily, SpectralDecomposition, SpectralTracker};

pub const DEFAULT_COINCIDE_TOL: f64 = 1e-9;
pub const DEFAULT_GRID_POINTS: usize = 201;
pub const DEFAULT_SLOPE_TOL: f64 = 1e-6;
pub const MIN_GRID_POINTS: usize = 33;

/// Bisection stops once the bracket is shorter than this.
const CROSSING_TOL: f64 = 1e-6;
const SLOPE_STEP: f64 = 1e-5;

#[derive(Clone, Copy, Debug)]
pub struct ResonanceOptions {
    pub coincide_tol: f64,
    pub grid_points: usize,
    pub slope_tol: f64,
}

impl Default for ResonanceOptions {
    fn default() -> Self {
        Self {
            coincide_tol: DEFAULT_COINCIDE_TOL,
            grid_points: DEFAULT_GRID_POINTS,
            slope_tol: DEFAULT_SLOPE_TOL,
        }
    }
}

impl ResonanceOptions {
    pub fn uniform_grid(&self) -> Vec<f64> {
        let n = self.grid_points.max(2);
        (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
    }
}

/// How the graphs of two gap functions relate over [0, 1].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum CaseClass {
    /// Identical everywhere, or never equal.
    CaseI,
    /// Equal only at isolated points, crossing with nonzero slope.
    CaseII,
}

/// An ordered eigenspace index pair (k, l).
pub type Pair = (usize, usize);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Crossing {
    pub pair: (usize, usize),
    pub other: (usize, usize),
    pub s: f64,
    pub slope: f64,
}

#[derive(Clone, Debug)]
pub struct ResonanceTensor {
    k: usize,
    g: Vec<bool>,
    classes: Vec<CaseClass>,
    crossings: Vec<Crossing>,
    partial: Vec<(Pair, Pair)>,
}

/// Δ_kl as a function of s.
pub fn gap_function<D>(decomp_at: D, k: usize, l: usize) -> impl Fn(f64) -> Result<f64>
where
    D: Fn(f64) -> Result<SpectralDecomposition>,
{
    move |s| {
        let dec = decomp_at(s)?;
        let n = dec.num_spaces();
        if k >= n || l >= n {
            return Err(Error::InvalidArgument(format!("label out of range: ({k}, {l}) with K = {n}")));
        }
        Ok(dec.energies[k] - dec.energies[l])
    }
}

/// Builds the tensor from sampled energies.
///
/// `energies_at(s)` returns E_k(s) by label. Gap differences vanishing on a
/// single sample (or changing sign between samples) are refined by bisection
/// and must cross with |slope| ≥ `slope_tol`. Differences vanishing on several
/// consecutive samples without vanishing everywhere are recorded as partial
/// coincidences and get g = 0.
pub fn compute_resonance_tensor<E>(energies_at: E, grid: &[f64], options: ResonanceOptions) -> Result<ResonanceTensor>
where
    E: Fn(f64) -> Result<Vec<f64>>,
{
    if grid.len() < MIN_GRID_POINTS {
        return Err(Error::InvalidArgument(format!(
            "resonance grid needs at least {MIN_GRID_POINTS} samples, got {}",
            grid.len()
        )));
    }
    let samples: Vec<Vec<f64>> = grid.iter().map(|&s| energies_at(s)).collect::<Result<_>>()?;
    let k_count = samples[0].len();
    if samples.iter().any(|e| e.len() != k_count) {
        return Err(Error::DegeneracyChange { expected: k_count, found: 0, s: f64::NAN });
    }

    let idx = |k: usize, l: usize, kp: usize, lp: usize| ((k * k_count + l) * k_count + kp) * k_count + lp;
    let total = k_count.pow(4);
    let mut g = vec![false; total];
    let mut classes = vec![CaseClass::CaseI; total];
    let mut crossings = Vec::new();
    let mut partial = Vec::new();
    let tol = options.coincide_tol;

    for k in 0..k_count {
        for l in 0..k_count {
            for kp in 0..k_count {
                for lp in 0..k_count {
                    let diff_at = |e: &[f64]| (e[k] - e[l]) - (e[kp] - e[lp]);
                    let diffs: Vec<f64> = samples.iter().map(|e| diff_at(e)).collect();
                    let here = idx(k, l, kp, lp);
                    if diffs.iter().all(|d| d.abs() <= tol) {
                        g[here] = true;
                        continue;
                    }
                    // Only the canonical ordering of the unordered pair records crossings.
                    let record = (k, l) < (kp, lp);
                    let eval = |s: f64| -> Result<f64> { Ok(diff_at(&energies_at(s)?)) };

                    let mut i = 0;
                    while i < diffs.len() {
                        if diffs[i].abs() <= tol {
                            let start = i;
                            while i + 1 < diffs.len() && diffs[i + 1].abs() <= tol {
                                i += 1;
                            }
                            if i > start {
                                if record {
                                    partial.push(((k, l), (kp, lp)));
                                }
                                classes[here] = CaseClass::CaseII;
                                i += 1;
                                continue;
                            }
                            let lo = if start > 0 { grid[start - 1] } else { grid[start] };
                            let hi = if start + 1 < grid.len() { grid[start + 1] } else { grid[start] };
                            let s_star = refine_root(&eval, lo, hi, grid[start])?;
                            let crossing = check_slope(&eval, (k, l), (kp, lp), s_star, options.slope_tol)?;
                            if record {
                                crossings.push(crossing);
                            }
                            classes[here] = CaseClass::CaseII;
                        } else if i + 1 < diffs.len()
                            && diffs[i + 1].abs() > tol
                            && diffs[i].signum() != diffs[i + 1].signum()
                        {
                            let s_star = refine_root(&eval, grid[i], grid[i + 1], 0.5 * (grid[i] + grid[i + 1]))?;
                            let crossing = check_slope(&eval, (k, l), (kp, lp), s_star, options.slope_tol)?;
                            if record {
                                crossings.push(crossing);
                            }
                            classes[here] = CaseClass::CaseII;
                        }
                        i += 1;
                    }
                }
            }
        }
    }
    Ok(ResonanceTensor { k: k_count, g, classes, crossings, partial })
}

/// Resonance tensor of a Hamiltonian family on the default uniform grid.
pub fn resonance_tensor_for<F: HamiltonianFamily + ?Sized>(
    family: &F,
    degeneracy_tol: f64,
    options: ResonanceOptions,
) -> Result<ResonanceTensor> {
    let tracker = SpectralTracker::new(family, degeneracy_tol)?;
    compute_resonance_tensor(|s| Ok(tracker.decompose(s)?.energies), &options.uniform_grid(), options)
}

fn refine_root(f: &impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, fallback: f64) -> Result<f64> {
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        // touches zero without changing sign
        return Ok(fallback);
    }
    while hi - lo > CROSSING_TOL {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn check_slope(
    f: &impl Fn(f64) -> Result<f64>,
    pair: (usize, usize),
    other: (usize, usize),
    s: f64,
    slope_tol: f64,
) -> Result<Crossing> {
    let a = (s - SLOPE_STEP).max(0.0);
    let b = (s + SLOPE_STEP).min(1.0);
    let slope = (f(b)? - f(a)?) / (b - a);
    if slope.abs() < slope_tol {
        return Err(Error::TangentialCrossing { k: pair.0, l: pair.1, kp: other.0, lp: other.1, s, slope });
    }
    Ok(Crossing { pair, other, s, slope })
}

impl ResonanceTensor {
    /// Tensor from explicit entries, indexed `((k·K + l)·K + k')·K + l'`.
    pub fn from_entries(k: usize, g: Vec<bool>) -> Result<Self> {
        if g.len() != k.pow(4) {
            return Err(Error::DimensionMismatch { expected: k.pow(4), found: g.len() });
        }
        Ok(Self { k, classes: vec![CaseClass::CaseI; g.len()], g, crossings: Vec::new(), partial: Vec::new() })
    }

    pub fn num_spaces(&self) -> usize {
        self.k
    }

    fn index(&self, k: usize, l: usize, kp: usize, lp: usize) -> usize {
        ((k * self.k + l) * self.k + kp) * self.k + lp
    }

    pub fn g(&self, k: usize, l: usize, kp: usize, lp: usize) -> bool {
        self.g[self.index(k, l, kp, lp)]
    }

    pub fn value(&self, k: usize, l: usize, kp: usize, lp: usize) -> f64 {
        if self.g(k, l, kp, lp) {
            1.0
        } else {
            0.0
        }
    }

    pub fn entries(&self) -> &[bool] {
        &self.g
    }

    pub fn pair_class(&self, k: usize, l: usize, kp: usize, lp: usize) -> CaseClass {
        self.classes[self.index(k, l, kp, lp)]
    }

    /// CaseII if any pair of gap functions crosses, else CaseI.
    pub fn case_class(&self) -> CaseClass {
        self.classes.iter().copied().max().unwrap_or(CaseClass::CaseI)
    }

    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }

    /// Pairs whose gaps agree on a subinterval but not on all of [0, 1].
    pub fn partial_coincidences(&self) -> &[(Pair, Pair)] {
        &self.partial
    }

    /// Blocks (k', l') with g_klk'l' = 1.
    pub fn coupled_blocks(&self, k: usize, l: usize) -> Vec<(usize, usize)> {
        let n = self.k;
        (0..n)
            .flat_map(|kp| (0..n).map(move |lp| (kp, lp)))
            .filter(|&(kp, lp)| self.g(k, l, kp, lp))
            .collect()
    }

    /// G with G_(kk'),(ll') = g_klk'l', rows and columns indexed k·K + k'.
    pub fn g_matrix(&self) -> ComplexMatrix {
        let n = self.k;
        ComplexMatrix::from_fn(n * n, n * n, |r, c| {
            let (k, kp) = (r / n, r % n);
            let (l, lp) = (c / n, c % n);
            num_complex::Complex64::new(self.value(k, l, kp, lp), 0.0)
        })
    }

    /// Descriptions of every violated symmetry or δ-identity.
    pub fn identity_violations(&self) -> Vec<String> {
        let n = self.k;
        let mut out = Vec::new();
        let delta = |a: usize, b: usize| a == b;
        for k in 0..n {
            for l in 0..n {
                for kp in 0..n {
                    for lp in 0..n {
                        let v = self.g(k, l, kp, lp);
                        if v != self.g(kp, lp, k, l) {
                            out.push(format!("g[{k}{l}{kp}{lp}] != g[{kp}{lp}{k}{l}]"));
                        }
                        if v != self.g(l, k, lp, kp) {
                            out.push(format!("g[{k}{l}{kp}{lp}] != g[{l}{k}{lp}{kp}]"));
                        }
                    }
                    if self.g(k, l, kp, l) != delta(k, kp) {
                        out.push(format!("g[{k}{l}{kp}{l}] != δ({k},{kp})"));
                    }
                    if self.g(k, l, k, kp) != delta(l, kp) {
                        out.push(format!("g[{k}{l}{k}{kp}] != δ({l},{kp})"));
                    }
                    if self.g(k, k, l, kp) != delta(l, kp) {
                        out.push(format!("g[{k}{k}{l}{kp}] != δ({l},{kp})"));
                    }
                    if self.g(k, l, kp, kp) != delta(k, l) {
                        out.push(format!("g[{k}{l}{kp}{kp}] != δ({k},{l})"));
                    }
                }
                if !self.g(k, l, k, l) {
                    out.push(format!("g[{k}{l}{k}{l}] != 1"));
                }
            }
        }
        out
    }

    /// CSV with header `k,l,kp,lp,g`, labels zero-based.
    pub fn to_csv(&self) -> String {
        let n = self.k;
        let mut out = String::from("k,l,kp,lp,g\n");
        for k in 0..n {
            for l in 0..n {
                for kp in 0..n {
                    for lp in 0..n {
                        let _ = writeln!(out, "{k},{l},{kp},{lp},{}", u8::from(self.g(k, l, kp, lp)));
                    }
                }
            }
        }
        out
    }
}
