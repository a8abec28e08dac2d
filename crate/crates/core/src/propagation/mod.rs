//! Time stepping of linear ODEs dX/ds = A(s)·X on a grid of scaled times.
//!
//! States are column blocks `X` (a single vectorized density operator, or the
//! identity when building a propagator). Three one-step methods are provided:
//! exponential midpoint (generator frozen at the step midpoint), classical RK4
//! and the fourth-order commutator-free Magnus scheme with two Gauss nodes.

mod trajectory;

pub use trajectory::{
    hs_error_max, intensity_loss, normalized_fidelity, purity, InvariantReport, Trajectory, TrajectoryMeta,
    EPS_NORM, FIDELITY_PSD_TOL,
};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{matrix_exponential, ComplexMatrix, SuperOperatorMatrix};

/// Largest accepted Δs·‖A‖₁ for an exponential step.
pub const MAX_STEP_NORM: f64 = 20.0;

/// Relative inward offset of the RK4 end-point evaluations.
const ENDPOINT_NUDGE: f64 = 1e-9;

/// Nodes closer than this to a breakpoint are moved onto it.
const SNAP_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// X ← exp(Δs·A(s + Δs/2))·X.
    ExponentialMidpoint,
    Rk4,
    /// Commutator-free Magnus, order four.
    Magnus4,
}

const SQRT3_6: f64 = 0.288_675_134_594_812_9;
const GAUSS_LO: f64 = 0.5 - SQRT3_6;
const GAUSS_HI: f64 = 0.5 + SQRT3_6;
const CF_A: f64 = 0.25 + SQRT3_6;
const CF_B: f64 = 0.25 - SQRT3_6;

impl Method {
    /// Fractions of a step at which the generator is evaluated.
    pub fn stages(self) -> &'static [f64] {
        match self {
            Self::ExponentialMidpoint => &[0.5],
            Self::Rk4 => &[0.0, 0.5, 1.0],
            Self::Magnus4 => &[GAUSS_LO, GAUSS_HI],
        }
    }
}

/// Step nodes 0 = s_0 < … < s_n = 1 in scaled time.
#[derive(Clone, Debug, PartialEq)]
pub struct StepGrid {
    nodes: Vec<f64>,
}

impl StepGrid {
    /// Uniform steps Δs = dt/T, the last one shortened, with every breakpoint
    /// in (0, 1) inserted as a node.
    pub fn uniform(dt: f64, run_time: f64, breakpoints: &[f64]) -> Result<Self> {
        if !(dt > 0.0 && run_time > 0.0 && dt.is_finite() && run_time.is_finite()) {
            return Err(Error::InvalidArgument(format!("need dt > 0 and T > 0, got dt = {dt}, T = {run_time}")));
        }
        let ds = dt / run_time;
        if ds > 1.0 {
            return Err(Error::InvalidArgument(format!("step dt = {dt} exceeds run time T = {run_time}")));
        }
        let n = ((1.0 / ds) - 1e-9).ceil() as usize;
        let mut nodes: Vec<f64> = (0..n).map(|i| i as f64 * ds).collect();
        nodes.push(1.0);
        for &b in breakpoints {
            if b <= 0.0 || b >= 1.0 {
                continue;
            }
            let i = nodes.partition_point(|&x| x < b);
            if (nodes[i] - b).abs() <= SNAP_TOL {
                nodes[i] = b;
            } else if i > 0 && (nodes[i - 1] - b).abs() <= SNAP_TOL {
                nodes[i - 1] = b;
            } else {
                nodes.insert(i, b);
            }
        }
        Self::from_nodes(nodes)
    }

    /// `steps` equal steps.
    pub fn with_steps(steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidArgument("need at least one step".into()));
        }
        let mut nodes: Vec<f64> = (0..steps).map(|i| i as f64 / steps as f64).collect();
        nodes.push(1.0);
        Self::from_nodes(nodes)
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("step nodes must be strictly increasing".into()));
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Points where `method` evaluates the generator in step i.
    pub fn stage_points(&self, i: usize, method: Method) -> Vec<f64> {
        let (a, b) = (self.nodes[i], self.nodes[i + 1]);
        method
            .stages()
            .iter()
            .map(|&c| if c == 0.0 { a } else if c == 1.0 { b } else { a + c * (b - a) })
            .collect()
    }

    /// Nodes and all stage points, sorted; the grid a transport frame needs.
    pub fn evaluation_points(&self, method: Method) -> Vec<f64> {
        let mut pts = self.nodes.clone();
        for i in 0..self.steps() {
            pts.extend(self.stage_points(i, method));
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-13);
        pts
    }

    /// Restriction to the nodes in [from, to] (both must be nodes).
    pub fn slice(&self, from: f64, to: f64) -> Result<Self> {
        let nodes: Vec<f64> = self.nodes.iter().copied().filter(|&x| x >= from - 1e-13 && x <= to + 1e-13).collect();
        Self::from_nodes(nodes)
    }
}

/// Integrates dX/ds = A(s)X over `grid`, returning X at every node.
pub fn integrate<G>(generator: G, x0: &ComplexMatrix, grid: &StepGrid, method: Method) -> Result<Vec<ComplexMatrix>>
where
    G: Fn(f64) -> Result<ComplexMatrix>,
{
    let mut out = Vec::with_capacity(grid.nodes.len());
    integrate_visit(generator, x0, grid, method, |_, x| {
        out.push(x.clone());
        Ok(())
    })?;
    Ok(out)
}

/// Integrates dX/ds = A(s)X over `grid`, handing X at node i to `visit`
/// (including the initial node) and returning X(1).
pub fn integrate_visit<G, V>(generator: G, x0: &ComplexMatrix, grid: &StepGrid, method: Method, mut visit: V) -> Result<ComplexMatrix>
where
    G: Fn(f64) -> Result<ComplexMatrix>,
    V: FnMut(usize, &ComplexMatrix) -> Result<()>,
{
    let mut x = x0.clone();
    visit(0, &x)?;
    for i in 0..grid.steps() {
        let h = grid.nodes[i + 1] - grid.nodes[i];
        let pts = grid.stage_points(i, method);
        x = match method {
            Method::ExponentialMidpoint => {
                let a = generator(pts[0])?;
                exp_step(&a, h)?.matmul(&x)
            }
            Method::Rk4 => {
                // end points are taken from inside the step so that a generator
                // jumping at a node is sampled on the correct side
                let nudge = ENDPOINT_NUDGE * h;
                let a0 = generator(pts[0] + nudge)?;
                let a1 = generator(pts[1])?;
                let a2 = generator(pts[2] - nudge)?;
                let k1 = a0.matmul(&x);
                let k2 = a1.matmul(&(&x + &k1.scale_real(h / 2.0)));
                let k3 = a1.matmul(&(&x + &k2.scale_real(h / 2.0)));
                let k4 = a2.matmul(&(&x + &k3.scale_real(h)));
                let mut incr = k1;
                incr += &k2.scale_real(2.0);
                incr += &k3.scale_real(2.0);
                incr += &k4;
                &x + &incr.scale_real(h / 6.0)
            }
            Method::Magnus4 => {
                let a1 = generator(pts[0])?;
                let a2 = generator(pts[1])?;
                let first = &a1.scale_real(CF_A) + &a2.scale_real(CF_B);
                let second = &a1.scale_real(CF_B) + &a2.scale_real(CF_A);
                let x1 = exp_step(&first, h)?.matmul(&x);
                exp_step(&second, h)?.matmul(&x1)
            }
        };
        visit(i + 1, &x)?;
    }
    Ok(x)
}

fn exp_step(a: &ComplexMatrix, h: f64) -> Result<ComplexMatrix> {
    let scaled = a.scale_real(h);
    let norm = scaled.norm_one();
    if norm > MAX_STEP_NORM {
        return Err(Error::StepTooLarge { product: norm, limit: MAX_STEP_NORM });
    }
    matrix_exponential(&scaled)
}

fn column(v: Vec<C64>) -> ComplexMatrix {
    let n = v.len();
    ComplexMatrix::from_row_major(n, 1, v).expect("length matches")
}

pub(crate) fn validate_density(rho: &ComplexMatrix) -> Result<()> {
    let tol = 1e-10;
    if !rho.is_square() {
        return Err(Error::InvalidInitialState { reason: "not square".into() });
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        return Err(Error::InvalidInitialState { reason: format!("trace {tr}") });
    }
    if !rho.is_psd(tol) {
        return Err(Error::InvalidInitialState { reason: "not positive semidefinite".into() });
    }
    Ok(())
}

/// Evolves a density operator under a superoperator generator on `grid`.
pub fn propagate<G>(
    generator: G,
    rho0: &ComplexMatrix,
    grid: &StepGrid,
    method: Method,
    meta: TrajectoryMeta,
) -> Result<Trajectory>
where
    G: Fn(f64) -> Result<SuperOperatorMatrix>,
{
    validate_density(rho0)?;
    let d = rho0.rows();
    let states = integrate(|s| Ok(generator(s)?.into_matrix()), &column(rho0.vectorize()), grid, method)?;
    let states = states
        .into_iter()
        .map(|x| ComplexMatrix::devectorize(x.as_slice(), d))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory::new(grid.nodes().to_vec(), states, meta))
}

/// Piecewise-constant-generator evolution with uniform physical step `dt`.
pub fn propagate_piecewise_exp<G>(generator: G, rho0: &ComplexMatrix, dt: f64, run_time: f64) -> Result<Trajectory>
where
    G: Fn(f64) -> Result<SuperOperatorMatrix>,
{
    let grid = StepGrid::uniform(dt, run_time, &[])?;
    let meta = TrajectoryMeta { run_time, dt, ..TrajectoryMeta::default() };
    propagate(generator, rho0, &grid, Method::ExponentialMidpoint, meta)
}

/// Classical RK4 with `steps` equal steps in s.
pub fn propagate_rk4<G>(generator: G, rho0: &ComplexMatrix, steps: usize, run_time: f64) -> Result<Trajectory>
where
    G: Fn(f64) -> Result<SuperOperatorMatrix>,
{
    let grid = StepGrid::with_steps(steps)?;
    let meta = TrajectoryMeta { run_time, dt: run_time / steps as f64, ..TrajectoryMeta::default() };
    propagate(generator, rho0, &grid, Method::Rk4, meta)
}

/// The map ρ(0) ↦ ρ(1) as a superoperator matrix.
pub fn propagator<G>(generator: G, dim: usize, grid: &StepGrid, method: Method) -> Result<SuperOperatorMatrix>
where
    G: Fn(f64) -> Result<SuperOperatorMatrix>,
{
    let id = ComplexMatrix::identity(dim * dim);
    let xs = integrate(|s| Ok(generator(s)?.into_matrix()), &id, grid, method)?;
    SuperOperatorMatrix::new(dim, xs.into_iter().last().expect("grid has nodes"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::I;

    fn qubit_state() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[&[C64::new(0.6, 0.0), C64::new(0.2, 0.3)], &[C64::new(0.2, -0.3), C64::new(0.4, 0.0)]])
    }

    #[test]
    fn uniform_grid_shortens_last_step_and_inserts_breakpoints() {
        let g = StepGrid::uniform(0.3, 1.0, &[]).unwrap();
        assert_eq!(g.steps(), 4);
        assert!((g.nodes()[3] - 0.9).abs() < 1e-15 && g.nodes()[4] == 1.0);
        let g = StepGrid::uniform(0.01, 100.0, &[0.4, 0.6]).unwrap();
        assert_eq!(g.steps(), 10_000);
        assert!(g.nodes().contains(&0.4) && g.nodes().contains(&0.6));
        let g = StepGrid::uniform(0.3, 1.0, &[0.45]).unwrap();
        let expected = [0.0, 0.3, 0.45, 0.6, 0.9, 1.0];
        assert_eq!(g.nodes().len(), expected.len());
        assert!(g.nodes().iter().zip(expected).all(|(a, b)| (a - b).abs() < 1e-15));
    }

    #[test]
    fn zero_generator_keeps_state() {
        let rho = qubit_state();
        for method in [Method::ExponentialMidpoint, Method::Rk4, Method::Magnus4] {
            let grid = StepGrid::with_steps(7).unwrap();
            let traj = propagate(|_| Ok(SuperOperatorMatrix::zeros(2)), &rho, &grid, method, TrajectoryMeta::default())
                .unwrap();
            for st in traj.states() {
                assert_eq!(st, &rho);
            }
        }
    }

    #[test]
    fn constant_hamiltonian_matches_unitary_conjugation() {
        let h = ComplexMatrix::from_rows(&[&[C64::new(0.5, 0.0), C64::new(0.3, -0.2)], &[C64::new(0.3, 0.2), C64::new(-0.5, 0.0)]]);
        let t = 10.0;
        let gen = SuperOperatorMatrix::commutator(&h.scale_real(t)).unwrap();
        let rho = qubit_state();
        let traj = propagate_piecewise_exp(|_| Ok(gen.clone()), &rho, 0.01, t).unwrap();
        for (s, st) in traj.grid().iter().zip(traj.states()).step_by(97) {
            let u = matrix_exponential(&h.scale(-I * t * *s)).unwrap();
            let expected = u.matmul(&rho).matmul(&u.adjoint());
            assert!(st.distance(&expected) <= 1e-8);
        }
    }

    #[test]
    fn pure_dephasing_decay() {
        let z = ComplexMatrix::real_diagonal(&[1.0, -1.0]);
        let sqrt2z = z.scale_real(std::f64::consts::SQRT_2);
        let (t, gamma) = (10.0, 0.05);
        let gen = SuperOperatorMatrix::lindblad(&ComplexMatrix::zeros(2, 2), &[sqrt2z]).unwrap().scale_real(gamma * t);
        let rho = qubit_state();
        let traj = propagate_piecewise_exp(|_| Ok(gen.clone()), &rho, 0.01, t).unwrap();
        for (s, st) in traj.grid().iter().zip(traj.states()) {
            let expected = rho[(0, 1)] * (-4.0 * gamma * t * s).exp();
            assert!((st[(0, 1)] - expected).norm() <= 1e-8);
        }
    }

    #[test]
    fn invalid_initial_state_is_rejected() {
        let bad = ComplexMatrix::real_diagonal(&[0.7, 0.7]);
        assert!(matches!(
            propagate_piecewise_exp(|_| Ok(SuperOperatorMatrix::zeros(2)), &bad, 0.1, 1.0),
            Err(Error::InvalidInitialState { .. })
        ));
        let neg = ComplexMatrix::real_diagonal(&[1.2, -0.2]);
        assert!(propagate_piecewise_exp(|_| Ok(SuperOperatorMatrix::zeros(2)), &neg, 0.1, 1.0).is_err());
    }

    #[test]
    fn oversized_step_is_rejected() {
        let gen = SuperOperatorMatrix::commutator(&ComplexMatrix::real_diagonal(&[0.0, 1000.0])).unwrap();
        let r = propagate_piecewise_exp(|_| Ok(gen.clone()), &qubit_state(), 0.5, 1.0);
        assert!(matches!(r, Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn magnus_is_fourth_order() {
        // dx/ds = A(s)x with non-commuting A(s) = A0 + s·A1; compare against a fine RK4 reference
        let a0 = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]).scale_real(3.0);
        let a1 = ComplexMatrix::from_real_rows(&[&[0.5, 0.0], &[0.0, -0.5]]).scale_real(2.0);
        let gen = |s: f64| Ok(&a0 + &a1.scale_real(s));
        let x0 = ComplexMatrix::identity(2);
        let reference = integrate(gen, &x0, &StepGrid::with_steps(4000).unwrap(), Method::Rk4).unwrap();
        let exact = reference.last().unwrap();
        let err = |n: usize| {
            let xs = integrate(gen, &x0, &StepGrid::with_steps(n).unwrap(), Method::Magnus4).unwrap();
            xs.last().unwrap().distance(exact)
        };
        let ratio = err(20) / err(40);
        assert!(ratio > 14.0, "ratio {ratio}");
        let mid = |n: usize| {
            let xs = integrate(gen, &x0, &StepGrid::with_steps(n).unwrap(), Method::ExponentialMidpoint).unwrap();
            xs.last().unwrap().distance(exact)
        };
        let ratio = mid(20) / mid(40);
        assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio}");
    }
}
