use adiabat::experiment::{pure_density, HolonomySetup, DEFAULT_SEED};
use adiabat::generators::{exact_generator, ApproximateGenerator, LindbladDissipator};
use adiabat::linalg::{ComplexMatrix, SuperOperatorMatrix};
use adiabat::models::holonomy::computational_projector;
use adiabat::models::random::make_random_model;
use adiabat::propagation::{
    propagate, propagate_piecewise_exp, propagate_rk4, Method, StepGrid, Trajectory, TrajectoryMeta,
};
use adiabat::resonance::{resonance_tensor_for, ResonanceOptions};
use adiabat::spectral::{HamiltonianFamily, DEFAULT_DEGENERACY_TOL};
use adiabat::Result;

const RUN_TIME: f64 = 100.0;
const GAMMA: f64 = 0.01;
const DT: f64 = 0.01;

/// Largest entrywise |Δρ_ij| over all samples.
fn max_entry_gap(a: &Trajectory, b: &Trajectory) -> f64 {
    assert_eq!(a.len(), b.len());
    a.states().iter().zip(b.states()).map(|(x, y)| (x - y).max_abs()).fold(0.0, f64::max)
}

fn cross_check<G>(generator: G, rho0: &ComplexMatrix) -> f64
where
    G: Fn(f64) -> Result<SuperOperatorMatrix>,
{
    let steps = (RUN_TIME / DT).round() as usize;
    let exp = propagate_piecewise_exp(&generator, rho0, DT, RUN_TIME).unwrap();
    let rk4 = propagate_rk4(&generator, rho0, steps, RUN_TIME).unwrap();
    max_entry_gap(&exp, &rk4)
}

fn exact_and_approximate<F, D>(family: &F, dissipator: &D, rho0: &ComplexMatrix) -> (f64, f64)
where
    F: HamiltonianFamily,
    D: LindbladDissipator,
{
    let exact = cross_check(|s| exact_generator(family, dissipator, RUN_TIME, GAMMA, s), rho0);
    let tensor = resonance_tensor_for(family, DEFAULT_DEGENERACY_TOL, ResonanceOptions::default()).unwrap();
    let approx = ApproximateGenerator::new(family, dissipator, &tensor, RUN_TIME, GAMMA).unwrap();
    (exact, cross_check(|s| approx.at(s), rho0))
}

#[test]
fn rk4_agrees_with_exponential_midpoint_on_the_holonomy_preset() {
    let setup = HolonomySetup::default();
    let (exact, approx) =
        exact_and_approximate(&setup.family(RUN_TIME).unwrap(), &setup.dissipator().unwrap(), &setup.initial_density().unwrap());
    assert!(exact <= 1e-6, "exact evolution: {exact:e}");
    assert!(approx <= 1e-6, "approximate evolution: {approx:e}");
}

#[test]
fn rk4_agrees_with_exponential_midpoint_on_the_random_preset() {
    let model = make_random_model(DEFAULT_SEED, 4).unwrap();
    let (exact, approx) = exact_and_approximate(&model, &model.dissipator().unwrap(), &model.initial_density());
    assert!(exact <= 1e-6, "exact evolution: {exact:e}");
    assert!(approx <= 1e-6, "approximate evolution: {approx:e}");
}

#[test]
fn lab_frame_approximate_evolution_reproduces_the_closed_form() {
    let setup = HolonomySetup::default();
    let family = setup.family(RUN_TIME).unwrap();
    let dissipator = setup.dissipator().unwrap();
    let tensor = resonance_tensor_for(&family, DEFAULT_DEGENERACY_TOL, ResonanceOptions::default()).unwrap();
    let grid = StepGrid::uniform(DT, RUN_TIME, &family.breakpoints()).unwrap();
    let p = computational_projector();
    for gamma in [0.0, 0.01, 0.1] {
        let approx = ApproximateGenerator::new(&family, &dissipator, &tensor, RUN_TIME, gamma).unwrap();
        let traj = propagate(|s| approx.at(s), &setup.initial_density().unwrap(), &grid, Method::Magnus4, TrajectoryMeta::default())
            .unwrap();
        let end = p.matmul(traj.final_state()).matmul(&p);
        let block = ComplexMatrix::from_fn(2, 2, |i, j| end[(i, j)]);
        let gap = (&block - &setup.closed_form(gamma, RUN_TIME)).max_abs();
        assert!(gap < 1e-8, "Γ = {gamma}: {gap:e}");
    }
}

#[test]
fn explicit_vector_matches_bloch_angles() {
    let setup = HolonomySetup::default();
    let psi = adiabat::models::holonomy::input_state(setup.x, setup.y);
    let scaled: Vec<_> = psi.iter().map(|c| c * 3.0).collect();
    let from_vector = HolonomySetup { vector: Some(scaled), ..setup.clone() }.initial_density().unwrap();
    assert!(from_vector.distance(&setup.initial_density().unwrap()) < 1e-15);
    assert!(pure_density(&psi[..3], 4).is_err());
}
