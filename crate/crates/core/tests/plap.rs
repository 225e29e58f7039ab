use hyperlab::grid::{GridFunction, GridSpec};
use hyperlab::plap::{
    comparison_check, p_dirichlet_energy_where, solve_p_harmonic, SolverConfig, StopReason,
};
use hyperlab::verify::laplace_direct;
use hyperlab::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn boundary_data(nodes: usize) -> GridFunction {
    let spec = GridSpec::new(vec![nodes; 3], 1.0 / (nodes - 1) as f64, vec![0.0; 3]).unwrap();
    GridFunction::sample(spec, |x| (2.0 * x[0]).sin() + x[1] * x[2] - x[0] * x[0] * x[1]).unwrap()
}

fn random_interior(data: &GridFunction, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut start = data.clone();
    let noise: Vec<f64> = (0..data.spec().len()).map(|_| rng.gen_range(-3.0..3.0)).collect();
    start.set_interior(&noise).unwrap();
    start
}

#[test]
fn energy_trace_is_monotone() {
    let out = solve_p_harmonic(&random_interior(&boundary_data(9), 1), &SolverConfig::new(3.0)).unwrap();
    assert!(out.converged, "{:?}", out.stop);
    assert!(out.trace_is_monotone());
    assert_eq!(out.trace.len(), out.iterations + 1);
}

#[test]
fn minimizer_does_not_depend_on_the_start() {
    let data = boundary_data(9);
    let config = SolverConfig::new(3.0);
    let a = solve_p_harmonic(&random_interior(&data, 11), &config).unwrap();
    let b = solve_p_harmonic(&random_interior(&data, 12), &config).unwrap();
    assert!(a.converged && b.converged);
    let d = a.solution.max_abs_diff(&b.solution);
    assert!(d <= 1e-6, "two starts differ by {d}");
}

#[test]
fn quadratic_case_matches_direct_solve() {
    let data = boundary_data(9);
    let out = solve_p_harmonic(&random_interior(&data, 5), &SolverConfig::new(2.0)).unwrap();
    assert_eq!(out.stop, StopReason::Residual);
    let d = out.solution.max_abs_diff(&laplace_direct(&data).unwrap());
    assert!(d <= 1e-8, "{d}");
}

#[test]
fn annulus_energy_of_log_norm() {
    // ∫_{a<|x|<b} |D log|x||³ dx = 4π log(b/a) in three dimensions.
    let (a, b) = (0.5, 1.0);
    let spec = GridSpec::covering(&[-1.0; 3], &[1.0; 3], 1.0 / 32.0).unwrap();
    let u = GridFunction::sample(spec, |x| norm(x).max(1e-12).ln()).unwrap();
    let e = p_dirichlet_energy_where(&u, 3.0, 1e-8, |c| (a..b).contains(&norm(c))).unwrap();
    let exact = 4.0 * std::f64::consts::PI * (b / a).ln();
    assert!((e - exact).abs() <= 0.02 * exact, "{e} vs {exact}");
}

#[test]
fn log_norm_is_recovered_around_a_hole() {
    let spec = GridSpec::covering(&[-1.0; 3], &[1.0; 3], 1.0 / 16.0).unwrap();
    let exact = GridFunction::sample(spec.clone(), |x| norm(x).max(1e-12).ln()).unwrap();
    let mut data = exact.clone();
    let excised = data.excise_where(|x| norm(x) < 0.25);
    assert!(excised > 0);
    let exact_masked = data.clone();
    data.set_interior(&vec![0.0; spec.len()]).unwrap();
    let out = solve_p_harmonic(&data, &SolverConfig::new(3.0)).unwrap();
    assert!(out.converged, "{:?}", out.stop);
    let d = out.solution.max_abs_diff(&exact_masked);
    assert!(d <= 2e-2, "{d}");
}

#[test]
fn ordered_boundary_data_give_ordered_solutions() {
    let low = boundary_data(9);
    let spec = low.spec().clone();
    let high = GridFunction::sample(spec, |x| (2.0 * x[0]).sin() + x[1] * x[2] - x[0] * x[0] * x[1] + 0.1 + x[2] * x[2]).unwrap();
    let config = SolverConfig::new(3.0);
    let u = solve_p_harmonic(&low, &config).unwrap().solution;
    let v = solve_p_harmonic(&high, &config).unwrap().solution;
    let report = comparison_check(&u, &v).unwrap();
    assert!(report.holds());
    assert!(report.min_difference > 0.0);

    let below = comparison_check(&v, &u);
    assert!(matches!(below, Err(Error::Precondition(_))));

    let mut bump = u.clone();
    let mut values = u.values().to_vec();
    values[bump.spec().index(&[4, 4, 4])] += 1.0;
    bump.set_interior(&values).unwrap();
    let report = comparison_check(&bump, &u).unwrap();
    assert_eq!(report.violations, vec![u.spec().index(&[4, 4, 4])]);
}
