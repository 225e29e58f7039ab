//! Minimizes the discrete 3-Dirichlet energy with boundary values log|x| on
//! a box away from the origin and compares with log|x| itself, then checks
//! the p = 2 case against a dense direct linear solve.
//!
//! cargo run --release --example p_harmonic_solve

use hyperlab::grid::{GridFunction, GridSpec};
use hyperlab::plap::{p_dirichlet_energy, solve_p_harmonic, SolverConfig};
use hyperlab::verify::laplace_direct;

fn main() -> hyperlab::Result<()> {
    let spec = GridSpec::new(vec![33; 3], 1.0 / 32.0, vec![0.5; 3])?;
    let exact = GridFunction::sample(spec.clone(), |x| x.iter().map(|v| v * v).sum::<f64>().sqrt().ln())?;
    let mut data = exact.clone();
    data.set_interior(&vec![0.0; spec.len()])?;

    let out = solve_p_harmonic(&data, &SolverConfig::new(3.0))?;
    println!(
        "p=3: {} iterations, stop {:?}, max |u − log|x|| = {:.3e}, monotone trace: {}",
        out.iterations,
        out.stop,
        out.solution.max_abs_diff(&exact),
        out.trace_is_monotone()
    );
    println!(
        "energy of the solution {:.10}, of log|x| itself {:.10}",
        p_dirichlet_energy(&out.solution, 3.0, 1e-8)?,
        p_dirichlet_energy(&exact, 3.0, 1e-8)?
    );
    let mut trace = Vec::new();
    out.write_trace_csv(&mut trace)?;
    let text = String::from_utf8_lossy(&trace);
    println!("first trace rows:\n{}", text.lines().take(4).collect::<Vec<_>>().join("\n"));

    let small = GridSpec::new(vec![9; 3], 1.0 / 8.0, vec![0.0; 3])?;
    let data = GridFunction::sample(small, |x| (3.0 * x[0]).cos() * x[1] + x[2] * x[2])?;
    let lin = solve_p_harmonic(&data, &SolverConfig::new(2.0))?;
    println!(
        "p=2 vs direct solve: {:.3e}",
        lin.solution.max_abs_diff(&laplace_direct(&data)?)
    );
    Ok(())
}
