//! Comparison probe: solve the n-harmonic Dirichlet problem with boundary
//! values h = log f and test whether the solution stays above h.
//!
//! cargo run --release --example viscosity_probe

use hyperlab::plap::SolverConfig;
use hyperlab::verify::probe_cases;

fn main() -> hyperlab::Result<()> {
    for (name, field, lo, hi, h, _) in probe_cases()? {
        let r = hyperlab::plap::viscosity_probe(&field, &lo, &hi, h, &SolverConfig::new(3.0))?;
        println!(
            "{name:32} box {lo:?}..{hi:?} h={h}: subharmonic={} min(v − h)={:+.3e} tol={:.3e} excised={}",
            r.subharmonic, r.min_margin, r.tolerance, r.excised_nodes
        );
    }
    Ok(())
}
