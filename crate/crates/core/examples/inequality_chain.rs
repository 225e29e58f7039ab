//! Gradient-direction Ricci curvature, the two-factor split of H, the bound
//! H ≥ n and the n-subharmonic density of log f, over random samples of a
//! nonnegatively curved surface and of the tilted plane.
//!
//! cargo run --example inequality_chain

use hyperlab::curvature::{fundamental_forms, ricci_coordinate, ricci_eigenvalues, shape_spectrum};
use hyperlab::height_field::{Cap, HeightField};
use hyperlab::inequalities::{key_factors, mean_bound_check, n_subharmonic_density, regime_report};
use hyperlab::rigidity::sample_points;

fn summarize(name: &str, field: &HeightField) -> hyperlab::Result<()> {
    let n = field.dim();
    let (mut min_ab, mut min_h, mut min_density) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut all_hold = true;
    for x in sample_points(field, 200, 11) {
        let jet = field.eval_jet(&x)?;
        let forms = fundamental_forms(&jet);
        let spec = shape_spectrum(&jet, &forms)?;
        let eigs = ricci_eigenvalues(&ricci_coordinate(&jet, &forms), &forms)?;
        let factors = key_factors(&jet)?;
        min_ab = min_ab.min(factors.product() - (n as f64 - 1.0));
        min_h = min_h.min(spec.mean - n as f64);
        min_density = min_density.min(n_subharmonic_density(&jet).value);
        all_hold &= mean_bound_check(&x, &spec, eigs[0], n).holds;
    }
    println!("{name}: min(AB − (n−1)) = {min_ab:.3e}, min(H − n) = {min_h:.3e}, min density = {min_density:.3e}, mean bound holds: {all_hold}");
    Ok(())
}

fn main() -> hyperlab::Result<()> {
    summarize("lower cap a=2 b=1", &HeightField::sphere_cap(3, 2.0, 1.0, Cap::Lower)?)?;
    summarize("cone s=1", &HeightField::equidistant_cone(3, 1.0)?)?;
    summarize("tilted plane s=1", &HeightField::tilted_plane(3, 1.0)?)?;

    let plane = HeightField::tilted_plane(3, 1.0)?;
    let report = regime_report(&plane.eval_jet(&[1.0, 0.0, 0.0])?)?;
    println!(
        "tilted plane at x₁=1: regime {}, min Ricci {:.3}, density {:?} (−2/x₁² = −2)",
        report.regime, report.min_ricci_eig, report.n_subharmonic_density
    );
    Ok(())
}
