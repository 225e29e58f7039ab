//! Ricci-null directions, constancy of the split spectrum and the global
//! verdict for the equidistant cone, the horosphere and a sphere cap.
//!
//! cargo run --release --example rigidity_tube

use hyperlab::height_field::{Cap, HeightField};
use hyperlab::report::to_json_string;
use hyperlab::rigidity::{classify_field, constancy_scan, flat_direction_check, sample_points, ClassifyOptions};

fn main() -> hyperlab::Result<()> {
    let cone = HeightField::equidistant_cone(3, 1.0)?;
    let flat = flat_direction_check(&cone.eval_jet(&[1.0, 0.0, 0.0])?)?;
    println!(
        "cone at (1,0,0): {} null direction(s), κ₀ = {:?}, smaller root = {:?}, misalignment = {:?}",
        flat.null_space_dim, flat.kappa0, flat.kappa0_expected, flat.principal_alignment
    );

    for s in [0.5, 2.0, 5.0] {
        let field = HeightField::equidistant_cone(3, s)?;
        let scan = constancy_scan(&field, &sample_points(&field, 100, 1))?;
        println!(
            "cone s={s}: κ₀ = {:.12}, κ_t = {:.12}, variances ({:.1e}, {:.1e}), |κ₀κ_t − 1| ≤ {:.1e}",
            scan.kappa0_mean, scan.kappa_transverse_mean, scan.var_kappa0, scan.var_kappa_transverse, scan.product_defect
        );
    }

    let opts = ClassifyOptions::default();
    for (name, field) in [
        ("cone s=1", cone),
        ("horosphere", HeightField::horosphere(3, 1.0)?),
        ("lower cap", HeightField::sphere_cap(3, 2.0, 1.0, Cap::Lower)?),
    ] {
        let analysis = classify_field(&field, &opts)?;
        println!("{name}:\n{}", to_json_string(&analysis.verdict_json())?);
    }
    Ok(())
}
