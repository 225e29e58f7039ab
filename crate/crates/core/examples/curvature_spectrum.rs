//! Metric, second fundamental form, principal curvatures and Ricci tensor at
//! a point, with the Ricci tensor computed two independent ways and the
//! Codazzi/Gauss identities checked by finite differences.
//!
//! cargo run --example curvature_spectrum

use hyperlab::curvature::{
    codazzi_residual, fundamental_forms, gauss_residual, ricci_coordinate, ricci_eigenvalues,
    ricci_from_shape, shape_spectrum,
};
use hyperlab::height_field::{Cap, HeightField};
use hyperlab::linalg::max_abs_diff;

fn main() -> hyperlab::Result<()> {
    let cases = [
        ("cone s=2", HeightField::equidistant_cone(3, 2.0)?, [0.7, -0.4, 0.9]),
        ("lower cap a=2 b=1", HeightField::sphere_cap(3, 2.0, 1.0, Cap::Lower)?, [0.3, 0.1, -0.2]),
        ("tilted plane s=1", HeightField::tilted_plane(3, 1.0)?, [1.2, 0.0, 0.3]),
    ];
    for (name, field, x) in &cases {
        let jet = field.eval_jet(x)?;
        let forms = fundamental_forms(&jet);
        let spec = shape_spectrum(&jet, &forms)?;
        let ric = ricci_coordinate(&jet, &forms);
        let ric_shape = ricci_from_shape(&spec, &forms, 3);
        println!("{name} at {x:?}");
        println!("  kappas = {:?}", spec.kappas);
        println!("  clusters (value, multiplicity) = {:?}", spec.clusters());
        println!("  H = {:.12}", spec.mean);
        println!("  Ricci eigenvalues = {:?}", ricci_eigenvalues(&ric, &forms)?);
        println!("  coordinate vs shape-operator Ricci: {:.2e}", max_abs_diff(&ric, &ric_shape));
        println!(
            "  Codazzi residual {:.2e}, Gauss residual {:.2e} (step 1e-3)",
            codazzi_residual(field, x, 1e-3)?,
            gauss_residual(field, x, 1e-3)?
        );
    }
    Ok(())
}
