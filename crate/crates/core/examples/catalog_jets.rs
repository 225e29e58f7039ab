//! Catalog surfaces, their exact jets, and the central-difference check.
//!
//! cargo run --example catalog_jets

use hyperlab::height_field::{default_step, fd_validate_jet, Cap, HeightField};

fn main() -> hyperlab::Result<()> {
    let surfaces = [
        ("horosphere c=1", HeightField::horosphere(3, 1.0)?, vec![0.3, -0.2, 0.5]),
        ("cone s=1", HeightField::equidistant_cone(3, 1.0)?, vec![1.0, 0.0, 0.0]),
        ("lower cap a=2 b=1", HeightField::sphere_cap(3, 2.0, 1.0, Cap::Lower)?, vec![0.0; 3]),
        ("tilted plane s=1", HeightField::tilted_plane(3, 1.0)?, vec![1.5, 0.2, -0.4]),
    ];
    for (name, field, x) in &surfaces {
        let jet = field.eval_jet(x)?;
        let check = fd_validate_jet(field, x, default_step(x))?;
        println!("{name} at {x:?}");
        println!("  f = {:.6}, grad = {:?}", jet.f, jet.grad.as_slice());
        println!("  hess diagonal = {:?}", (0..3).map(|i| jet.hess[(i, i)]).collect::<Vec<_>>());
        println!("  central-difference deviation: grad {:.2e}, hess {:.2e}", check.grad, check.hess);
    }

    // The cone is singular at its apex, which is masked.
    let cone = &surfaces[1].1;
    match cone.eval_jet(&[0.0, 0.0, 0.0]) {
        Err(e) => println!("apex: {e}"),
        Ok(_) => unreachable!(),
    }
    println!("log-height at apex: {}", cone.log_height(&[0.0; 3])?);
    Ok(())
}
