//! A surface known only on a lattice: write the node dump and header, load
//! it through a descriptor, and compare the interpolated spectrum with the
//! closed form it was sampled from.
//!
//! cargo run --example sampled_surface

use hyperlab::curvature::{fundamental_forms, shape_spectrum};
use hyperlab::grid::{GridFunction, GridSpec};
use hyperlab::height_field::{Cap, HeightField, SurfaceDescriptor};

fn main() -> hyperlab::Result<()> {
    let exact = HeightField::sphere_cap(3, 2.0, 1.0, Cap::Lower)?;
    let spec = GridSpec::covering(&[-0.5; 3], &[0.5; 3], 0.01)?;
    let grid = GridFunction::sample(spec, |x| exact.value(x).unwrap_or(f64::NAN))?;

    let dir = std::env::temp_dir().join("hyperlab-sampled-surface");
    std::fs::create_dir_all(&dir)?;
    let (header, values) = (dir.join("cap.json"), dir.join("cap.csv"));
    grid.save(&header, &values)?;
    let descriptor = format!(
        r#"{{"kind": "sampled_grid", "header": {:?}, "values": {:?}, "order": 4}}"#,
        header.display().to_string(),
        values.display().to_string()
    );
    let sampled = SurfaceDescriptor::from_json(&descriptor)?.build()?;

    for x in [[0.0, 0.0, 0.0], [0.2, -0.1, 0.15], [-0.3, 0.25, 0.1]] {
        let k = |field: &HeightField| -> hyperlab::Result<Vec<f64>> {
            let jet = field.eval_jet(&x)?;
            Ok(shape_spectrum(&jet, &fundamental_forms(&jet))?.kappas)
        };
        let (a, b) = (k(&exact)?, k(&sampled)?);
        let dev = a.iter().zip(&b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        println!("x = {x:?}: kappas {b:.8?}, deviation from closed form {dev:.2e}");
    }
    Ok(())
}
