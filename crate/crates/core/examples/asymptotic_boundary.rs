//! Sublevel sets {log f < −M}: components, diameters and the resulting count
//! of asymptotic boundary points.
//!
//! cargo run --release --example asymptotic_boundary

use hyperlab::asymptotics::{default_grid, recession_report, sublevel_components};
use hyperlab::height_field::{Cap, HeightField};

fn main() -> hyperlab::Result<()> {
    let cone = HeightField::equidistant_cone(3, 1.0)?;
    let grid = default_grid(&cone)?;
    for m in [1.0, 2.0, 3.0, 4.0] {
        let comps = sublevel_components(&cone, &grid, m)?;
        let diam: Vec<f64> = comps.iter().map(|c| c.diameter).collect();
        println!("cone, M={m}: {} component(s), diameters {diam:.4?}, bound 2e^-M = {:.4}", comps.len(), 2.0 * (-m).exp());
    }
    let levels = [1.0, 2.0, 3.0, 4.0];
    for (name, field) in [
        ("cone s=1", cone),
        ("horosphere", HeightField::horosphere(3, 1.0)?),
        ("lower cap", HeightField::sphere_cap(3, 2.0, 1.0, Cap::Lower)?),
        ("tilted plane", HeightField::tilted_plane(3, 1.0)?),
    ] {
        let r = recession_report(&field, &levels, None)?;
        println!(
            "{name}: k = {}, point at infinity included: {}, fat recession set: {}",
            r.boundary_points, r.includes_projection_point, r.fat_recession_set
        );
    }
    Ok(())
}
