//! Sublevel sets of the hyperbolic height `h = log f` on a lattice, and the
//! resulting count of asymptotic boundary points.
//!
//! A persistent sublevel component whose diameter shrinks with the level is
//! read as one point of `{h = −∞}`; unbounded graph domains add the point at
//! infinity `p₀`.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::height_field::HeightField;

pub const DEFAULT_SPACING: f64 = 1.0 / 32.0;

/// A face-connected set of lattice nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub nodes: Vec<usize>,
    pub diameter: f64,
    pub touches_mask: bool,
}

/// `log f` at every node (`-inf` on excised balls, NaN outside the domain)
/// and the excision flags.
fn node_heights(field: &HeightField, spec: &GridSpec) -> (Vec<f64>, Vec<bool>) {
    (0..spec.len())
        .into_par_iter()
        .map(|i| {
            let x = spec.node_point(i);
            if field.domain().in_box(&x) && field.is_masked(&x) {
                return (f64::NEG_INFINITY, true);
            }
            (field.log_height(&x).unwrap_or(f64::NAN), false)
        })
        .unzip()
}

fn neighbours(spec: &GridSpec, index: usize, strides: &[usize], out: &mut Vec<usize>) {
    out.clear();
    let multi = spec.multi_index(index);
    for (d, &i) in multi.iter().enumerate() {
        if i > 0 {
            out.push(index - strides[d]);
        }
        if i + 1 < spec.dims[d] {
            out.push(index + strides[d]);
        }
    }
}

/// Largest Euclidean distance between nodes of a component. Only nodes with
/// a neighbour outside the set can be extreme, so the search is restricted to
/// those.
fn diameter(spec: &GridSpec, nodes: &[usize], member: &[bool]) -> f64 {
    let strides = spec.strides();
    let mut nb = Vec::new();
    let rim: Vec<Vec<f64>> = nodes
        .iter()
        .filter(|&&i| {
            neighbours(spec, i, &strides, &mut nb);
            nb.len() < 2 * spec.ndim() || nb.iter().any(|&j| !member[j])
        })
        .map(|&i| spec.node_point(i))
        .collect();
    let mut best = 0.0_f64;
    for (a, pa) in rim.iter().enumerate() {
        for pb in &rim[a + 1..] {
            let d2: f64 = pa.iter().zip(pb).map(|(u, v)| (u - v) * (u - v)).sum();
            best = best.max(d2);
        }
    }
    best.sqrt()
}

fn check_grid(field: &HeightField, spec: &GridSpec) -> Result<()> {
    if spec.ndim() != field.dim() {
        return Err(Error::Parameter(format!(
            "grid has {} axes, field has dimension {}",
            spec.ndim(),
            field.dim()
        )));
    }
    Ok(())
}

/// Face-connected components of `{h < −level} ∪ {excised nodes}` on `spec`.
pub fn sublevel_components(field: &HeightField, spec: &GridSpec, level: f64) -> Result<Vec<Component>> {
    check_grid(field, spec)?;
    let (heights, masked) = node_heights(field, spec);
    Ok(components_below(spec, &heights, &masked, level))
}

fn components_below(spec: &GridSpec, heights: &[f64], masked: &[bool], level: f64) -> Vec<Component> {
    let member: Vec<bool> = heights.iter().map(|h| *h < -level).collect();
    let strides = spec.strides();
    let mut label = vec![usize::MAX; spec.len()];
    let mut components = Vec::new();
    let mut queue = VecDeque::new();
    let mut nb = Vec::new();
    for seed in 0..spec.len() {
        if !member[seed] || label[seed] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut nodes = Vec::new();
        let mut touches_mask = false;
        label[seed] = id;
        queue.push_back(seed);
        while let Some(i) = queue.pop_front() {
            nodes.push(i);
            touches_mask |= masked[i];
            neighbours(spec, i, &strides, &mut nb);
            for &j in &nb {
                if member[j] && label[j] == usize::MAX {
                    label[j] = id;
                    queue.push_back(j);
                }
            }
        }
        nodes.sort_unstable();
        let diameter = diameter(spec, &nodes, &member);
        components.push(Component {
            nodes,
            diameter,
            touches_mask,
        });
    }
    components
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub count: usize,
    pub max_diameter: f64,
}

/// Diameter history of one component that survives to the deepest level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackedComponent {
    pub diameters: Vec<f64>,
    pub decays: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecessionReport {
    pub levels: Vec<f64>,
    pub components: Vec<LevelSummary>,
    pub tracked: Vec<TrackedComponent>,
    pub boundary_points: usize,
    pub includes_projection_point: bool,
    pub fat_recession_set: bool,
    pub spacing: f64,
}

/// Default analysis lattice: the field's window at spacing `1/32`.
pub fn default_grid(field: &HeightField) -> Result<GridSpec> {
    let (lo, hi) = field.analysis_window();
    GridSpec::covering(&lo, &hi, DEFAULT_SPACING)
}

/// Sublevel analysis at increasing `levels`. Each component at the deepest
/// level is traced back through the nested sublevel sets; it counts as a
/// boundary point when its diameter at the deepest level is at most half of
/// its diameter at the shallowest level. Non-decaying survivors mark a fat
/// recession set and are not counted.
pub fn recession_report(field: &HeightField, levels: &[f64], grid: Option<&GridSpec>) -> Result<RecessionReport> {
    if levels.is_empty() {
        return Err(Error::Parameter("no levels given".into()));
    }
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter("levels must be strictly increasing".into()));
    }
    let spec = match grid {
        Some(g) => g.clone(),
        None => default_grid(field)?,
    };
    check_grid(field, &spec)?;
    let (heights, masked) = node_heights(field, &spec);
    let per_level: Vec<Vec<Component>> = levels
        .par_iter()
        .map(|&m| components_below(&spec, &heights, &masked, m))
        .collect();

    let mut owner: Vec<Vec<usize>> = Vec::with_capacity(levels.len());
    for comps in &per_level {
        let mut map = vec![usize::MAX; spec.len()];
        for (id, c) in comps.iter().enumerate() {
            for &i in &c.nodes {
                map[i] = id;
            }
        }
        owner.push(map);
    }

    let deepest = per_level.last().expect("levels is non-empty");
    let mut tracked = Vec::with_capacity(deepest.len());
    for comp in deepest {
        let rep = comp.nodes[0];
        let diameters: Vec<f64> = per_level
            .iter()
            .zip(&owner)
            .map(|(comps, map)| match map[rep] {
                usize::MAX => f64::NAN,
                id => comps[id].diameter,
            })
            .collect();
        let first = diameters[0];
        let last = *diameters.last().expect("non-empty");
        tracked.push(TrackedComponent {
            decays: last <= 0.5 * first || last == 0.0,
            diameters,
        });
    }
    let finite_points = tracked.iter().filter(|t| t.decays).count();
    let fat = tracked.iter().any(|t| !t.decays);
    let includes_p0 = field.is_unbounded();
    Ok(RecessionReport {
        levels: levels.to_vec(),
        components: per_level
            .iter()
            .map(|comps| LevelSummary {
                count: comps.len(),
                max_diameter: comps.iter().map(|c| c.diameter).fold(0.0, f64::max),
            })
            .collect(),
        tracked,
        boundary_points: finite_points + usize::from(includes_p0),
        includes_projection_point: includes_p0,
        fat_recession_set: fat,
        spacing: spec.spacing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::height_field::Cap;

    fn cone_grid() -> GridSpec {
        GridSpec::covering(&[-1.0; 3], &[1.0; 3], 1.0 / 16.0).unwrap()
    }

    #[test]
    fn horosphere_has_no_sublevel() {
        let field = HeightField::horosphere(3, 1.0).unwrap();
        assert!(sublevel_components(&field, &cone_grid(), 1.0).unwrap().is_empty());
    }

    #[test]
    fn cone_sublevel_is_one_small_ball() {
        let field = HeightField::equidistant_cone(3, 1.0).unwrap();
        for (m, bound) in [(2.0, 2.0 * (-2.0f64).exp()), (4.0, 2.0 * (-4.0f64).exp())] {
            let comps = sublevel_components(&field, &cone_grid(), m).unwrap();
            assert_eq!(comps.len(), 1);
            assert!(comps[0].touches_mask);
            assert!(comps[0].diameter <= bound, "{} > {bound}", comps[0].diameter);
        }
    }

    #[test]
    fn boundary_point_counts() {
        let levels = [1.0, 2.0, 3.0, 4.0];
        let cone = HeightField::equidistant_cone(3, 1.0).unwrap();
        let rep = recession_report(&cone, &levels, Some(&cone_grid())).unwrap();
        assert_eq!(rep.boundary_points, 2);
        assert!(!rep.fat_recession_set);
        let horo = HeightField::horosphere(3, 1.0).unwrap();
        assert_eq!(recession_report(&horo, &levels, Some(&cone_grid())).unwrap().boundary_points, 1);
        let cap = HeightField::sphere_cap(3, 2.0, 1.0, Cap::Lower).unwrap();
        let rep = recession_report(&cap, &levels, None).unwrap();
        assert_eq!(rep.boundary_points, 0);
        assert!(!rep.includes_projection_point);
    }

    #[test]
    fn tilted_plane_recession_is_fat() {
        let plane = HeightField::tilted_plane(3, 1.0).unwrap();
        let grid = GridSpec::covering(&[0.0, -1.0, -1.0], &[2.0, 1.0, 1.0], 1.0 / 16.0).unwrap();
        let rep = recession_report(&plane, &[1.0, 2.0], Some(&grid)).unwrap();
        assert!(rep.fat_recession_set);
    }

    #[test]
    fn level_validation() {
        let cone = HeightField::equidistant_cone(3, 1.0).unwrap();
        assert!(recession_report(&cone, &[], None).is_err());
        assert!(recession_report(&cone, &[2.0, 1.0], None).is_err());
    }
}
