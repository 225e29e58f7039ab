//! Discrete p-Dirichlet energy on lattices, its minimizer, the comparison
//! test and the viscosity probe for `h = log f`.
//!
//! The energy of a cell is `(|Du|² + ε²)^{p/2} hⁿ`, where `|Du|²` sums, per
//! axis, the mean of the squared forward differences over the cell's
//! `2ⁿ⁻¹` parallel edges. Averaging squares (not differences) keeps the
//! checkerboard mode out of the kernel; at `p = 2` the minimizer solves the
//! standard `2n+1`-point Laplace equation.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::height_field::HeightField;
use crate::linalg::pairwise_sum;
use crate::report::fmt_f64;

/// Comparison tolerance used by [`comparison_check`].
pub const COMPARISON_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub p: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
    /// Relative energy decrease below which an iteration counts as stalled.
    pub tolerance: f64,
    /// Stop once `max |∂E/∂uᵢ| / hⁿ` drops below this.
    pub residual_tolerance: f64,
    /// Sufficient-decrease constant of the backtracking rule.
    pub armijo: f64,
    /// Step shrink factor of the backtracking rule.
    pub shrink: f64,
    pub max_backtracks: usize,
}

impl SolverConfig {
    pub fn new(p: f64) -> Self {
        Self {
            p,
            epsilon: 1e-8,
            max_iterations: 20_000,
            tolerance: 1e-20,
            residual_tolerance: 1e-10,
            armijo: 1e-4,
            shrink: 0.5,
            max_backtracks: 60,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Parameter(m.to_string()));
        if !(self.p >= 2.0 && self.p.is_finite()) {
            return bad("p must be a finite value ≥ 2");
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if !(self.tolerance > 0.0 && self.residual_tolerance > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0 && self.shrink > 0.0 && self.shrink < 1.0) {
            return bad("backtracking parameters must lie in (0, 1)");
        }
        if self.max_iterations == 0 || self.max_backtracks == 0 {
            return bad("iteration limits must be positive");
        }
        Ok(())
    }
}

/// Cell bookkeeping shared by energy, gradient and line search.
struct Lattice {
    spec: GridSpec,
    strides: Vec<usize>,
    /// Flat offsets of the `2ⁿ` cell corners from the low corner.
    corners: Vec<usize>,
    /// Per axis, the `(low, high)` corner pairs of the parallel edges.
    edges: Vec<Vec<(usize, usize)>>,
    /// Indexed by the low-corner node; false where no active cell starts.
    active: Vec<bool>,
    /// `1 / (2ⁿ⁻¹ h²)`.
    edge_scale: f64,
    volume: f64,
}

impl Lattice {
    fn new(u: &GridFunction, include: impl Fn(&[f64]) -> bool + Sync) -> Self {
        let spec = u.spec().clone();
        let n = spec.ndim();
        let strides = spec.strides();
        let corners: Vec<usize> = (0..1usize << n)
            .map(|k| (0..n).filter(|d| k >> d & 1 == 1).map(|d| strides[d]).sum())
            .collect();
        let edges = (0..n)
            .map(|d| {
                (0..1usize << n)
                    .filter(|k| k >> d & 1 == 0)
                    .map(|k| (k, k | 1 << d))
                    .collect()
            })
            .collect();
        let values = u.values();
        let half = spec.spacing * 0.5;
        let active = (0..spec.len())
            .into_par_iter()
            .map(|b| {
                let m = spec.multi_index(b);
                if m.iter().zip(&spec.dims).any(|(i, d)| i + 1 >= *d) {
                    return false;
                }
                if corners.iter().any(|&o| values[b + o] == f64::NEG_INFINITY) {
                    return false;
                }
                let center: Vec<f64> = spec.point(&m).iter().map(|c| c + half).collect();
                include(&center)
            })
            .collect();
        let edge_scale = 1.0 / ((1usize << (n - 1)) as f64 * spec.spacing * spec.spacing);
        let volume = spec.cell_volume();
        Self {
            spec,
            strides,
            corners,
            edges,
            active,
            edge_scale,
            volume,
        }
    }

    fn cell_sq(&self, u: &[f64], b: usize) -> f64 {
        let mut s = 0.0;
        for axis in &self.edges {
            for &(lo, hi) in axis {
                let d = u[b + self.corners[hi]] - u[b + self.corners[lo]];
                s += d * d;
            }
        }
        s * self.edge_scale
    }

    /// `(|Du|², ⟨Du, Dv⟩, |Dv|²)` on one cell.
    fn cell_cross(&self, u: &[f64], v: &[f64], b: usize) -> (f64, f64, f64) {
        let (mut a, mut c, mut e) = (0.0, 0.0, 0.0);
        for axis in &self.edges {
            for &(lo, hi) in axis {
                let (i, j) = (b + self.corners[lo], b + self.corners[hi]);
                let du = u[j] - u[i];
                let dv = v[j] - v[i];
                a += du * du;
                c += du * dv;
                e += dv * dv;
            }
        }
        (a * self.edge_scale, c * self.edge_scale, e * self.edge_scale)
    }

    fn energy(&self, u: &[f64], p: f64, eps: f64) -> f64 {
        let terms: Vec<f64> = (0..self.active.len())
            .into_par_iter()
            .map(|b| {
                if self.active[b] {
                    (self.cell_sq(u, b) + eps * eps).powf(0.5 * p) * self.volume
                } else {
                    0.0
                }
            })
            .collect();
        pairwise_sum(&terms)
    }

    /// `∂E/∂uᵢ`, zero on fixed nodes. Each node gathers from its own cells,
    /// so the result does not depend on thread scheduling.
    fn gradient(&self, u: &[f64], fixed: &[bool], p: f64, eps: f64) -> Vec<f64> {
        let weights: Vec<f64> = (0..self.active.len())
            .into_par_iter()
            .map(|b| {
                if self.active[b] {
                    0.5 * p * (self.cell_sq(u, b) + eps * eps).powf(0.5 * p - 1.0) * self.volume
                } else {
                    0.0
                }
            })
            .collect();
        let n = self.spec.ndim();
        (0..u.len())
            .into_par_iter()
            .map(|i| {
                if fixed[i] {
                    return 0.0;
                }
                let m = self.spec.multi_index(i);
                let mut g = 0.0;
                for (k, &off) in self.corners.iter().enumerate() {
                    let fits = (0..n).all(|d| {
                        let bit = k >> d & 1;
                        m[d] >= bit && m[d] - bit + 1 < self.spec.dims[d]
                    });
                    if !fits {
                        continue;
                    }
                    let b = i - off;
                    let w = weights[b];
                    if w == 0.0 {
                        continue;
                    }
                    let mut s = 0.0;
                    for d in 0..n {
                        let other = if k >> d & 1 == 0 {
                            i + self.strides[d]
                        } else {
                            i - self.strides[d]
                        };
                        s += u[i] - u[other];
                    }
                    g += w * 2.0 * self.edge_scale * s;
                }
                g
            })
            .collect()
    }
}

/// Per-cell data for the line search along a fixed direction.
struct Ray {
    base: Vec<f64>,
    cross: Vec<f64>,
    quad: Vec<f64>,
    volume: f64,
    half_p: f64,
}

impl Ray {
    fn new(lat: &Lattice, u: &[f64], dir: &[f64], p: f64, eps: f64) -> Self {
        let cells: Vec<(f64, f64, f64)> = (0..lat.active.len())
            .into_par_iter()
            .map(|b| {
                if lat.active[b] {
                    let (a, c, e) = lat.cell_cross(u, dir, b);
                    (a + eps * eps, c, e)
                } else {
                    (1.0, 0.0, 0.0)
                }
            })
            .collect();
        let (base, rest): (Vec<f64>, Vec<(f64, f64)>) = cells.into_iter().map(|(a, c, e)| (a, (c, e))).unzip();
        let (cross, quad) = rest.into_iter().unzip();
        Self {
            base,
            cross,
            quad,
            volume: lat.volume,
            half_p: 0.5 * p,
        }
    }

    fn slope(&self) -> f64 {
        let q = self.half_p;
        let t: Vec<f64> = (0..self.base.len())
            .map(|i| q * self.base[i].powf(q - 1.0) * 2.0 * self.cross[i])
            .collect();
        pairwise_sum(&t) * self.volume
    }

    fn curvature(&self) -> f64 {
        let q = self.half_p;
        let t: Vec<f64> = (0..self.base.len())
            .map(|i| {
                let a = self.base[i];
                let b = self.cross[i];
                q * (q - 1.0) * a.powf(q - 2.0) * 4.0 * b * b + q * a.powf(q - 1.0) * 2.0 * self.quad[i]
            })
            .collect();
        pairwise_sum(&t) * self.volume
    }

    /// `E(u + αd) − E(u)` without cancellation.
    fn delta(&self, alpha: f64) -> f64 {
        let q = self.half_p;
        let t: Vec<f64> = (0..self.base.len())
            .into_par_iter()
            .map(|i| {
                let a = self.base[i];
                let d = 2.0 * alpha * self.cross[i] + alpha * alpha * self.quad[i];
                if d == 0.0 {
                    return 0.0;
                }
                let r = (d / a).max(-1.0);
                a.powf(q) * (q * r.ln_1p()).exp_m1()
            })
            .collect();
        pairwise_sum(&t) * self.volume
    }
}

fn check_finite_free(u: &GridFunction) -> Result<()> {
    if let Some(i) = u
        .values()
        .iter()
        .zip(u.boundary_mask())
        .position(|(v, m)| !*m && !v.is_finite())
    {
        return Err(Error::Data(format!(
            "non-finite value at unmasked node {:?}",
            u.spec().multi_index(i)
        )));
    }
    Ok(())
}

/// `Σ_cells (|Du|² + ε²)^{p/2} hⁿ`; cells touching an excised node are skipped.
pub fn p_dirichlet_energy(u: &GridFunction, p: f64, epsilon: f64) -> Result<f64> {
    p_dirichlet_energy_where(u, p, epsilon, |_| true)
}

/// Energy restricted to cells whose center satisfies `include`.
pub fn p_dirichlet_energy_where<P>(u: &GridFunction, p: f64, epsilon: f64, include: P) -> Result<f64>
where
    P: Fn(&[f64]) -> bool + Sync,
{
    if !(p >= 1.0) || !(epsilon >= 0.0) {
        return Err(Error::Parameter(format!("bad energy parameters p={p}, epsilon={epsilon}")));
    }
    check_finite_free(u)?;
    let lat = Lattice::new(u, include);
    Ok(lat.energy(u.values(), p, epsilon))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Residual,
    EnergyDecrease,
    /// No step along steepest descent passes the sufficient-decrease test.
    Stalled,
    MaxIterations,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub energy: f64,
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub solution: GridFunction,
    pub trace: Vec<TraceRow>,
    pub converged: bool,
    pub stop: StopReason,
    pub iterations: usize,
    /// Final `max |∂E/∂uᵢ| / hⁿ` over free nodes.
    pub residual: f64,
}

impl SolveResult {
    pub fn trace_is_monotone(&self) -> bool {
        self.trace.windows(2).all(|w| w[1].energy <= w[0].energy)
    }

    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iteration", "energy", "step"])?;
        for r in &self.trace {
            w.write_record([r.iteration.to_string(), fmt_f64(r.energy), fmt_f64(r.step)])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let t: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    pairwise_sum(&t)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Minimizes the regularized p-Dirichlet energy over unmasked nodes, with
/// masked nodes held at their values. Interior values of `data` are the
/// initial guess.
///
/// Nonlinear conjugate gradients (Polak–Ribière, restarted on loss of
/// descent) with a Newton first trial step and halving backtracking. Each
/// recorded energy is the previous one plus the accepted decrease, so the
/// trace is non-increasing by construction.
pub fn solve_p_harmonic(data: &GridFunction, config: &SolverConfig) -> Result<SolveResult> {
    config.validate()?;
    check_finite_free(data)?;
    let (p, eps) = (config.p, config.epsilon);
    let lat = Lattice::new(data, |_| true);
    let fixed = data.boundary_mask().to_vec();
    let mut u = data.values().to_vec();
    let vol = lat.volume;

    let mut energy = lat.energy(&u, p, eps);
    let mut trace = vec![TraceRow {
        iteration: 0,
        energy,
        step: 0.0,
    }];
    let mut g = lat.gradient(&u, &fixed, p, eps);
    let mut residual = max_abs(&g) / vol;
    let mut dir: Vec<f64> = g.iter().map(|x| -x).collect();
    let mut steepest = true;
    let mut quiet = 0usize;
    let mut stop = StopReason::MaxIterations;
    let mut iterations = 0usize;

    if residual < config.residual_tolerance {
        stop = StopReason::Residual;
    } else {
        while iterations < config.max_iterations {
            let ray = Ray::new(&lat, &u, &dir, p, eps);
            let slope = ray.slope();
            if !(slope < 0.0) {
                if steepest {
                    stop = StopReason::Stalled;
                    break;
                }
                dir = g.iter().map(|x| -x).collect();
                steepest = true;
                continue;
            }
            let curv = ray.curvature();
            let mut alpha = if curv > 0.0 { -slope / curv } else { 1.0 };
            let mut accepted = None;
            for _ in 0..config.max_backtracks {
                let de = ray.delta(alpha);
                if de <= config.armijo * alpha * slope {
                    accepted = Some(de);
                    break;
                }
                alpha *= config.shrink;
            }
            let Some(de) = accepted else {
                if steepest {
                    stop = StopReason::Stalled;
                    break;
                }
                dir = g.iter().map(|x| -x).collect();
                steepest = true;
                continue;
            };
            iterations += 1;
            for ((ui, di), f) in u.iter_mut().zip(&dir).zip(&fixed) {
                if !f {
                    *ui += alpha * di;
                }
            }
            let previous = energy;
            energy += de;
            trace.push(TraceRow {
                iteration: iterations,
                energy,
                step: alpha,
            });
            let g_new = lat.gradient(&u, &fixed, p, eps);
            residual = max_abs(&g_new) / vol;
            if residual < config.residual_tolerance {
                stop = StopReason::Residual;
                break;
            }
            if -de <= config.tolerance * previous.abs().max(f64::MIN_POSITIVE) {
                quiet += 1;
                if quiet >= 5 {
                    stop = StopReason::EnergyDecrease;
                    break;
                }
            } else {
                quiet = 0;
            }
            let diff: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
            let beta = (dot(&g_new, &diff) / dot(&g, &g)).max(0.0);
            for (d, gn) in dir.iter_mut().zip(&g_new) {
                *d = -gn + beta * *d;
            }
            steepest = beta == 0.0;
            g = g_new;
        }
    }

    let mut solution = data.clone();
    solution.set_interior(&u)?;
    Ok(SolveResult {
        solution,
        trace,
        converged: stop != StopReason::MaxIterations,
        stop,
        iterations,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    /// `min (v − u)` over interior nodes where both are finite.
    pub min_difference: f64,
    pub argmin: Option<Vec<f64>>,
    /// Interior nodes with `v − u < −tolerance`.
    pub violations: Vec<usize>,
    pub tolerance: f64,
}

impl ComparisonReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `u ≤ v` on the interior, given that it holds on the masked nodes.
pub fn comparison_check(u: &GridFunction, v: &GridFunction) -> Result<ComparisonReport> {
    comparison_check_with(u, v, COMPARISON_TOL)
}

pub fn comparison_check_with(u: &GridFunction, v: &GridFunction, tolerance: f64) -> Result<ComparisonReport> {
    if u.spec() != v.spec() {
        return Err(Error::Precondition("functions live on different grids".into()));
    }
    let mask = v.boundary_mask();
    for (i, (a, b)) in u.values().iter().zip(v.values()).enumerate() {
        if (mask[i] || u.boundary_mask()[i]) && *a != f64::NEG_INFINITY && *b < *a - tolerance {
            return Err(Error::Precondition(format!(
                "boundary values do not dominate at node {:?}: {b} < {a}",
                u.spec().multi_index(i)
            )));
        }
    }
    let mut min_difference = f64::INFINITY;
    let mut argmin = None;
    let mut violations = Vec::new();
    for (i, (a, b)) in u.values().iter().zip(v.values()).enumerate() {
        if mask[i] || u.boundary_mask()[i] || !a.is_finite() || !b.is_finite() {
            continue;
        }
        let d = b - a;
        if d < min_difference {
            min_difference = d;
            argmin = Some(u.spec().node_point(i));
        }
        if d < -tolerance {
            violations.push(i);
        }
    }
    Ok(ComparisonReport {
        min_difference,
        argmin,
        violations,
        tolerance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub subharmonic: bool,
    pub min_margin: f64,
    pub witness: Option<Vec<f64>>,
    pub tolerance: f64,
    pub spacing: f64,
    pub excised_nodes: usize,
    pub iterations: usize,
    pub converged: bool,
}

/// Samples `h = log f` on the box `[lower, upper]` at `spacing`, solves the
/// `p = n` Dirichlet problem with boundary values `h` and reports whether
/// the solution stays above `h − 10 spacing²` inside. Nodes with `h = −∞`
/// are excised together with their neighbours.
pub fn viscosity_probe(
    field: &HeightField,
    lower: &[f64],
    upper: &[f64],
    spacing: f64,
    config: &SolverConfig,
) -> Result<ProbeReport> {
    let n = field.dim();
    if (config.p - n as f64).abs() > 0.0 {
        return Err(Error::Parameter(format!("probe needs p = n = {n}, got p = {}", config.p)));
    }
    let spec = GridSpec::covering(lower, upper, spacing)?;
    let hole = |x: &[f64]| field.domain().in_box(x) && field.is_masked(x);
    let values = (0..spec.len())
        .map(|i| {
            let x = spec.node_point(i);
            if hole(&x) {
                Ok(0.0)
            } else {
                field.log_height(&x)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut h = GridFunction::new(spec, values)?;
    let excised_nodes = h.excise_where(hole);
    let solved = solve_p_harmonic(&h, config)?;
    let tolerance = 10.0 * spacing * spacing;
    let cmp = comparison_check_with(&h, &solved.solution, tolerance)?;
    Ok(ProbeReport {
        subharmonic: cmp.holds(),
        min_margin: cmp.min_difference,
        witness: cmp.argmin,
        tolerance,
        spacing,
        excised_nodes,
        iterations: solved.iterations,
        converged: solved.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(n: usize, nodes: usize) -> GridSpec {
        GridSpec::new(vec![nodes; n], 1.0 / (nodes - 1) as f64, vec![0.0; n]).unwrap()
    }

    #[test]
    fn constant_has_zero_energy() {
        let u = GridFunction::constant(cube(3, 5), 2.5).unwrap();
        assert_eq!(p_dirichlet_energy(&u, 3.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn linear_energy_is_volume() {
        let u = GridFunction::sample(cube(3, 9), |x| x[0]).unwrap();
        let e = p_dirichlet_energy(&u, 3.0, 0.0).unwrap();
        assert!((e - 1.0).abs() < 1e-12, "{e}");
    }

    #[test]
    fn gradient_matches_differences() {
        let spec = cube(3, 6);
        let u = GridFunction::sample(spec, |x| (x[0] * 3.0).sin() + x[1] * x[2] * x[2]).unwrap();
        let lat = Lattice::new(&u, |_| true);
        let fixed = u.boundary_mask().to_vec();
        let g = lat.gradient(u.values(), &fixed, 3.0, 1e-3);
        let mut vals = u.values().to_vec();
        let i = u.spec().index(&[2, 3, 2]);
        let step = 1e-6;
        vals[i] += step;
        let ep = lat.energy(&vals, 3.0, 1e-3);
        vals[i] -= 2.0 * step;
        let em = lat.energy(&vals, 3.0, 1e-3);
        let fd = (ep - em) / (2.0 * step);
        assert!((fd - g[i]).abs() < 1e-8 * (1.0 + g[i].abs()), "{fd} vs {}", g[i]);
    }

    #[test]
    fn affine_boundary_gives_affine_solution() {
        let spec = cube(3, 7);
        let exact = GridFunction::sample(spec.clone(), |x| 0.3 * x[0] - 1.2 * x[1] + 0.5 * x[2] + 2.0).unwrap();
        let mut start = exact.clone();
        start.set_interior(&vec![0.0; spec.len()]).unwrap();
        let out = solve_p_harmonic(&start, &SolverConfig::new(3.0)).unwrap();
        assert!(out.converged);
        assert!(out.trace_is_monotone());
        assert!(out.solution.max_abs_diff(&exact) < 1e-8);
    }

    #[test]
    fn constant_boundary_gives_constant() {
        let spec = cube(3, 6);
        let mut start = GridFunction::constant(spec.clone(), 1.5).unwrap();
        start.set_interior(&vec![-3.0; spec.len()]).unwrap();
        let mut cfg = SolverConfig::new(4.0);
        cfg.residual_tolerance = 1e-300;
        let out = solve_p_harmonic(&start, &cfg).unwrap();
        let target = GridFunction::constant(spec, 1.5).unwrap();
        // Degenerate at the minimizer: the residual falls like |Du|³.
        assert!(out.solution.max_abs_diff(&target) < 1e-7);
    }

    #[test]
    fn config_validation() {
        let mut c = SolverConfig::new(1.5);
        assert!(c.validate().is_err());
        c.p = 3.0;
        c.epsilon = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn comparison_precondition() {
        let spec = cube(3, 4);
        let u = GridFunction::constant(spec.clone(), 1.0).unwrap();
        let v = GridFunction::constant(spec, 0.0).unwrap();
        assert!(matches!(comparison_check(&u, &v), Err(Error::Precondition(_))));
        let rep = comparison_check(&u, &u).unwrap();
        assert_eq!(rep.min_difference, 0.0);
        assert!(rep.holds());
    }
}
