//! Graph hypersurfaces `x_{n+1} = f(x_1, …, x_n)` in the upper half-space.
//!
//! Catalog surfaces carry closed-form first and second derivatives; sampled
//! fields are interpolated from a [`GridFunction`].

use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{interpolate_jet, GridFunction, GridSpec};
use crate::linalg::euclidean_norm;

pub const DEFAULT_MASK_RADIUS: f64 = 1e-3;
pub const DEFAULT_FD_STEP: f64 = 1e-4;
pub const DEFAULT_INTERPOLATION_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cap {
    Lower,
    Upper,
}

/// Parameters of a closed-form catalog surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Catalog {
    /// `f ≡ height`.
    Horosphere { height: f64 },
    /// Euclidean sphere of radius `radius` centred at height `center_height`.
    GeodesicSphereCap {
        center_height: f64,
        radius: f64,
        cap: Cap,
    },
    /// `f = slope·|x|`, the equidistant hypersurface about the vertical axis.
    EquidistantCone {
        slope: f64,
        #[serde(default = "default_mask_radius")]
        mask_radius: f64,
    },
    /// `f = slope·x₁` on the half space `x₁ > 0`.
    TiltedPlane { slope: f64 },
}

fn default_mask_radius() -> f64 {
    DEFAULT_MASK_RADIUS
}

fn default_order() -> usize {
    DEFAULT_INTERPOLATION_ORDER
}

/// JSON surface descriptor, e.g.
/// `{"kind": "equidistant_cone", "n": 3, "slope": 1.0, "mask_radius": 1e-3}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceDescriptor {
    Horosphere {
        n: usize,
        height: f64,
    },
    GeodesicSphereCap {
        n: usize,
        center_height: f64,
        radius: f64,
        cap: Cap,
    },
    EquidistantCone {
        n: usize,
        slope: f64,
        #[serde(default = "default_mask_radius")]
        mask_radius: f64,
    },
    TiltedPlane {
        n: usize,
        slope: f64,
    },
    /// Paths are resolved relative to the working directory. `unbounded`
    /// declares that the sampled graph continues past the grid, which adds
    /// the point at infinity to the asymptotic boundary.
    SampledGrid {
        header: PathBuf,
        values: PathBuf,
        #[serde(default = "default_order")]
        order: usize,
        #[serde(default)]
        unbounded: bool,
    },
}

impl SurfaceDescriptor {
    pub fn build(&self) -> Result<HeightField> {
        match self {
            Self::Horosphere { n, height } => {
                make_catalog_surface(&Catalog::Horosphere { height: *height }, *n)
            }
            Self::GeodesicSphereCap {
                n,
                center_height,
                radius,
                cap,
            } => make_catalog_surface(
                &Catalog::GeodesicSphereCap {
                    center_height: *center_height,
                    radius: *radius,
                    cap: *cap,
                },
                *n,
            ),
            Self::EquidistantCone {
                n,
                slope,
                mask_radius,
            } => make_catalog_surface(
                &Catalog::EquidistantCone {
                    slope: *slope,
                    mask_radius: *mask_radius,
                },
                *n,
            ),
            Self::TiltedPlane { n, slope } => {
                make_catalog_surface(&Catalog::TiltedPlane { slope: *slope }, *n)
            }
            Self::SampledGrid {
                header,
                values,
                order,
                unbounded,
            } => Ok(HeightField::sampled(GridFunction::load(header, values)?, *order)?
                .with_unbounded_domain(*unbounded)),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn contains(&self, x: &[f64]) -> bool {
        let d2: f64 = x
            .iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        d2 <= self.radius * self.radius
    }
}

/// Axis-aligned box (possibly unbounded) minus excised balls.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub excised: Vec<Ball>,
    /// Whether the graph extends to infinity in the horosphere coordinates.
    pub unbounded: bool,
}

impl Domain {
    fn whole_space(n: usize) -> Self {
        Self {
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
            excised: Vec::new(),
            unbounded: true,
        }
    }

    pub fn in_box(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    pub fn in_mask(&self, x: &[f64]) -> bool {
        self.excised.iter().any(|b| b.contains(x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceKind {
    Catalog(Catalog),
    SampledGrid { grid: GridFunction, order: usize },
}

/// A positive graph function over a domain in `ℝⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightField {
    kind: SurfaceKind,
    n: usize,
    domain: Domain,
}

/// Second-order jet of the graph function at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub x: DVector<f64>,
    pub f: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

impl Jet2 {
    pub fn new(x: Vec<f64>, f: f64, grad: Vec<f64>, hess: DMatrix<f64>) -> Result<Self> {
        let n = x.len();
        if grad.len() != n || hess.nrows() != n || hess.ncols() != n {
            return Err(Error::Parameter("jet component dimensions disagree".into()));
        }
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::Parameter(format!("jet value {f} must be positive")));
        }
        Ok(Self {
            x: DVector::from_vec(x),
            f,
            grad: DVector::from_vec(grad),
            hess,
        })
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    /// `|Df|²`.
    pub fn grad_norm_sq(&self) -> f64 {
        self.grad.norm_squared()
    }

    pub fn laplacian(&self) -> f64 {
        self.hess.trace()
    }

    pub fn hess_asymmetry(&self) -> f64 {
        crate::linalg::max_abs_diff(&self.hess, &self.hess.transpose())
    }
}

/// Builds a catalog surface in dimension `n`.
pub fn make_catalog_surface(kind: &Catalog, n: usize) -> Result<HeightField> {
    if n < 2 {
        return Err(Error::Parameter(format!("dimension n = {n}, need n >= 2")));
    }
    let positive = |name: &str, v: f64| -> Result<()> {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::Parameter(format!("{name} = {v} must be positive")))
        }
    };
    let mut domain = Domain::whole_space(n);
    match kind {
        Catalog::Horosphere { height } => positive("height", *height)?,
        Catalog::GeodesicSphereCap {
            center_height,
            radius,
            ..
        } => {
            positive("radius", *radius)?;
            if !(center_height > radius) {
                return Err(Error::Parameter(format!(
                    "sphere needs center height {center_height} > radius {radius}"
                )));
            }
            domain.lower = vec![-radius; n];
            domain.upper = vec![*radius; n];
            domain.unbounded = false;
        }
        Catalog::EquidistantCone { slope, mask_radius } => {
            positive("slope", *slope)?;
            positive("mask_radius", *mask_radius)?;
            domain.excised.push(Ball {
                center: vec![0.0; n],
                radius: *mask_radius,
            });
        }
        Catalog::TiltedPlane { slope } => {
            positive("slope", *slope)?;
            domain.lower[0] = 0.0;
        }
    }
    Ok(HeightField {
        kind: SurfaceKind::Catalog(kind.clone()),
        n,
        domain,
    })
}

impl HeightField {
    pub fn horosphere(n: usize, height: f64) -> Result<Self> {
        make_catalog_surface(&Catalog::Horosphere { height }, n)
    }

    pub fn sphere_cap(n: usize, center_height: f64, radius: f64, cap: Cap) -> Result<Self> {
        make_catalog_surface(
            &Catalog::GeodesicSphereCap {
                center_height,
                radius,
                cap,
            },
            n,
        )
    }

    pub fn equidistant_cone(n: usize, slope: f64) -> Result<Self> {
        make_catalog_surface(
            &Catalog::EquidistantCone {
                slope,
                mask_radius: DEFAULT_MASK_RADIUS,
            },
            n,
        )
    }

    pub fn tilted_plane(n: usize, slope: f64) -> Result<Self> {
        make_catalog_surface(&Catalog::TiltedPlane { slope }, n)
    }

    /// Sampled field of positive node values, interpolated with polynomials
    /// of degree `order` per axis.
    pub fn sampled(grid: GridFunction, order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::Parameter(format!(
                "interpolation order {order} cannot represent second derivatives"
            )));
        }
        let spec = grid.spec().clone();
        if spec.dims.iter().any(|&d| d <= order) {
            return Err(Error::Parameter(format!(
                "interpolation order {order} needs more than {order} nodes per axis"
            )));
        }
        if spec.ndim() < 2 {
            return Err(Error::Parameter("sampled field needs n >= 2".into()));
        }
        if let Some(v) = grid.values().iter().find(|v| v.is_finite() && **v <= 0.0) {
            return Err(Error::Parameter(format!(
                "sampled height {v} leaves the upper half-space"
            )));
        }
        let domain = Domain {
            lower: spec.origin.clone(),
            upper: spec.upper(),
            excised: Vec::new(),
            unbounded: false,
        };
        Ok(Self {
            n: spec.ndim(),
            kind: SurfaceKind::SampledGrid { grid, order },
            domain,
        })
    }

    /// Samples `self` on `spec` and wraps the result as a sampled field.
    pub fn resample(&self, spec: GridSpec, order: usize) -> Result<Self> {
        let grid = GridFunction::sample(spec, |x| self.value(x).unwrap_or(f64::NAN))?;
        Self::sampled(grid, order)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &SurfaceKind {
        &self.kind
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn catalog(&self) -> Option<&Catalog> {
        match &self.kind {
            SurfaceKind::Catalog(c) => Some(c),
            SurfaceKind::SampledGrid { .. } => None,
        }
    }

    pub fn is_unbounded(&self) -> bool {
        self.domain.unbounded
    }

    /// Declares whether the sampled graph continues to infinity.
    pub fn with_unbounded_domain(mut self, unbounded: bool) -> Self {
        self.domain.unbounded = unbounded;
        self
    }

    pub fn with_excised_ball(mut self, center: Vec<f64>, radius: f64) -> Self {
        self.domain.excised.push(Ball { center, radius });
        self
    }

    pub fn is_masked(&self, x: &[f64]) -> bool {
        self.domain.in_mask(x)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::domain(
                x,
                format!("expected {} coordinates", self.n),
            ));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain(x, "non-finite coordinate"));
        }
        if !self.domain.in_box(x) {
            return Err(Error::domain(x, "outside the domain box"));
        }
        if self.domain.in_mask(x) {
            return Err(Error::domain(x, "inside an excised ball"));
        }
        if let SurfaceKind::Catalog(Catalog::GeodesicSphereCap { radius, .. }) = &self.kind {
            if euclidean_norm(x) >= *radius {
                return Err(Error::domain(x, "outside the projected sphere"));
            }
        }
        Ok(())
    }

    /// `f(x)`.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        let f = match &self.kind {
            SurfaceKind::Catalog(c) => match c {
                Catalog::Horosphere { height } => *height,
                Catalog::GeodesicSphereCap {
                    center_height,
                    radius,
                    cap,
                } => {
                    let s = (radius * radius - x.iter().map(|v| v * v).sum::<f64>()).sqrt();
                    match cap {
                        Cap::Lower => center_height - s,
                        Cap::Upper => center_height + s,
                    }
                }
                Catalog::EquidistantCone { slope, .. } => slope * euclidean_norm(x),
                Catalog::TiltedPlane { slope } => slope * x[0],
            },
            SurfaceKind::SampledGrid { grid, order } => interpolate_jet(grid, *order, x)?.0,
        };
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::domain(x, format!("height {f} is not positive")));
        }
        Ok(f)
    }

    /// Hyperbolic height `h = log f`, with `-inf` on excised balls.
    pub fn log_height(&self, x: &[f64]) -> Result<f64> {
        if x.len() == self.n && self.domain.in_box(x) && self.domain.in_mask(x) {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(self.value(x)?.ln())
    }

    /// Second-order jet: exact for catalog kinds, interpolated for grids.
    pub fn eval_jet(&self, x: &[f64]) -> Result<Jet2> {
        self.check_point(x)?;
        let n = self.n;
        let (f, grad, hess) = match &self.kind {
            SurfaceKind::Catalog(c) => match c {
                Catalog::Horosphere { height } => {
                    (*height, vec![0.0; n], DMatrix::zeros(n, n))
                }
                Catalog::GeodesicSphereCap {
                    center_height,
                    radius,
                    cap,
                } => {
                    let r2: f64 = x.iter().map(|v| v * v).sum();
                    let s = (radius * radius - r2).sqrt();
                    let sign = match cap {
                        Cap::Lower => 1.0,
                        Cap::Upper => -1.0,
                    };
                    let f = center_height - sign * s;
                    let grad = x.iter().map(|xi| sign * xi / s).collect();
                    let s3 = s * s * s;
                    let hess = DMatrix::from_fn(n, n, |i, j| {
                        let delta = if i == j { 1.0 / s } else { 0.0 };
                        sign * (delta + x[i] * x[j] / s3)
                    });
                    (f, grad, hess)
                }
                Catalog::EquidistantCone { slope, .. } => {
                    let r = euclidean_norm(x);
                    let grad = x.iter().map(|xi| slope * xi / r).collect();
                    let r3 = r * r * r;
                    let hess = DMatrix::from_fn(n, n, |i, j| {
                        let delta = if i == j { 1.0 / r } else { 0.0 };
                        slope * (delta - x[i] * x[j] / r3)
                    });
                    (slope * r, grad, hess)
                }
                Catalog::TiltedPlane { slope } => {
                    let mut grad = vec![0.0; n];
                    grad[0] = *slope;
                    (slope * x[0], grad, DMatrix::zeros(n, n))
                }
            },
            SurfaceKind::SampledGrid { grid, order } => {
                let (f, g, h) = interpolate_jet(grid, *order, x)?;
                (f, g, DMatrix::from_row_slice(n, n, &h))
            }
        };
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::domain(x, format!("height {f} is not positive")));
        }
        Jet2::new(x.to_vec(), f, grad, hess)
    }

    /// Box used for sublevel analysis and default sampling.
    pub fn analysis_window(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        match &self.kind {
            SurfaceKind::Catalog(Catalog::GeodesicSphereCap { radius, .. }) => {
                let half = 0.95 * radius / (n as f64).sqrt();
                (vec![-half; n], vec![half; n])
            }
            SurfaceKind::Catalog(Catalog::TiltedPlane { .. }) => {
                let mut lo = vec![-1.0; n];
                lo[0] = 0.0;
                let mut hi = vec![1.0; n];
                hi[0] = 2.0;
                (lo, hi)
            }
            SurfaceKind::Catalog(_) => (vec![-1.0; n], vec![1.0; n]),
            SurfaceKind::SampledGrid { .. } => (self.domain.lower.clone(), self.domain.upper.clone()),
        }
    }

    /// Draws one point from the default sampling region of the field: an
    /// annulus `0.5 ≤ |x| ≤ 2` for the cone, the inner 90 % ball for caps,
    /// `x₁ ∈ [0.5, 2]` for tilted planes, `[-1, 1]ⁿ` for horospheres and the
    /// interpolation-safe interior for grids.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.n;
        let unit_direction = |rng: &mut R| loop {
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r = euclidean_norm(&v);
            if r > 1e-3 && r <= 1.0 {
                return v.into_iter().map(|c| c / r).collect::<Vec<f64>>();
            }
        };
        match &self.kind {
            SurfaceKind::Catalog(Catalog::Horosphere { .. }) => {
                (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
            }
            SurfaceKind::Catalog(Catalog::EquidistantCone { .. }) => {
                let r = rng.gen_range(0.5..2.0);
                unit_direction(rng).into_iter().map(|c| c * r).collect()
            }
            SurfaceKind::Catalog(Catalog::GeodesicSphereCap { radius, .. }) => {
                let r = 0.9 * radius * rng.gen::<f64>().powf(1.0 / n as f64);
                unit_direction(rng).into_iter().map(|c| c * r).collect()
            }
            SurfaceKind::Catalog(Catalog::TiltedPlane { .. }) => (0..n)
                .map(|d| {
                    if d == 0 {
                        rng.gen_range(0.5..2.0)
                    } else {
                        rng.gen_range(-1.0..1.0)
                    }
                })
                .collect(),
            SurfaceKind::SampledGrid { grid, order } => {
                let spec = grid.spec();
                let margin = (*order as f64 / 2.0 + 1.0) * spec.spacing;
                let upper = spec.upper();
                (0..n)
                    .map(|d| rng.gen_range(spec.origin[d] + margin..upper[d] - margin))
                    .collect()
            }
        }
    }
}

/// Residuals of closed-form derivatives against central differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JetResidual {
    pub grad: f64,
    pub hess: f64,
}

impl JetResidual {
    pub fn max(&self) -> f64 {
        self.grad.max(self.hess)
    }
}

/// Default finite-difference step at `x`: `1e-4 · max(1, |x|)`.
pub fn default_step(x: &[f64]) -> f64 {
    DEFAULT_FD_STEP * euclidean_norm(x).max(1.0)
}

/// Compares `eval_jet` with 3-point central gradients and the standard
/// central-difference Hessian (5-point stencil per coordinate plane).
pub fn fd_validate_jet(field: &HeightField, x: &[f64], step: f64) -> Result<JetResidual> {
    if !(step > 0.0) {
        return Err(Error::Parameter(format!("step {step} must be positive")));
    }
    let jet = field.eval_jet(x)?;
    let n = field.dim();
    let at = |offsets: &[(usize, f64)]| -> Result<f64> {
        let mut y = x.to_vec();
        for &(d, s) in offsets {
            y[d] += s * step;
        }
        field.value(&y)
    };
    let f0 = field.value(x)?;
    let mut grad_res = 0.0_f64;
    let mut hess_res = 0.0_f64;
    for i in 0..n {
        let fp = at(&[(i, 1.0)])?;
        let fm = at(&[(i, -1.0)])?;
        let g = (fp - fm) / (2.0 * step);
        grad_res = grad_res.max((g - jet.grad[i]).abs());
        let hii = (fp - 2.0 * f0 + fm) / (step * step);
        hess_res = hess_res.max((hii - jet.hess[(i, i)]).abs());
        for j in (i + 1)..n {
            let fpp = at(&[(i, 1.0), (j, 1.0)])?;
            let fpm = at(&[(i, 1.0), (j, -1.0)])?;
            let fmp = at(&[(i, -1.0), (j, 1.0)])?;
            let fmm = at(&[(i, -1.0), (j, -1.0)])?;
            let hij = (fpp - fpm - fmp + fmm) / (4.0 * step * step);
            hess_res = hess_res
                .max((hij - jet.hess[(i, j)]).abs())
                .max((hij - jet.hess[(j, i)]).abs());
        }
    }
    Ok(JetResidual {
        grad: grad_res,
        hess: hess_res,
    })
}

/// Observed convergence order from residuals at steps `h` and `h / ratio`.
pub fn observed_order(coarse: f64, fine: f64, ratio: f64) -> f64 {
    (coarse / fine).ln() / ratio.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_parameter_errors() {
        assert!(HeightField::sphere_cap(3, 1.0, 1.0, Cap::Lower).is_err());
        assert!(HeightField::sphere_cap(3, 1.0, 2.0, Cap::Lower).is_err());
        assert!(HeightField::equidistant_cone(3, 0.0).is_err());
        assert!(HeightField::tilted_plane(3, -1.0).is_err());
        assert!(HeightField::horosphere(1, 1.0).is_err());
        assert!(HeightField::horosphere(3, 0.0).is_err());
    }

    #[test]
    fn horosphere_jet_is_flat() {
        let field = HeightField::horosphere(3, 1.0).unwrap();
        let jet = field.eval_jet(&[0.3, -2.0, 5.0]).unwrap();
        assert_eq!(jet.f, 1.0);
        assert!(jet.grad.iter().all(|v| *v == 0.0));
        assert!(jet.hess.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn cone_jet_at_unit_point() {
        let field = HeightField::equidistant_cone(3, 1.0).unwrap();
        let jet = field.eval_jet(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(jet.f, 1.0);
        assert_eq!(jet.grad.as_slice(), &[1.0, 0.0, 0.0]);
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0, 1.0]));
        assert_eq!(jet.hess, expected);
    }

    #[test]
    fn cap_jet_at_center() {
        let field = HeightField::sphere_cap(3, 2.0, 1.0, Cap::Lower).unwrap();
        let jet = field.eval_jet(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(jet.f, 1.0);
        assert!(jet.grad.iter().all(|v| *v == 0.0));
        assert_eq!(jet.hess, DMatrix::identity(3, 3));
        // Closed form f(x) = 2 - sqrt(1 - |x|^2).
        let x = [0.3, 0.2, -0.1];
        let r2: f64 = x.iter().map(|v| v * v).sum();
        assert!((field.value(&x).unwrap() - (2.0 - (1.0 - r2).sqrt())).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        let cone = HeightField::equidistant_cone(3, 1.0).unwrap();
        assert!(matches!(cone.eval_jet(&[0.0, 0.0, 0.0]), Err(Error::Domain { .. })));
        assert!(matches!(cone.eval_jet(&[5e-4, 0.0, 0.0]), Err(Error::Domain { .. })));
        assert!(cone.eval_jet(&[2e-3, 0.0, 0.0]).is_ok());
        assert!(cone.eval_jet(&[1.0, 0.0]).is_err());
        let cap = HeightField::sphere_cap(3, 2.0, 1.0, Cap::Lower).unwrap();
        assert!(cap.eval_jet(&[0.8, 0.8, 0.0]).is_err());
        let plane = HeightField::tilted_plane(3, 1.0).unwrap();
        assert!(plane.eval_jet(&[0.0, 0.0, 0.0]).is_err());
        assert!(plane.eval_jet(&[-1.0, 0.0, 0.0]).is_err());
        assert_eq!(
            cone.log_height(&[0.0, 0.0, 0.0]).unwrap(),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn fd_residuals_on_catalog_examples() {
        let horo = HeightField::horosphere(3, 1.0).unwrap();
        assert_eq!(fd_validate_jet(&horo, &[0.0, 0.0, 0.0], 1e-4).unwrap().max(), 0.0);
        let cone = HeightField::equidistant_cone(3, 1.0).unwrap();
        assert!(fd_validate_jet(&cone, &[1.0, 0.0, 0.0], 1e-4).unwrap().max() < 1e-7);
        let cap = HeightField::sphere_cap(3, 2.0, 1.0, Cap::Lower).unwrap();
        assert!(fd_validate_jet(&cap, &[0.3, 0.0, 0.0], 1e-4).unwrap().max() < 1e-6);
    }

    #[test]
    fn fd_stencil_leaving_domain_is_an_error() {
        let cone = HeightField::equidistant_cone(3, 1.0).unwrap();
        assert!(fd_validate_jet(&cone, &[1.5e-3, 0.0, 0.0], 1e-3).is_err());
    }

    #[test]
    fn descriptor_json() {
        let d = SurfaceDescriptor::from_json(
            r#"{"kind": "equidistant_cone", "n": 3, "slope": 1.0, "mask_radius": 1e-3}"#,
        )
        .unwrap();
        let field = d.build().unwrap();
        assert_eq!(field.dim(), 3);
        assert_eq!(field.domain().excised[0].radius, 1e-3);
        let d = SurfaceDescriptor::from_json(r#"{"kind": "equidistant_cone", "n": 3, "slope": 2.0}"#)
            .unwrap();
        assert_eq!(d.build().unwrap().domain().excised[0].radius, DEFAULT_MASK_RADIUS);
        let cap = SurfaceDescriptor::from_json(
            r#"{"kind": "geodesic_sphere_cap", "n": 3, "center_height": 2.0, "radius": 1.0, "cap": "lower"}"#,
        )
        .unwrap();
        assert!(cap.build().is_ok());
        assert!(SurfaceDescriptor::from_json(r#"{"kind": "tilted_plane", "n": 1, "slope": 1.0}"#)
            .unwrap()
            .build()
            .is_err());
    }

    #[test]
    fn default_step_scales_with_distance() {
        assert_eq!(default_step(&[0.1, 0.0]), 1e-4);
        assert!((default_step(&[3.0, 4.0]) - 5e-4).abs() < 1e-18);
    }
}
