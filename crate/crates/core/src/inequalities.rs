//! Adapted-frame quantities for graphs: the gradient-direction Ricci
//! curvature, the two-factor split of the mean curvature, the bound `H ≥ n`,
//! the n-subharmonic density of `log f`, and the convexity regimes.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{
    fundamental_forms, hessian_quadratic, hessian_square_quadratic, ricci_coordinate,
    ricci_eigenvalues, shape_spectrum, ShapeSpectrum,
};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::height_field::{HeightField, Jet2};
use crate::report::ScanRow;

/// Absolute slack for every inequality on O(1)-scaled quantities.
pub const INEQUALITY_TOL: f64 = 1e-9;
/// `|Df|` at or below this is treated as a critical point.
pub const DEGENERATE_GRADIENT: f64 = 1e-14;

/// A jet rotated so that `e₁` points along `Df`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedJet {
    pub jet: Jet2,
    /// Orthogonal matrix `R` with `R·Df = |Df| e₁`; the rotated Hessian is `R D²f Rᵀ`.
    pub rotation: DMatrix<f64>,
    pub degenerate: bool,
}

impl AdaptedJet {
    /// `f₁ = |Df|`.
    pub fn slope(&self) -> f64 {
        self.jet.grad[0]
    }
}

/// Householder reflection taking `Df/|Df|` to `e₁`; identity when the
/// gradient vanishes.
pub fn adapted_frame(jet: &Jet2) -> AdaptedJet {
    let n = jet.dim();
    let norm = jet.grad.norm();
    if norm <= DEGENERATE_GRADIENT {
        return AdaptedJet {
            jet: jet.clone(),
            rotation: DMatrix::identity(n, n),
            degenerate: true,
        };
    }
    let u = &jet.grad / norm;
    // Reflect about the bisector that avoids cancellation, then fix the sign
    // of the first row so the image is +e₁.
    let mut v = u.clone();
    let flip = u[0] >= 0.0;
    v[0] += if flip { 1.0 } else { -1.0 };
    let vv = v.norm_squared();
    let mut rotation = DMatrix::identity(n, n) - (&v * v.transpose()) * (2.0 / vv);
    if flip {
        rotation.row_mut(0).neg_mut();
    }
    let mut grad = &rotation * &jet.grad;
    for g in grad.iter_mut().skip(1) {
        *g = 0.0;
    }
    grad[0] = norm;
    let hess = &rotation * &jet.hess * rotation.transpose();
    let hess = (&hess + hess.transpose()) * 0.5;
    AdaptedJet {
        jet: Jet2 {
            x: jet.x.clone(),
            f: jet.f,
            grad,
            hess,
        },
        rotation,
        degenerate: false,
    }
}

/// Ricci curvature along the g-normalized gradient of `f`, by the closed
/// form in `H₁ = Σ f_ij f_i f_j` and `H₂ = Σ f_ik f_kj f_i f_j`:
///
/// `−(n−1)|Df|²/(1+|Df|²) + f/(|Df|²(1+|Df|²)²)·((n−2)H₁ + Δf|Df|²(1+|Df|²) + fH₁Δf − H₁|Df|² − fH₂)`.
pub fn grad_direction_ricci(jet: &Jet2) -> Result<f64> {
    let q = jet.grad_norm_sq();
    if q.sqrt() <= DEGENERATE_GRADIENT {
        return Err(Error::UndefinedDirection);
    }
    let n = jet.dim() as f64;
    let f = jet.f;
    let h1 = hessian_quadratic(jet);
    let h2 = hessian_square_quadratic(jet);
    let lap = jet.laplacian();
    let bracket = (n - 2.0) * h1 + lap * q * (1.0 + q) + f * h1 * lap - h1 * q - f * h2;
    Ok(-(n - 1.0) * q / (1.0 + q) + f / (q * (1.0 + q) * (1.0 + q)) * bracket)
}

/// The same quantity in adapted coordinates:
/// `f²/(1+f₁²)² ((1+f₁²)/f + f₁₁) Σ_{i≥2}(f_ii + 1/f) − (n−1) − f²/(1+f₁²)² Σ_{i≥2} f₁ᵢ²`.
pub fn grad_direction_ricci_adapted(adapted: &AdaptedJet) -> Result<f64> {
    if adapted.degenerate {
        return Err(Error::UndefinedDirection);
    }
    let jet = &adapted.jet;
    let n = jet.dim();
    let f = jet.f;
    let f1 = jet.grad[0];
    let w = 1.0 + f1 * f1;
    let first = w / f + jet.hess[(0, 0)];
    let rest: f64 = (1..n).map(|i| jet.hess[(i, i)] + 1.0 / f).sum();
    let mixed: f64 = (1..n).map(|i| jet.hess[(0, i)] * jet.hess[(0, i)]).sum();
    Ok(f * f / (w * w) * first * rest - (n as f64 - 1.0) - f * f / (w * w) * mixed)
}

/// `Ric(f̄, f̄)` by contracting the coordinate Ricci tensor with
/// `f̄ⁱ = f f_i / (|Df| (1+|Df|²)^{1/2})`.
pub fn grad_direction_ricci_contracted(jet: &Jet2) -> Result<f64> {
    let q = jet.grad_norm_sq();
    if q.sqrt() <= DEGENERATE_GRADIENT {
        return Err(Error::UndefinedDirection);
    }
    let forms = fundamental_forms(jet);
    let ric = ricci_coordinate(jet, &forms);
    let dir: DVector<f64> = &jet.grad * (jet.f / (q.sqrt() * (1.0 + q).sqrt()));
    Ok((dir.transpose() * ric * dir)[(0, 0)])
}

/// Both factors of the product inequality, with its square-root
/// form evaluated when it applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyFactors {
    /// `f(1+f₁²)^{-3/2}(f₁₁ + (1+f₁²)/f)`.
    pub a: f64,
    /// `f(1+f₁²)^{-1/2} Σ_{i≥2}(f_ii + 1/f)`.
    pub b: f64,
    pub product_ok: bool,
    /// `|A + B − H|`.
    pub sum_check: f64,
    pub sqrt_form: Option<SqrtForm>,
}

/// `√((n−1)A′)·√(B′) ≥ (n−1)(1+f₁²)/f` with `A′ = (1+f₁²)/f + f₁₁`,
/// `B′ = Σ_{i≥2}(f_ii + 1/f)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqrtForm {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl KeyFactors {
    pub fn product(&self) -> f64 {
        self.a * self.b
    }
}

/// Splits the mean curvature into the gradient-direction and transverse
/// factors. At critical points any orthonormal frame is used (`f₁ = 0`).
pub fn key_factors(jet: &Jet2) -> Result<KeyFactors> {
    let adapted = adapted_frame(jet);
    let aj = &adapted.jet;
    let n = aj.dim();
    let f = aj.f;
    let f1 = aj.grad[0];
    let w = 1.0 + f1 * f1;
    let a_bracket = aj.hess[(0, 0)] + w / f;
    let b_bracket: f64 = (1..n).map(|i| aj.hess[(i, i)] + 1.0 / f).sum();
    let a = f * w.powf(-1.5) * a_bracket;
    let b = f / w.sqrt() * b_bracket;
    let forms = fundamental_forms(jet);
    let mean = shape_spectrum(jet, &forms)?.mean;
    let nm1 = n as f64 - 1.0;
    let sqrt_form = (a_bracket >= 0.0 && b_bracket >= 0.0).then(|| {
        let lhs = (nm1 * a_bracket).sqrt() * b_bracket.sqrt();
        let rhs = nm1 * w / f;
        SqrtForm {
            lhs,
            rhs,
            holds: lhs >= rhs - INEQUALITY_TOL * rhs.max(1.0),
        }
    });
    Ok(KeyFactors {
        a,
        b,
        product_ok: a * b >= nm1 - INEQUALITY_TOL,
        sum_check: (a + b - mean).abs(),
        sqrt_form,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanBoundReport {
    pub nonneg_ricci: bool,
    pub mean: f64,
    pub n: usize,
    /// `min_i (κᵢH − (n−1) − κᵢ²)`.
    pub min_direction_margin: f64,
    pub holds: bool,
    pub counterexample: Option<Counterexample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub x: Vec<f64>,
    pub kappas: Vec<f64>,
    pub mean: f64,
}

/// Checks `H ≥ n` and the per-direction inequality `κᵢH ≥ n−1+κᵢ²` whenever
/// the minimum Ricci eigenvalue is nonnegative (within tolerance).
pub fn mean_bound_check(
    x: &[f64],
    spectrum: &ShapeSpectrum,
    ric_min: f64,
    n: usize,
) -> MeanBoundReport {
    let h = spectrum.mean;
    let nm1 = n as f64 - 1.0;
    let min_margin = spectrum
        .kappas
        .iter()
        .map(|k| k * h - nm1 - k * k)
        .fold(f64::INFINITY, f64::min);
    let nonneg = ric_min >= -INEQUALITY_TOL;
    let holds = !nonneg || (h >= n as f64 - INEQUALITY_TOL && min_margin >= -INEQUALITY_TOL);
    MeanBoundReport {
        nonneg_ricci: nonneg,
        mean: h,
        n,
        min_direction_margin: min_margin,
        holds,
        counterexample: (!holds).then(|| Counterexample {
            x: x.to_vec(),
            kappas: spectrum.kappas.clone(),
            mean: h,
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Density {
    /// `(n−1)(log f)₁₁ + Σ_{i≥2}(log f)_ii` in adapted coordinates, or
    /// `Δ log f` at a critical point.
    pub value: f64,
    /// `Δ_n log f = |D log f|^{n−2} · value`.
    pub weak_value: f64,
    pub critical: bool,
}

/// n-subharmonic density of `log f` in dimension `n = jet.dim()`.
pub fn n_subharmonic_density(jet: &Jet2) -> Density {
    let n = jet.dim();
    let f = jet.f;
    let adapted = adapted_frame(jet);
    let aj = &adapted.jet;
    let log_hess = |i: usize| aj.hess[(i, i)] / f - aj.grad[i] * aj.grad[i] / (f * f);
    if adapted.degenerate {
        let lap: f64 = (0..n).map(log_hess).sum();
        return Density {
            value: lap,
            weak_value: if n == 2 { lap } else { 0.0 },
            critical: true,
        };
    }
    let value = (n as f64 - 1.0) * log_hess(0) + (1..n).map(log_hess).sum::<f64>();
    let du = aj.grad[0] / f;
    Density {
        value,
        weak_value: du.powi(n as i32 - 2) * value,
        critical: false,
    }
}

/// `Δ_n u` for `u = log f` by direct expansion
/// `|Du|^{n−2}((n−2)|Du|⁻² Σ u_ij u_i u_j + Δu)` in the original coordinates.
pub fn n_laplacian_log_direct(jet: &Jet2) -> Result<f64> {
    let n = jet.dim();
    let f = jet.f;
    let du: DVector<f64> = &jet.grad / f;
    let d2u = DMatrix::from_fn(n, n, |i, j| {
        jet.hess[(i, j)] / f - jet.grad[i] * jet.grad[j] / (f * f)
    });
    let norm_sq = du.norm_squared();
    if norm_sq.sqrt() <= DEGENERATE_GRADIENT {
        return Err(Error::UndefinedDirection);
    }
    let quad = (du.transpose() * &d2u * &du)[(0, 0)];
    let inner = (n as f64 - 2.0) * quad / norm_sq + d2u.trace();
    Ok(norm_sq.sqrt().powi(n as i32 - 2) * inner)
}

/// Pointwise convexity conditions of increasing strength.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Regime {
    NotConvex,
    StrictlyConvex,
    NonnegRicci,
    NonnegSectional,
    Horoconvex,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::NotConvex => "NotConvex",
            Regime::StrictlyConvex => "StrictlyConvex",
            Regime::NonnegRicci => "NonnegRicci",
            Regime::NonnegSectional => "NonnegSectional",
            Regime::Horoconvex => "Horoconvex",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub min_ricci_eig: f64,
    pub mean: f64,
    pub factors: Option<(f64, f64)>,
    /// `None` at critical points of `f`.
    pub n_subharmonic_density: Option<f64>,
    /// The subharmonicity statement concerns `n ≥ 3`.
    pub subharmonicity_applies: bool,
}

/// Strongest regime satisfied by sorted principal curvatures. The strict
/// condition `κᵢ > 0` requires `κᵢ > tol`; the three `≥` conditions allow
/// `−tol` slack.
pub fn classify_kappas(kappas: &[f64], n: usize) -> Regime {
    let tol = INEQUALITY_TOL;
    let h: f64 = kappas.iter().sum();
    let nm1 = n as f64 - 1.0;
    if !kappas.iter().all(|k| *k > tol) {
        return Regime::NotConvex;
    }
    if !kappas.iter().all(|k| k * h >= nm1 + k * k - tol) {
        return Regime::StrictlyConvex;
    }
    let sectional = (0..kappas.len())
        .all(|i| (0..kappas.len()).all(|j| i == j || kappas[i] * kappas[j] >= 1.0 - tol));
    if !sectional {
        return Regime::NonnegRicci;
    }
    if !kappas.iter().all(|k| *k >= 1.0 - tol) {
        return Regime::NonnegSectional;
    }
    Regime::Horoconvex
}

pub fn convexity_classify(kappas: &[f64], ric_eigs: &[f64], n: usize) -> RegimeReport {
    RegimeReport {
        regime: classify_kappas(kappas, n),
        min_ricci_eig: ric_eigs.iter().copied().fold(f64::INFINITY, f64::min),
        mean: kappas.iter().sum(),
        factors: None,
        n_subharmonic_density: None,
        subharmonicity_applies: n >= 3,
    }
}

/// Full regime report at a jet, filling the factors and the density.
pub fn regime_report(jet: &Jet2) -> Result<RegimeReport> {
    let n = jet.dim();
    let forms = fundamental_forms(jet);
    let spectrum = shape_spectrum(jet, &forms)?;
    let ric = ricci_coordinate(jet, &forms);
    let eigs = ricci_eigenvalues(&ric, &forms)?;
    let mut report = convexity_classify(&spectrum.kappas, &eigs, n);
    let factors = key_factors(jet)?;
    report.factors = Some((factors.a, factors.b));
    let density = n_subharmonic_density(jet);
    report.n_subharmonic_density = (!density.critical).then_some(density.value);
    Ok(report)
}

/// Scan row at one point: spectrum, Ricci minimum, key factors, density
/// and regime.
pub fn scan_point(field: &HeightField, x: &[f64]) -> Result<ScanRow> {
    let jet = field.eval_jet(x)?;
    let forms = fundamental_forms(&jet);
    let spectrum = shape_spectrum(&jet, &forms)?;
    let ric = ricci_coordinate(&jet, &forms);
    let eigs = ricci_eigenvalues(&ric, &forms)?;
    let factors = key_factors(&jet)?;
    let density = n_subharmonic_density(&jet);
    Ok(ScanRow {
        x: x.to_vec(),
        f: jet.f,
        mean: spectrum.mean,
        regime: classify_kappas(&spectrum.kappas, jet.dim()).to_string(),
        kappas: spectrum.kappas,
        min_ricci_eig: eigs[0],
        a: factors.a,
        b: factors.b,
        density: density.value,
    })
}

/// Scan over every grid node where the field can be evaluated; masked and
/// out-of-domain nodes are skipped.
pub fn scan_grid(field: &HeightField, spec: &GridSpec) -> Result<Vec<ScanRow>> {
    let rows: Vec<Option<ScanRow>> = (0..spec.len())
        .into_par_iter()
        .map(|i| {
            let x = spec.node_point(i);
            match scan_point(field, &x) {
                Ok(r) => Ok(Some(r)),
                Err(Error::Domain { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::height_field::{Cap, HeightField};
    use crate::linalg::max_abs_diff;

    fn jet_from(grad: Vec<f64>, hess: DMatrix<f64>, f: f64) -> Jet2 {
        let n = grad.len();
        Jet2::new(vec![0.0; n], f, grad, hess).unwrap()
    }

    #[test]
    fn adapted_frame_degenerate() {
        let jet = jet_from(vec![0.0; 3], DMatrix::identity(3, 3), 1.0);
        let a = adapted_frame(&jet);
        assert!(a.degenerate);
        assert_eq!(a.rotation, DMatrix::identity(3, 3));
    }

    #[test]
    fn adapted_frame_swaps_axes() {
        let jet = jet_from(vec![0.0, 1.0, 0.0], DMatrix::zeros(3, 3), 1.0);
        let a = adapted_frame(&jet);
        assert_eq!(a.jet.grad.as_slice(), &[1.0, 0.0, 0.0]);
        for i in 0..3 {
            for j in 0..3 {
                let expected = match (i, j) {
                    (0, 1) | (1, 0) | (2, 2) => 1.0,
                    _ => 0.0,
                };
                assert!((a.rotation[(i, j)].abs() - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn adapted_frame_is_orthogonal() {
        for grad in [vec![0.3, -0.4, 1.2], vec![-2.0, 0.1, 0.0], vec![1.0, 1e-9, 0.0]] {
            let jet = jet_from(grad.clone(), DMatrix::identity(3, 3), 1.0);
            let a = adapted_frame(&jet);
            let rrt = &a.rotation * a.rotation.transpose();
            assert!(max_abs_diff(&rrt, &DMatrix::identity(3, 3)) < 1e-12);
            let rg = &a.rotation * &jet.grad;
            let norm = jet.grad.norm();
            assert!((rg[0] - norm).abs() < 1e-12 * norm);
            assert!(rg.iter().skip(1).all(|v| v.abs() < 1e-12 * norm));
        }
    }

    #[test]
    fn cone_adapted_hessian() {
        let jet = HeightField::equidistant_cone(3, 1.0).unwrap().eval_jet(&[0.0, 1.0, 0.0]).unwrap();
        let a = adapted_frame(&jet);
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0, 1.0]));
        assert!(max_abs_diff(&a.jet.hess, &expected) < 1e-15);
    }

    #[test]
    fn gradient_direction_ricci_examples() {
        let cone = HeightField::equidistant_cone(3, 1.0).unwrap().eval_jet(&[1.0, 0.0, 0.0]).unwrap();
        assert!(grad_direction_ricci(&cone).unwrap().abs() < 1e-14);
        let plane = HeightField::tilted_plane(3, 1.0).unwrap().eval_jet(&[1.0, 0.0, 0.0]).unwrap();
        assert!((grad_direction_ricci(&plane).unwrap() + 1.0).abs() < 1e-14);
        let horo = HeightField::horosphere(3, 1.0).unwrap().eval_jet(&[0.0; 3]).unwrap();
        assert!(matches!(grad_direction_ricci(&horo), Err(Error::UndefinedDirection)));
    }

    #[test]
    fn three_routes_agree_on_cap() {
        let cap = HeightField::sphere_cap(4, 2.5, 1.0, Cap::Lower).unwrap();
        let jet = cap.eval_jet(&[0.2, -0.3, 0.1, 0.4]).unwrap();
        let a = grad_direction_ricci(&jet).unwrap();
        let b = grad_direction_ricci_contracted(&jet).unwrap();
        let c = grad_direction_ricci_adapted(&adapted_frame(&jet)).unwrap();
        assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
        assert!((a - c).abs() < 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn key_factor_examples() {
        let horo = HeightField::horosphere(3, 1.0).unwrap().eval_jet(&[0.0; 3]).unwrap();
        let k = key_factors(&horo).unwrap();
        assert!((k.a - 1.0).abs() < 1e-15 && (k.b - 2.0).abs() < 1e-15);
        assert!(k.product_ok && k.sum_check < 1e-14);

        let r2 = 2f64.sqrt();
        let cone = HeightField::equidistant_cone(3, 1.0).unwrap().eval_jet(&[1.0, 0.0, 0.0]).unwrap();
        let k = key_factors(&cone).unwrap();
        assert!((k.a - 1.0 / r2).abs() < 1e-15);
        assert!((k.b - 2.0 * r2).abs() < 1e-14);
        assert!((k.product() - 2.0).abs() < 1e-14);
        assert!(k.product_ok && k.sum_check < 1e-14);
        let s = k.sqrt_form.unwrap();
        assert!(s.holds && (s.lhs - s.rhs).abs() < 1e-13);

        let plane = HeightField::tilted_plane(3, 1.0).unwrap().eval_jet(&[1.0, 0.0, 0.0]).unwrap();
        let k = key_factors(&plane).unwrap();
        assert!((k.a - 1.0 / r2).abs() < 1e-15 && (k.b - r2).abs() < 1e-15);
        assert!((k.product() - 1.0).abs() < 1e-15);
        assert!(!k.product_ok);
    }

    #[test]
    fn density_examples() {
        let horo = HeightField::horosphere(3, 1.0).unwrap().eval_jet(&[0.1; 3]).unwrap();
        let d = n_subharmonic_density(&horo);
        assert!(d.critical && d.value == 0.0);
        let cone = HeightField::equidistant_cone(3, 2.0).unwrap();
        for x in [[1.0, 0.0, 0.0], [0.3, -0.7, 1.1], [0.0, 0.0, 0.6]] {
            let d = n_subharmonic_density(&cone.eval_jet(&x).unwrap());
            assert!(d.value.abs() < 1e-10, "{d:?}");
        }
        let plane = HeightField::tilted_plane(3, 1.0).unwrap();
        let d = n_subharmonic_density(&plane.eval_jet(&[1.0, 0.0, 0.0]).unwrap());
        assert!((d.value + 2.0).abs() < 1e-14);
        let d = n_subharmonic_density(&plane.eval_jet(&[2.0, 0.5, 0.0]).unwrap());
        assert!((d.value + 0.5).abs() < 1e-14);
    }

    #[test]
    fn classifier_examples() {
        assert_eq!(classify_kappas(&[1.0, 1.0, 1.0], 3), Regime::Horoconvex);
        assert_eq!(classify_kappas(&[0.70711, 1.41421, 1.41421], 3), Regime::NonnegSectional);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(classify_kappas(&[r, r, r], 3), Regime::StrictlyConvex);
        assert_eq!(classify_kappas(&[-0.1, 1.0, 2.0], 3), Regime::NotConvex);
        assert_eq!(classify_kappas(&[0.0, 1.0, 2.0], 3), Regime::NotConvex);
        // κ₀(κ₁+κ₂) = 2.25 ≥ 2 but κ₀κ₁ = 0.75 < 1
        let k = [0.5, 1.5, 3.0];
        assert_eq!(classify_kappas(&k, 3), Regime::NonnegRicci);
    }

    #[test]
    fn mean_bound_examples() {
        let cap = HeightField::sphere_cap(3, 2.0, 1.0, Cap::Lower).unwrap();
        let jet = cap.eval_jet(&[0.0; 3]).unwrap();
        let forms = fundamental_forms(&jet);
        let spec = shape_spectrum(&jet, &forms).unwrap();
        let rep = mean_bound_check(&[0.0; 3], &spec, 6.0, 3);
        assert!(rep.holds && (rep.mean - 6.0).abs() < 1e-14);

        let fake = ShapeSpectrum {
            kappas: vec![0.5, 0.5, 0.5],
            mean: 1.5,
            ..spec
        };
        let rep = mean_bound_check(&[0.0; 3], &fake, 0.0, 3);
        assert!(!rep.holds);
        assert!(rep.counterexample.is_some());
    }
}
