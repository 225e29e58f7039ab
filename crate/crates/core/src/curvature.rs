//! Fundamental forms, principal curvatures and Ricci curvature of graphs in
//! the upper half-space model, plus finite-difference Codazzi and Gauss
//! residuals.
//!
//! The ambient curvature is fixed to −1 and the normal points upward
//! (positive last component), so convex catalog surfaces have κ > 0.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::height_field::{HeightField, Jet2};
use crate::linalg::{generalized_symmetric_eigen, symmetrize};

/// Relative gap below which two principal curvatures are one eigenvalue.
pub const MULTIPLICITY_GAP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalForms {
    /// `g_ij = f⁻²(δ_ij + f_i f_j)`.
    pub g: DMatrix<f64>,
    /// `g^ij = f²(δ_ij − f_i f_j / (1 + |Df|²))`.
    pub g_inv: DMatrix<f64>,
    pub grad_norm_sq: f64,
    /// Unit normal in `ℝⁿ⁺¹`; its Euclidean length is `f`.
    pub normal: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSpectrum {
    pub second_form: DMatrix<f64>,
    /// `S = g⁻¹ II`.
    pub shape: DMatrix<f64>,
    /// Principal curvatures, ascending.
    pub kappas: Vec<f64>,
    /// `H = Σ κᵢ` (unnormalized).
    pub mean: f64,
    /// Columns are g-orthonormal principal directions matching `kappas`.
    pub frame: DMatrix<f64>,
}

impl ShapeSpectrum {
    /// Groups of (nearly) equal principal curvatures as `(value, multiplicity)`.
    pub fn clusters(&self) -> Vec<(f64, usize)> {
        cluster_values(&self.kappas, MULTIPLICITY_GAP)
    }
}

/// Splits sorted values into runs whose consecutive gaps are below `rel_gap`
/// relative to `max(1, |value|)`. Each run reports its mean and size.
pub fn cluster_values(sorted: &[f64], rel_gap: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut prev = f64::NAN;
    for &v in sorted {
        if count > 0 && (v - prev).abs() > rel_gap * v.abs().max(prev.abs()).max(1.0) {
            out.push((sum / count as f64, count));
            sum = 0.0;
            count = 0;
        }
        sum += v;
        count += 1;
        prev = v;
    }
    if count > 0 {
        out.push((sum / count as f64, count));
    }
    out
}

pub fn fundamental_forms(jet: &Jet2) -> FundamentalForms {
    let n = jet.dim();
    let f = jet.f;
    let q = jet.grad_norm_sq();
    let df = &jet.grad;
    let g = DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        (delta + df[i] * df[j]) / (f * f)
    });
    let g_inv = DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        f * f * (delta - df[i] * df[j] / (1.0 + q))
    });
    let scale = f / (1.0 + q).sqrt();
    let mut normal = DVector::zeros(n + 1);
    for i in 0..n {
        normal[i] = -scale * df[i];
    }
    normal[n] = scale;
    FundamentalForms {
        g,
        g_inv,
        grad_norm_sq: q,
        normal,
    }
}

/// `P_ij = δ_ij + f_i f_j + f f_ij`, the numerator shared by II and Ricci.
fn numerator_form(jet: &Jet2) -> DMatrix<f64> {
    let n = jet.dim();
    DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        delta + jet.grad[i] * jet.grad[j] + jet.f * jet.hess[(i, j)]
    })
}

/// `II_ij = (δ_ij + f_i f_j + f f_ij) / (f² (1 + |Df|²)^{1/2})`.
pub fn second_fundamental_form(jet: &Jet2) -> DMatrix<f64> {
    let scale = 1.0 / (jet.f * jet.f * (1.0 + jet.grad_norm_sq()).sqrt());
    numerator_form(jet) * scale
}

/// Closed-form mean curvature
/// `(1+|Df|²)^{-1/2} (n + fΔf − f Σ f_ij f_i f_j / (1+|Df|²))`.
pub fn mean_curvature_closed_form(jet: &Jet2) -> f64 {
    let n = jet.dim() as f64;
    let q = jet.grad_norm_sq();
    let h1 = hessian_quadratic(jet);
    (n + jet.f * jet.laplacian() - jet.f * h1 / (1.0 + q)) / (1.0 + q).sqrt()
}

/// `H₁(f) = Σ f_ij f_i f_j`.
pub fn hessian_quadratic(jet: &Jet2) -> f64 {
    (jet.grad.transpose() * &jet.hess * &jet.grad)[(0, 0)]
}

/// `H₂(f) = Σ f_ik f_kj f_i f_j = |D²f · Df|²`.
pub fn hessian_square_quadratic(jet: &Jet2) -> f64 {
    (&jet.hess * &jet.grad).norm_squared()
}

pub fn shape_spectrum(jet: &Jet2, forms: &FundamentalForms) -> Result<ShapeSpectrum> {
    let second_form = second_fundamental_form(jet);
    let shape = &forms.g_inv * &second_form;
    let (kappas, frame) = generalized_symmetric_eigen(&second_form, &forms.g)?;
    let mean = shape.trace();
    let closed = mean_curvature_closed_form(jet);
    if !((mean - closed).abs() <= 1e-8 * (1.0 + mean.abs())) {
        return Err(Error::Numeric(format!(
            "trace of shape operator {mean} disagrees with closed-form mean curvature {closed}"
        )));
    }
    Ok(ShapeSpectrum {
        second_form,
        shape,
        kappas,
        mean,
        frame,
    })
}

/// Ricci tensor by the coordinate double contraction
/// `R_ik = −(n−1) g_ik + Σ_jl (δ_jl − f_j f_l/(1+|Df|²)) (P_ik P_jl − P_il P_jk) / (f²(1+|Df|²))`.
pub fn ricci_coordinate(jet: &Jet2, forms: &FundamentalForms) -> DMatrix<f64> {
    let n = jet.dim();
    let q = forms.grad_norm_sq;
    let p = numerator_form(jet);
    let df = &jet.grad;
    let contraction = DMatrix::from_fn(n, n, |j, l| {
        let delta = if j == l { 1.0 } else { 0.0 };
        delta - df[j] * df[l] / (1.0 + q)
    });
    let scale = 1.0 / (jet.f * jet.f * (1.0 + q));
    let mut ric = &forms.g * (-(n as f64 - 1.0));
    for i in 0..n {
        for k in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                for l in 0..n {
                    acc += contraction[(j, l)] * (p[(i, k)] * p[(j, l)] - p[(i, l)] * p[(j, k)]);
                }
            }
            ric[(i, k)] += scale * acc;
        }
    }
    ric
}

/// The same tensor after carrying out the inner sums in closed form.
#[cfg(test)]
fn ricci_coordinate_contracted(jet: &Jet2, forms: &FundamentalForms) -> DMatrix<f64> {
    let n = jet.dim();
    let q = forms.grad_norm_sq;
    let f = jet.f;
    let p = numerator_form(jet);
    let trace_term = n as f64 + f * jet.laplacian() - f * hessian_quadratic(jet) / (1.0 + q);
    let hdf = &jet.hess * &jet.grad;
    let inner = DMatrix::from_fn(n, n, |l, k| {
        let delta = if l == k { 1.0 } else { 0.0 };
        delta + f * jet.hess[(l, k)] - f / (1.0 + q) * hdf[k] * jet.grad[l]
    });
    let scale = 1.0 / (f * f * (1.0 + q));
    &forms.g * (-(n as f64 - 1.0)) + (&p * trace_term - &p * inner) * scale
}

/// Ricci tensor from the Gauss equation in operator form:
/// `Ric♯ = −(n−1) I + H S − S²`, lowered with g.
pub fn ricci_from_shape(spectrum: &ShapeSpectrum, forms: &FundamentalForms, n: usize) -> DMatrix<f64> {
    let s = &spectrum.shape;
    let op = DMatrix::identity(n, n) * (-(n as f64 - 1.0)) + s * spectrum.mean - s * s;
    symmetrize(&(&forms.g * op))
}

/// `Ric♯ = g⁻¹ Ric`.
pub fn ricci_operator(ric: &DMatrix<f64>, forms: &FundamentalForms) -> DMatrix<f64> {
    &forms.g_inv * ric
}

/// Eigenvalues of the Ricci operator, ascending.
pub fn ricci_eigenvalues(ric: &DMatrix<f64>, forms: &FundamentalForms) -> Result<Vec<f64>> {
    Ok(generalized_symmetric_eigen(&symmetrize(ric), &forms.g)?.0)
}

fn displaced(x: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut y = x.to_vec();
    for &(d, s) in moves {
        y[d] += s;
    }
    y
}

fn metric_at(field: &HeightField, x: &[f64]) -> Result<DMatrix<f64>> {
    Ok(fundamental_forms(&field.eval_jet(x)?).g)
}

/// Christoffel symbols `Γ[l][(i, j)] = Γ^l_ij` of the induced metric at `x`,
/// with metric derivatives taken by central differences of step `step`.
pub fn christoffel_fd(field: &HeightField, x: &[f64], step: f64) -> Result<Vec<DMatrix<f64>>> {
    let n = field.dim();
    let g_inv = fundamental_forms(&field.eval_jet(x)?).g_inv;
    let mut dg = Vec::with_capacity(n);
    for k in 0..n {
        let gp = metric_at(field, &displaced(x, &[(k, step)]))?;
        let gm = metric_at(field, &displaced(x, &[(k, -step)]))?;
        dg.push((gp - gm) / (2.0 * step));
    }
    // first kind: Γ_mij = ½(∂_i g_mj + ∂_j g_mi − ∂_m g_ij)
    let first = |m: usize, i: usize, j: usize| 0.5 * (dg[i][(m, j)] + dg[j][(m, i)] - dg[m][(i, j)]);
    let mut gamma = Vec::with_capacity(n);
    for l in 0..n {
        gamma.push(DMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|m| g_inv[(l, m)] * first(m, i, j)).sum()
        }));
    }
    Ok(gamma)
}

/// Largest antisymmetric part `|(∇_i II)_jk − (∇_j II)_ik|` of the covariant
/// derivative of II, computed by finite differences. Vanishes in the
/// continuum (II is a Codazzi tensor).
pub fn codazzi_residual(field: &HeightField, x: &[f64], step: f64) -> Result<f64> {
    let n = field.dim();
    let gamma = christoffel_fd(field, x, step)?;
    let second = second_fundamental_form(&field.eval_jet(x)?);
    let mut d_second = Vec::with_capacity(n);
    for i in 0..n {
        let p = second_fundamental_form(&field.eval_jet(&displaced(x, &[(i, step)]))?);
        let m = second_fundamental_form(&field.eval_jet(&displaced(x, &[(i, -step)]))?);
        d_second.push((p - m) / (2.0 * step));
    }
    let nabla = |i: usize, j: usize, k: usize| -> f64 {
        let mut v = d_second[i][(j, k)];
        for l in 0..n {
            v -= gamma[l][(i, j)] * second[(l, k)] + gamma[l][(i, k)] * second[(j, l)];
        }
        v
    };
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                worst = worst.max((nabla(i, j, k) - nabla(j, i, k)).abs());
            }
        }
    }
    Ok(worst)
}

/// Largest deviation between the intrinsic curvature tensor
/// `Rm(i,j,k,l) = ⟨R(∂_i,∂_j)∂_l, ∂_k⟩` (finite-differenced Christoffels) and
/// the Gauss-equation right-hand side
/// `−(g_ik g_jl − g_il g_jk) + (II_ik II_jl − II_il II_jk)`.
pub fn gauss_residual(field: &HeightField, x: &[f64], step: f64) -> Result<f64> {
    let n = field.dim();
    let jet = field.eval_jet(x)?;
    let g = fundamental_forms(&jet).g;
    let second = second_fundamental_form(&jet);
    let gamma = christoffel_fd(field, x, step)?;
    let mut d_gamma = Vec::with_capacity(n);
    for k in 0..n {
        let gp = christoffel_fd(field, &displaced(x, &[(k, step)]), step)?;
        let gm = christoffel_fd(field, &displaced(x, &[(k, -step)]), step)?;
        let d: Vec<DMatrix<f64>> = gp
            .iter()
            .zip(&gm)
            .map(|(a, b)| (a - b) / (2.0 * step))
            .collect();
        d_gamma.push(d);
    }
    // R^m_{l i j} = ∂_i Γ^m_{jl} − ∂_j Γ^m_{il} + Γ^m_{ip} Γ^p_{jl} − Γ^m_{jp} Γ^p_{il}
    let upper = |m: usize, l: usize, i: usize, j: usize| -> f64 {
        let mut v = d_gamma[i][m][(j, l)] - d_gamma[j][m][(i, l)];
        for p in 0..n {
            v += gamma[m][(i, p)] * gamma[p][(j, l)] - gamma[m][(j, p)] * gamma[p][(i, l)];
        }
        v
    };
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let intrinsic: f64 = (0..n).map(|m| g[(k, m)] * upper(m, l, i, j)).sum();
                    let rhs = -(g[(i, k)] * g[(j, l)] - g[(i, l)] * g[(j, k)])
                        + (second[(i, k)] * second[(j, l)] - second[(i, l)] * second[(j, k)]);
                    worst = worst.max((intrinsic - rhs).abs());
                }
            }
        }
    }
    Ok(worst)
}

/// Everything computed at one point, in report form.
#[derive(Debug, Clone, Serialize)]
pub struct PointAnalysis {
    pub x: Vec<f64>,
    pub f: f64,
    pub g: Vec<Vec<f64>>,
    #[serde(rename = "II")]
    pub second_form: Vec<Vec<f64>>,
    pub kappas: Vec<f64>,
    #[serde(rename = "H")]
    pub mean: f64,
    pub ricci_eigs: Vec<f64>,
    pub residuals: Residuals,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Residuals {
    pub codazzi: Option<f64>,
    pub gauss: Option<f64>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

/// Point report. Residuals are omitted (null) when the stencil of width
/// `2·step` does not fit in the domain.
pub fn analyze_point(field: &HeightField, x: &[f64], step: f64) -> Result<PointAnalysis> {
    let jet = field.eval_jet(x)?;
    let forms = fundamental_forms(&jet);
    let spectrum = shape_spectrum(&jet, &forms)?;
    let ric = ricci_coordinate(&jet, &forms);
    let ricci_eigs = ricci_eigenvalues(&ric, &forms)?;
    Ok(PointAnalysis {
        x: x.to_vec(),
        f: jet.f,
        g: rows(&forms.g),
        second_form: rows(&spectrum.second_form),
        kappas: spectrum.kappas,
        mean: spectrum.mean,
        ricci_eigs,
        residuals: Residuals {
            codazzi: codazzi_residual(field, x, step).ok(),
            gauss: gauss_residual(field, x, step).ok(),
        },
    })
}

/// Frobenius-norm commutator test `‖Ric♯S − SRic♯‖ / (‖Ric♯‖‖S‖ + ε)`.
pub fn commutation_residual(ric: &DMatrix<f64>, g: &DMatrix<f64>, shape: &DMatrix<f64>) -> Result<f64> {
    let g_inv = g
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numeric("metric is not positive definite".into()))?
        .inverse();
    let op = g_inv * ric;
    let comm = &op * shape - shape * &op;
    Ok(comm.norm() / (op.norm() * shape.norm() + f64::EPSILON))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::height_field::Cap;
    use crate::linalg::max_abs;
    use crate::linalg::max_abs_diff;

    fn is_zero_matrix(m: &DMatrix<f64>, tol: f64) -> bool {
        max_abs(m) <= tol
    }

    fn cone_jet() -> Jet2 {
        HeightField::equidistant_cone(3, 1.0)
            .unwrap()
            .eval_jet(&[1.0, 0.0, 0.0])
            .unwrap()
    }

    #[test]
    fn horosphere_forms() {
        let jet = HeightField::horosphere(3, 1.0).unwrap().eval_jet(&[0.5, 0.1, -0.3]).unwrap();
        let forms = fundamental_forms(&jet);
        assert_eq!(forms.g, DMatrix::identity(3, 3));
        assert_eq!(forms.g_inv, DMatrix::identity(3, 3));
        assert_eq!(forms.normal.as_slice(), &[0.0, 0.0, 0.0, 1.0]);
        let spec = shape_spectrum(&jet, &forms).unwrap();
        assert_eq!(spec.second_form, forms.g);
        assert!(spec.kappas.iter().all(|k| (k - 1.0).abs() < 1e-15));
        assert!((spec.mean - 3.0).abs() < 1e-15);
        assert!(is_zero_matrix(&ricci_coordinate(&jet, &forms), 0.0));
        assert!(is_zero_matrix(&ricci_from_shape(&spec, &forms, 3), 1e-15));
    }

    #[test]
    fn cone_forms_and_spectrum() {
        let jet = cone_jet();
        let forms = fundamental_forms(&jet);
        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0, 1.0]));
        assert!(max_abs_diff(&forms.g, &g) < 1e-15);
        let gi = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 1.0, 1.0]));
        assert!(max_abs_diff(&forms.g_inv, &gi) < 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expected = [-s, 0.0, 0.0, s];
        for (a, b) in forms.normal.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        let spec = shape_spectrum(&jet, &forms).unwrap();
        let r2 = 2f64.sqrt();
        assert!((spec.kappas[0] - 1.0 / r2).abs() < 1e-14);
        assert!((spec.kappas[1] - r2).abs() < 1e-14);
        assert!((spec.kappas[2] - r2).abs() < 1e-14);
        assert!((spec.mean - 5.0 / r2).abs() < 1e-14);
        assert_eq!(spec.clusters().len(), 2);
    }

    #[test]
    fn cone_ricci_null_in_ruling() {
        let jet = cone_jet();
        let forms = fundamental_forms(&jet);
        let ric = ricci_coordinate(&jet, &forms);
        let eigs = ricci_eigenvalues(&ric, &forms).unwrap();
        // κ₀H − κ₀² − 2 = 2.5 − 0.5 − 2 = 0, transverse κ_tH − κ_t² − 2 = 5 − 2 − 2 = 1
        assert!(eigs[0].abs() < 1e-14);
        assert!((eigs[1] - 1.0).abs() < 1e-14);
        assert!((eigs[2] - 1.0).abs() < 1e-14);
        // ruling direction x₁ is the null direction
        assert!(ric[(0, 0)].abs() < 1e-14);
    }

    #[test]
    fn tilted_plane_is_umbilic() {
        let jet = HeightField::tilted_plane(3, 1.0).unwrap().eval_jet(&[1.0, 0.0, 0.0]).unwrap();
        let forms = fundamental_forms(&jet);
        let spec = shape_spectrum(&jet, &forms).unwrap();
        for k in &spec.kappas {
            assert!((k - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        }
        assert!(max_abs_diff(&spec.second_form, &(&forms.g / 2f64.sqrt())) < 1e-15);
        let eigs = ricci_eigenvalues(&ricci_coordinate(&jet, &forms), &forms).unwrap();
        for e in eigs {
            assert!((e + 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn sphere_cap_center() {
        let field = HeightField::sphere_cap(3, 2.0, 1.0, Cap::Lower).unwrap();
        let jet = field.eval_jet(&[0.0, 0.0, 0.0]).unwrap();
        let forms = fundamental_forms(&jet);
        assert_eq!(forms.normal.as_slice(), &[0.0, 0.0, 0.0, 1.0]);
        let spec = shape_spectrum(&jet, &forms).unwrap();
        assert!(spec.kappas.iter().all(|k| (k - 2.0).abs() < 1e-15));
        let eigs = ricci_eigenvalues(&ricci_coordinate(&jet, &forms), &forms).unwrap();
        assert!(eigs.iter().all(|e| (e - 6.0).abs() < 1e-13));
    }

    #[test]
    fn contracted_ricci_matches_double_sum() {
        let field = HeightField::sphere_cap(4, 3.0, 1.5, Cap::Lower).unwrap();
        let jet = field.eval_jet(&[0.3, -0.2, 0.5, 0.1]).unwrap();
        let forms = fundamental_forms(&jet);
        let a = ricci_coordinate(&jet, &forms);
        let b = ricci_coordinate_contracted(&jet, &forms);
        assert!(max_abs_diff(&a, &b) < 1e-12);
    }

    #[test]
    fn normal_has_hyperbolic_unit_length() {
        let field = HeightField::sphere_cap(3, 2.0, 1.0, Cap::Upper).unwrap();
        let jet = field.eval_jet(&[0.4, 0.1, -0.2]).unwrap();
        let forms = fundamental_forms(&jet);
        assert!((forms.normal.norm() - jet.f).abs() < 1e-14);
        assert!(forms.normal[3] > 0.0);
        let id = &forms.g * &forms.g_inv;
        assert!(max_abs_diff(&id, &DMatrix::identity(3, 3)) < 1e-12);
    }

    #[test]
    fn residuals_on_examples() {
        let horo = HeightField::horosphere(3, 1.0).unwrap();
        assert_eq!(codazzi_residual(&horo, &[0.0; 3], 1e-4).unwrap(), 0.0);
        assert_eq!(gauss_residual(&horo, &[0.0; 3], 1e-3).unwrap(), 0.0);
        let cap = HeightField::sphere_cap(3, 2.0, 1.0, Cap::Lower).unwrap();
        assert!(codazzi_residual(&cap, &[0.2, 0.1, 0.0], 1e-4).unwrap() <= 1e-5);
        assert!(gauss_residual(&cap, &[0.3, 0.0, 0.0], 1e-3).unwrap() <= 1e-4);
        let cone = HeightField::equidistant_cone(3, 1.0).unwrap();
        assert!(codazzi_residual(&cone, &[1.0, 0.2, 0.1], 1e-4).unwrap() <= 1e-5);
        assert!(gauss_residual(&cone, &[1.0, 0.0, 0.0], 1e-3).unwrap() <= 1e-4);
    }

    #[test]
    fn clustering() {
        assert_eq!(cluster_values(&[1.0, 1.0 + 1e-9, 2.0], 1e-6), vec![(1.0 + 5e-10, 2), (2.0, 1)]);
        assert_eq!(cluster_values(&[], 1e-6), vec![]);
    }
}
