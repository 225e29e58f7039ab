//! Rigidity checks for nonnegatively Ricci-curved graphs: Ricci-null
//! directions, constancy of the split spectrum, and the global verdict.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{recession_report, RecessionReport};
use crate::curvature::{
    cluster_values, fundamental_forms, ricci_coordinate, shape_spectrum, MULTIPLICITY_GAP,
};
use crate::error::{Error, Result};
use crate::height_field::{HeightField, Jet2};
use crate::linalg::{generalized_symmetric_eigen, mean_and_variance};

/// Absolute tolerance for a Ricci eigenvalue to count as zero.
pub const RICCI_NULL_TOL: f64 = 1e-6;
/// Variance ceiling for "constant" curvatures in the global verdict.
pub const CONSTANT_VARIANCE: f64 = 1e-12;
/// Ceiling for `|κ₀κ_t − 1|` in the global verdict.
pub const RECIPROCAL_DEFECT: f64 = 1e-8;
/// How close to one an umbilic curvature must be for a horosphere.
pub const HOROSPHERE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    EquidistantTube,
    Horosphere,
    SingleEndCandidate,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::EquidistantTube => "EquidistantTube",
            Verdict::Horosphere => "Horosphere",
            Verdict::SingleEndCandidate => "SingleEndCandidate",
            Verdict::Inconclusive => "Inconclusive",
        };
        f.write_str(s)
    }
}

/// One Ricci-null direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullDirection {
    /// g-unit coordinate vector.
    pub direction: Vec<f64>,
    pub ricci_eig: f64,
    /// `II(w, w)`.
    pub kappa: f64,
    /// g-angle to the nearest principal eigenspace.
    pub alignment: f64,
}

/// Pointwise part of a rigidity report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatDirectionReport {
    pub null_space_dim: usize,
    pub directions: Vec<NullDirection>,
    pub kappa0: Option<f64>,
    pub kappa0_expected: Option<f64>,
    pub principal_alignment: Option<f64>,
    pub kappas: Vec<f64>,
    pub mean: f64,
}

impl FlatDirectionReport {
    pub fn is_empty(&self) -> bool {
        self.null_space_dim == 0
    }
}

/// Smaller root of `κ² − Hκ + (n−1) = 0`, when real.
pub fn smaller_root(mean: f64, n: usize) -> Option<f64> {
    let disc = mean * mean - 4.0 * (n as f64 - 1.0);
    (disc >= 0.0).then(|| 0.5 * (mean - disc.sqrt()))
}

fn g_dot(g: &DMatrix<f64>, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a.transpose() * g * b)[(0, 0)]
}

/// Locates Ricci-null directions at a jet and measures how far each is from
/// being principal.
pub fn flat_direction_check(jet: &Jet2) -> Result<FlatDirectionReport> {
    let n = jet.dim();
    if n < 3 {
        return Err(Error::Precondition(format!("rigidity checks need n ≥ 3, got {n}")));
    }
    let forms = fundamental_forms(jet);
    let spectrum = shape_spectrum(jet, &forms)?;
    let ric = ricci_coordinate(jet, &forms);
    let (eigs, vecs) = generalized_symmetric_eigen(&ric, &forms.g)?;
    if eigs[0] < -RICCI_NULL_TOL {
        return Err(Error::Precondition(format!(
            "Ricci curvature is negative somewhere: smallest eigenvalue {}",
            eigs[0]
        )));
    }
    let clusters = cluster_values(&spectrum.kappas, MULTIPLICITY_GAP);
    let mut directions = Vec::new();
    for (k, &lam) in eigs.iter().enumerate() {
        if lam.abs() > RICCI_NULL_TOL {
            continue;
        }
        let w: DVector<f64> = vecs.column(k).into_owned();
        let kappa = g_dot(&spectrum.second_form, &w, &w) / g_dot(&forms.g, &w, &w);
        let mut best = f64::INFINITY;
        let mut start = 0;
        for &(_, count) in &clusters {
            let mut proj = DVector::zeros(n);
            for i in start..start + count {
                let e: DVector<f64> = spectrum.frame.column(i).into_owned();
                proj += &e * g_dot(&forms.g, &e, &w);
            }
            start += count;
            let rest = &w - &proj;
            let along = g_dot(&forms.g, &proj, &proj).max(0.0).sqrt();
            let off = g_dot(&forms.g, &rest, &rest).max(0.0).sqrt();
            best = best.min(off.atan2(along));
        }
        directions.push(NullDirection {
            direction: w.iter().copied().collect(),
            ricci_eig: lam,
            kappa,
            alignment: best,
        });
    }
    let null_space_dim = directions.len();
    let (kappa0, kappa0_expected, principal_alignment) = if null_space_dim == 0 {
        (None, None, None)
    } else {
        (
            Some(directions[0].kappa),
            smaller_root(spectrum.mean, n),
            Some(directions.iter().map(|d| d.alignment).fold(0.0, f64::max)),
        )
    };
    Ok(FlatDirectionReport {
        null_space_dim,
        directions,
        kappa0,
        kappa0_expected,
        principal_alignment,
        kappas: spectrum.kappas,
        mean: spectrum.mean,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumShape {
    /// All principal curvatures coincide.
    Umbilic,
    /// One simple curvature `κ₀` and one of multiplicity `n−1`.
    Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstancyScan {
    pub shape: SpectrumShape,
    pub samples: usize,
    pub kappa0_mean: f64,
    pub kappa_transverse_mean: f64,
    pub var_kappa0: f64,
    pub var_kappa_transverse: f64,
    /// `max |κ₀κ_t − 1|` over the samples.
    pub product_defect: f64,
}

fn split_at_point(kappas: &[f64], n: usize) -> Option<(SpectrumShape, f64, f64)> {
    let clusters = cluster_values(kappas, MULTIPLICITY_GAP);
    match clusters.as_slice() {
        [(k, c)] if *c == n => Some((SpectrumShape::Umbilic, *k, *k)),
        [(a, ca), (b, cb)] if *ca == 1 && *cb == n - 1 => Some((SpectrumShape::Split, *a, *b)),
        [(a, ca), (b, cb)] if *ca == n - 1 && *cb == 1 => Some((SpectrumShape::Split, *b, *a)),
        _ => None,
    }
}

/// Clusters the spectrum at every sample into one simple curvature and one of
/// multiplicity `n−1` (or a single umbilic value) and reports the spread of
/// each across samples. Fails with a structure error if any sample has
/// another pattern, or if samples disagree on the pattern.
pub fn constancy_scan(field: &HeightField, samples: &[Vec<f64>]) -> Result<ConstancyScan> {
    let n = field.dim();
    if n < 3 {
        return Err(Error::Precondition(format!("rigidity checks need n ≥ 3, got {n}")));
    }
    if samples.is_empty() {
        return Err(Error::Parameter("no sample points".into()));
    }
    let per_point: Vec<(SpectrumShape, f64, f64)> = samples
        .par_iter()
        .map(|x| {
            let jet = field.eval_jet(x)?;
            let forms = fundamental_forms(&jet);
            let spectrum = shape_spectrum(&jet, &forms)?;
            split_at_point(&spectrum.kappas, n).ok_or_else(|| {
                Error::Structure(format!(
                    "principal curvatures {:?} at {:?} do not split as 1 + {}",
                    spectrum.kappas,
                    x,
                    n - 1
                ))
            })
        })
        .collect::<Result<_>>()?;
    let shape = per_point[0].0;
    if per_point.iter().any(|p| p.0 != shape) {
        return Err(Error::Structure("spectrum pattern changes between samples".into()));
    }
    let k0: Vec<f64> = per_point.iter().map(|p| p.1).collect();
    let kt: Vec<f64> = per_point.iter().map(|p| p.2).collect();
    let (m0, v0) = mean_and_variance(&k0);
    let (mt, vt) = mean_and_variance(&kt);
    let product_defect = k0
        .iter()
        .zip(&kt)
        .map(|(a, b)| (a * b - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(ConstancyScan {
        shape,
        samples: samples.len(),
        kappa0_mean: m0,
        kappa_transverse_mean: mt,
        var_kappa0: v0,
        var_kappa_transverse: vt,
        product_defect,
    })
}

/// Decision rules, in order: more than two boundary points on a
/// nonnegatively curved field is a contradiction; an umbilic spectrum with
/// `κ ≡ 1` is a horosphere; two boundary points with a constant reciprocal
/// split is an equidistant tube; a single boundary point leaves a one-ended
/// candidate; everything else is inconclusive.
pub fn classify_global(
    constancy: Option<&ConstancyScan>,
    recession: &RecessionReport,
    nonneg_ricci: bool,
) -> Result<Verdict> {
    let k = recession.boundary_points;
    if nonneg_ricci && k > 2 {
        return Err(Error::Contradiction(format!(
            "{k} asymptotic boundary points on a field with nonnegative Ricci curvature"
        )));
    }
    if let Some(scan) = constancy {
        let constant = scan.var_kappa0 <= CONSTANT_VARIANCE && scan.var_kappa_transverse <= CONSTANT_VARIANCE;
        if scan.shape == SpectrumShape::Umbilic && constant && (scan.kappa0_mean - 1.0).abs() <= HOROSPHERE_TOL {
            return Ok(Verdict::Horosphere);
        }
        if k == 2
            && !recession.fat_recession_set
            && scan.shape == SpectrumShape::Split
            && constant
            && scan.product_defect <= RECIPROCAL_DEFECT
        {
            return Ok(Verdict::EquidistantTube);
        }
    }
    if k == 1 && !recession.fat_recession_set {
        return Ok(Verdict::SingleEndCandidate);
    }
    Ok(Verdict::Inconclusive)
}

#[derive(Debug, Clone)]
pub struct ClassifyOptions {
    pub samples: usize,
    pub seed: u64,
    pub levels: Vec<f64>,
    pub grid: Option<crate::grid::GridSpec>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            samples: 100,
            seed: 0,
            levels: vec![1.0, 2.0, 3.0, 4.0],
            grid: None,
        }
    }
}

/// Everything behind a verdict.
#[derive(Debug, Clone, Serialize)]
pub struct GlobalAnalysis {
    pub verdict: Verdict,
    pub constancy: Option<ConstancyScan>,
    pub constancy_error: Option<String>,
    pub min_ricci_eig: f64,
    pub recession: RecessionReport,
}

impl GlobalAnalysis {
    /// The compact verdict record.
    pub fn verdict_json(&self) -> VerdictRecord {
        let c = self.constancy.as_ref();
        VerdictRecord {
            verdict: self.verdict,
            kappa0: c.map(|s| s.kappa0_mean),
            kappa_transverse: c.map(|s| s.kappa_transverse_mean),
            variances: c.map(|s| vec![s.var_kappa0, s.var_kappa_transverse]).unwrap_or_default(),
            boundary_points: self.recession.boundary_points,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub verdict: Verdict,
    pub kappa0: Option<f64>,
    pub kappa_transverse: Option<f64>,
    pub variances: Vec<f64>,
    pub boundary_points: usize,
}

/// Seeded sample points from the field's default sampling region.
pub fn sample_points(field: &HeightField, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| field.sample_point(&mut rng)).collect()
}

/// Constancy scan, Ricci sign and sublevel analysis combined into a verdict.
pub fn classify_field(field: &HeightField, opts: &ClassifyOptions) -> Result<GlobalAnalysis> {
    let points = sample_points(field, opts.samples, opts.seed);
    let min_ricci_eig = points
        .par_iter()
        .map(|x| -> Result<f64> {
            let jet = field.eval_jet(x)?;
            let forms = fundamental_forms(&jet);
            let ric = ricci_coordinate(&jet, &forms);
            Ok(generalized_symmetric_eigen(&ric, &forms.g)?.0[0])
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let (constancy, constancy_error) = match constancy_scan(field, &points) {
        Ok(scan) => (Some(scan), None),
        Err(e @ (Error::Structure(_) | Error::Precondition(_))) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let recession = recession_report(field, &opts.levels, opts.grid.as_ref())?;
    let verdict = classify_global(constancy.as_ref(), &recession, min_ricci_eig >= -RICCI_NULL_TOL)?;
    Ok(GlobalAnalysis {
        verdict,
        constancy,
        constancy_error,
        min_ricci_eig,
        recession,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::height_field::Cap;

    #[test]
    fn cone_null_direction_is_radial_and_principal() {
        let field = HeightField::equidistant_cone(3, 1.0).unwrap();
        let rep = flat_direction_check(&field.eval_jet(&[1.0, 0.0, 0.0]).unwrap()).unwrap();
        assert_eq!(rep.null_space_dim, 1);
        let k0 = 0.5f64.sqrt();
        assert!(rep.principal_alignment.unwrap() <= 1e-8);
        assert!((rep.kappa0.unwrap() - k0).abs() < 1e-12);
        assert!((rep.kappa0_expected.unwrap() - k0).abs() < 1e-12);
    }

    #[test]
    fn horosphere_is_all_null() {
        let field = HeightField::horosphere(3, 1.0).unwrap();
        let rep = flat_direction_check(&field.eval_jet(&[0.2, -0.1, 0.4]).unwrap()).unwrap();
        assert_eq!(rep.null_space_dim, 3);
        assert!((rep.kappa0.unwrap() - 1.0).abs() < 1e-12);
        assert!((rep.kappa0_expected.unwrap() - 1.0).abs() < 1e-12);
        assert!(rep.principal_alignment.unwrap() < 1e-12);
    }

    #[test]
    fn cap_has_no_null_direction() {
        let field = HeightField::sphere_cap(3, 2.0, 1.0, Cap::Lower).unwrap();
        let rep = flat_direction_check(&field.eval_jet(&[0.0; 3]).unwrap()).unwrap();
        assert!(rep.is_empty());
        assert_eq!(rep.kappa0, None);
    }

    #[test]
    fn low_dimension_is_rejected() {
        let field = HeightField::horosphere(2, 1.0).unwrap();
        let jet = field.eval_jet(&[0.0, 0.0]).unwrap();
        assert!(matches!(flat_direction_check(&jet), Err(Error::Precondition(_))));
    }

    #[test]
    fn cone_scan_is_constant() {
        for s in [0.5, 1.0, 2.0, 5.0] {
            let field = HeightField::equidistant_cone(3, s).unwrap();
            let pts = sample_points(&field, 100, 7);
            let scan = constancy_scan(&field, &pts).unwrap();
            assert_eq!(scan.shape, SpectrumShape::Split);
            assert!(scan.var_kappa0 <= 1e-20 && scan.var_kappa_transverse <= 1e-20);
            assert!(scan.product_defect <= 1e-10);
            assert!((scan.kappa0_mean - 1.0 / (1.0 + s * s).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn verdicts() {
        let opts = ClassifyOptions::default();
        let cone = HeightField::equidistant_cone(3, 1.0).unwrap();
        assert_eq!(classify_field(&cone, &opts).unwrap().verdict, Verdict::EquidistantTube);
        let horo = HeightField::horosphere(3, 1.0).unwrap();
        assert_eq!(classify_field(&horo, &opts).unwrap().verdict, Verdict::Horosphere);
        let cap = HeightField::sphere_cap(3, 2.0, 1.0, Cap::Lower).unwrap();
        assert_eq!(classify_field(&cap, &opts).unwrap().verdict, Verdict::Inconclusive);
    }

    #[test]
    fn too_many_ends_is_a_contradiction() {
        let rec = RecessionReport {
            levels: vec![1.0],
            components: vec![],
            tracked: vec![],
            boundary_points: 3,
            includes_projection_point: true,
            fat_recession_set: false,
            spacing: 0.1,
        };
        assert!(matches!(classify_global(None, &rec, true), Err(Error::Contradiction(_))));
        assert_eq!(classify_global(None, &rec, false).unwrap(), Verdict::Inconclusive);
    }
}
