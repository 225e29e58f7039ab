//! Lattice functions: node storage, Dirichlet masks, CSV/JSON I/O and
//! tensor-product Lagrange interpolation.
//!
//! Nodes are stored row-major with the last axis varying fastest. A node is
//! *excised* when its value is `-inf`; excised nodes are always masked.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape and placement of a lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dims: Vec<usize>,
    pub spacing: f64,
    pub origin: Vec<f64>,
}

impl GridSpec {
    pub fn new(dims: Vec<usize>, spacing: f64, origin: Vec<f64>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Parameter("grid needs at least one axis".into()));
        }
        if dims.len() != origin.len() {
            return Err(Error::Parameter(format!(
                "grid has {} axes but origin has {} coordinates",
                dims.len(),
                origin.len()
            )));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 3) {
            return Err(Error::Parameter(format!("axis with {d} nodes, need >= 3")));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::Parameter(format!("spacing {spacing} must be positive")));
        }
        Ok(Self {
            dims,
            spacing,
            origin,
        })
    }

    /// Grid covering the box `[lower, upper]` with the given spacing. The
    /// upper corner is rounded to the nearest whole number of cells.
    pub fn covering(lower: &[f64], upper: &[f64], spacing: f64) -> Result<Self> {
        let dims = lower
            .iter()
            .zip(upper)
            .map(|(lo, hi)| ((hi - lo) / spacing).round() as usize + 1)
            .collect();
        Self::new(dims, spacing, lower.to_vec())
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for d in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[d] = strides[d + 1] * self.dims[d + 1];
        }
        strides
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &d)| acc * d + i)
    }

    pub fn multi_index(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for d in (0..self.dims.len()).rev() {
            out[d] = index % self.dims[d];
            index /= self.dims[d];
        }
        out
    }

    pub fn point(&self, multi: &[usize]) -> Vec<f64> {
        multi
            .iter()
            .zip(&self.origin)
            .map(|(&i, &o)| o + i as f64 * self.spacing)
            .collect()
    }

    pub fn node_point(&self, index: usize) -> Vec<f64> {
        self.point(&self.multi_index(index))
    }

    pub fn upper(&self) -> Vec<f64> {
        self.origin
            .iter()
            .zip(&self.dims)
            .map(|(o, &d)| o + (d - 1) as f64 * self.spacing)
            .collect()
    }

    pub fn is_topological_boundary(&self, multi: &[usize]) -> bool {
        multi
            .iter()
            .zip(&self.dims)
            .any(|(&i, &d)| i == 0 || i + 1 == d)
    }

    /// Cell volume `spacing^n`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dims.len() as i32)
    }
}

/// Values on a lattice together with the Dirichlet (boundary) mask.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    spec: GridSpec,
    values: Vec<f64>,
    boundary: Vec<bool>,
}

impl GridFunction {
    /// Wraps node values; the mask is the topological boundary.
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::Data(format!(
                "expected {} node values, got {}",
                spec.len(),
                values.len()
            )));
        }
        let boundary = (0..spec.len())
            .map(|i| spec.is_topological_boundary(&spec.multi_index(i)))
            .collect();
        let gf = Self {
            spec,
            values,
            boundary,
        };
        gf.validate()?;
        Ok(gf)
    }

    pub fn with_mask(spec: GridSpec, values: Vec<f64>, boundary: Vec<bool>) -> Result<Self> {
        if boundary.len() != spec.len() || values.len() != spec.len() {
            return Err(Error::Data("mask or values length does not match grid".into()));
        }
        let gf = Self {
            spec,
            values,
            boundary,
        };
        gf.validate()?;
        Ok(gf)
    }

    /// Samples `func` at every node, in parallel.
    pub fn sample<F>(spec: GridSpec, func: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let values = (0..spec.len())
            .into_par_iter()
            .map(|i| func(&spec.node_point(i)))
            .collect();
        Self::new(spec, values)
    }

    pub fn constant(spec: GridSpec, value: f64) -> Result<Self> {
        let n = spec.len();
        Self::new(spec, vec![value; n])
    }

    fn validate(&self) -> Result<()> {
        for (i, (&v, &b)) in self.values.iter().zip(&self.boundary).enumerate() {
            if !b && self.spec.is_topological_boundary(&self.spec.multi_index(i)) {
                return Err(Error::Data(format!(
                    "boundary mask misses topological boundary node {i}"
                )));
            }
            if v.is_nan() || v == f64::INFINITY {
                return Err(Error::Data(format!("node {i} holds {v}")));
            }
            if v == f64::NEG_INFINITY && !b {
                return Err(Error::Data(format!("-inf at unmasked node {i}")));
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    pub fn value(&self, multi: &[usize]) -> f64 {
        self.values[self.spec.index(multi)]
    }

    pub fn is_excised(&self, index: usize) -> bool {
        self.values[index] == f64::NEG_INFINITY
    }

    pub fn excised_count(&self) -> usize {
        self.values.iter().filter(|v| **v == f64::NEG_INFINITY).count()
    }

    /// Replaces the free (unmasked) node values, keeping the mask.
    pub fn set_interior(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.values.len() {
            return Err(Error::Data("value length mismatch".into()));
        }
        for (i, v) in values.iter().enumerate() {
            if !self.boundary[i] {
                self.values[i] = *v;
            }
        }
        self.validate()
    }

    /// Marks nodes matching `pred` as `-inf` and fixes every finite node that
    /// shares a cell with an excised node, so the hole carries Dirichlet data.
    /// Returns the number of excised nodes.
    pub fn excise_where<P>(&mut self, pred: P) -> usize
    where
        P: Fn(&[f64]) -> bool,
    {
        let mut excised = Vec::new();
        for i in 0..self.spec.len() {
            if self.values[i] == f64::NEG_INFINITY || pred(&self.spec.node_point(i)) {
                excised.push(i);
            }
        }
        for &i in &excised {
            self.values[i] = f64::NEG_INFINITY;
            self.boundary[i] = true;
        }
        let n = self.spec.ndim();
        for &i in &excised {
            let m = self.spec.multi_index(i);
            for offset in 0..3usize.pow(n as u32) {
                let mut nb = m.clone();
                let mut code = offset;
                let mut ok = true;
                for (d, c) in nb.iter_mut().enumerate() {
                    let step = (code % 3) as isize - 1;
                    code /= 3;
                    let v = *c as isize + step;
                    if v < 0 || v as usize >= self.spec.dims[d] {
                        ok = false;
                        break;
                    }
                    *c = v as usize;
                }
                if ok {
                    let j = self.spec.index(&nb);
                    self.boundary[j] = true;
                }
            }
        }
        excised.len()
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub fn header(&self) -> GridSpec {
        self.spec.clone()
    }

    pub fn write_header<W: Write>(&self, out: W) -> Result<()> {
        let mut out = out;
        out.write_all(crate::report::to_json_string(&self.spec)?.as_bytes())?;
        Ok(())
    }

    /// Node dump: one row per node with multi-index, value and mask flag.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (0..self.spec.ndim()).map(|d| format!("i{d}")).collect();
        header.push("value".into());
        header.push("boundary".into());
        w.write_record(&header)?;
        for i in 0..self.spec.len() {
            let mut row: Vec<String> = self
                .spec
                .multi_index(i)
                .iter()
                .map(|v| v.to_string())
                .collect();
            row.push(crate::report::fmt_f64(self.values[i]));
            row.push(u8::from(self.boundary[i]).to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a node dump in row-major order. Only the `value` column is
    /// required; a `boundary` column, when present, replaces the default mask.
    pub fn read_csv<R: Read>(spec: GridSpec, input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let headers = rdr.headers()?.clone();
        let value_col = headers
            .iter()
            .position(|h| h.trim() == "value")
            .ok_or_else(|| Error::Data("CSV has no `value` column".into()))?;
        let mask_col = headers.iter().position(|h| h.trim() == "boundary");
        let mut values = Vec::with_capacity(spec.len());
        let mut mask = Vec::with_capacity(spec.len());
        for record in rdr.records() {
            let record = record?;
            let field = record
                .get(value_col)
                .ok_or_else(|| Error::Data("short CSV row".into()))?;
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::Data(format!("bad node value `{field}`")))?;
            values.push(v);
            if let Some(c) = mask_col {
                let flag = record.get(c).map(str::trim).unwrap_or("0");
                mask.push(matches!(flag, "1" | "true"));
            }
        }
        if mask_col.is_some() {
            Self::with_mask(spec, values, mask)
        } else {
            Self::new(spec, values)
        }
    }

    pub fn load(header: &Path, values: &Path) -> Result<Self> {
        let spec: GridSpec = serde_json::from_reader(std::fs::File::open(header)?)?;
        let spec = GridSpec::new(spec.dims, spec.spacing, spec.origin)?;
        Self::read_csv(spec, std::fs::File::open(values)?)
    }

    pub fn save(&self, header: &Path, values: &Path) -> Result<()> {
        self.write_header(std::fs::File::create(header)?)?;
        self.write_csv(std::fs::File::create(values)?)
    }
}

/// Value, first and second derivative weights of the Lagrange basis on the
/// integer nodes `start..=start+degree`, evaluated at `t` (node units).
pub(crate) fn lagrange_weights(start: isize, degree: usize, t: f64) -> [Vec<f64>; 3] {
    let nodes: Vec<f64> = (0..=degree).map(|j| (start + j as isize) as f64).collect();
    let mut w0 = vec![0.0; degree + 1];
    let mut w1 = vec![0.0; degree + 1];
    let mut w2 = vec![0.0; degree + 1];
    for j in 0..=degree {
        let tj = nodes[j];
        let denom: f64 = (0..=degree)
            .filter(|&m| m != j)
            .map(|m| tj - nodes[m])
            .product();
        let prod_except = |skip: &[usize]| -> f64 {
            (0..=degree)
                .filter(|m| *m != j && !skip.contains(m))
                .map(|m| t - nodes[m])
                .product()
        };
        w0[j] = prod_except(&[]) / denom;
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        for a in (0..=degree).filter(|&a| a != j) {
            d1 += prod_except(&[a]);
            for b in (0..=degree).filter(|&b| b != j && b != a) {
                d2 += prod_except(&[a, b]);
            }
        }
        w1[j] = d1 / denom;
        w2[j] = d2 / denom;
    }
    [w0, w1, w2]
}

/// Interpolated value, gradient and Hessian (row-major `n*n`) of a grid
/// function at `x` using tensor-product Lagrange polynomials of `degree`.
/// Fails when the stencil touches a non-finite node.
pub(crate) fn interpolate_jet(
    grid: &GridFunction,
    degree: usize,
    x: &[f64],
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let spec = grid.spec();
    let n = spec.ndim();
    let h = spec.spacing;
    let mut starts = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for d in 0..n {
        let t = (x[d] - spec.origin[d]) / h;
        let max_start = spec.dims[d] as isize - 1 - degree as isize;
        if max_start < 0 {
            return Err(Error::Parameter(format!(
                "interpolation degree {degree} needs more than {} nodes",
                spec.dims[d]
            )));
        }
        let start = ((t - degree as f64 / 2.0).round() as isize).clamp(0, max_start);
        let [w0, w1, w2] = lagrange_weights(start, degree, t);
        starts.push(start as usize);
        weights.push((w0, w1.iter().map(|w| w / h).collect::<Vec<_>>(), w2.iter().map(|w| w / (h * h)).collect::<Vec<_>>()));
    }

    let k = degree + 1;
    let mut value = 0.0;
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n * n];
    let mut local = vec![0usize; n];
    let mut multi = vec![0usize; n];
    for code in 0..k.pow(n as u32) {
        let mut c = code;
        for d in (0..n).rev() {
            local[d] = c % k;
            c /= k;
            multi[d] = starts[d] + local[d];
        }
        let v = grid.value(&multi);
        if !v.is_finite() {
            return Err(Error::domain(x, "interpolation stencil touches an excised node"));
        }
        let w0: Vec<f64> = (0..n).map(|d| weights[d].0[local[d]]).collect();
        let w1: Vec<f64> = (0..n).map(|d| weights[d].1[local[d]]).collect();
        let w2: Vec<f64> = (0..n).map(|d| weights[d].2[local[d]]).collect();
        let prod_except = |skip_a: usize, skip_b: usize| -> f64 {
            (0..n)
                .filter(|&d| d != skip_a && d != skip_b)
                .map(|d| w0[d])
                .product()
        };
        value += v * prod_except(n, n);
        for i in 0..n {
            grad[i] += v * w1[i] * prod_except(i, n);
            hess[i * n + i] += v * w2[i] * prod_except(i, n);
            for j in (i + 1)..n {
                let c = v * w1[i] * w1[j] * prod_except(i, j);
                hess[i * n + j] += c;
                hess[j * n + i] += c;
            }
        }
    }
    Ok((value, grad, hess))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec3() -> GridSpec {
        GridSpec::new(vec![4, 5, 6], 0.5, vec![0.0, 1.0, -1.0]).unwrap()
    }

    #[test]
    fn index_round_trip() {
        let s = spec3();
        for i in 0..s.len() {
            assert_eq!(s.index(&s.multi_index(i)), i);
        }
        assert_eq!(s.strides(), vec![30, 6, 1]);
        assert_eq!(s.upper(), vec![1.5, 3.0, 1.5]);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(GridSpec::new(vec![2, 5], 0.1, vec![0.0, 0.0]).is_err());
        assert!(GridSpec::new(vec![3, 5], 0.0, vec![0.0, 0.0]).is_err());
        assert!(GridSpec::new(vec![3, 5], 0.1, vec![0.0]).is_err());
    }

    #[test]
    fn neg_infinity_needs_mask() {
        let s = GridSpec::new(vec![3, 3], 1.0, vec![0.0, 0.0]).unwrap();
        let mut v = vec![0.0; 9];
        v[4] = f64::NEG_INFINITY;
        assert!(GridFunction::new(s.clone(), v.clone()).is_err());
        let mut mask = vec![true; 9];
        mask[4] = true;
        assert!(GridFunction::with_mask(s, v, mask).is_ok());
    }

    #[test]
    fn mask_must_cover_boundary() {
        let s = GridSpec::new(vec![3, 3], 1.0, vec![0.0, 0.0]).unwrap();
        let mut mask = vec![true; 9];
        mask[0] = false;
        assert!(GridFunction::with_mask(s, vec![0.0; 9], mask).is_err());
    }

    #[test]
    fn lagrange_reproduces_cubic_exactly() {
        let s = GridSpec::new(vec![9, 9], 0.25, vec![-1.0, -1.0]).unwrap();
        let p = |x: &[f64]| x[0].powi(3) - 2.0 * x[0] * x[1] * x[1] + x[1] + 0.5;
        let gf = GridFunction::sample(s, p).unwrap();
        let x = [0.13, -0.41];
        let (v, g, h) = interpolate_jet(&gf, 4, &x).unwrap();
        assert!((v - p(&x)).abs() < 1e-12);
        assert!((g[0] - (3.0 * x[0] * x[0] - 2.0 * x[1] * x[1])).abs() < 1e-11);
        assert!((g[1] - (-4.0 * x[0] * x[1] + 1.0)).abs() < 1e-11);
        assert!((h[0] - 6.0 * x[0]).abs() < 1e-10);
        assert!((h[1] - (-4.0 * x[1])).abs() < 1e-10);
        assert!((h[3] - (-4.0 * x[0])).abs() < 1e-10);
        assert_eq!(h[1], h[2]);
    }

    #[test]
    fn csv_round_trip_keeps_mask_and_infinities() {
        let s = GridSpec::new(vec![3, 4], 0.5, vec![0.0, 0.0]).unwrap();
        let mut gf = GridFunction::sample(s.clone(), |x| x[0] + 2.0 * x[1]).unwrap();
        gf.excise_where(|x| x[0] == 0.5 && x[1] == 0.5);
        let mut buf = Vec::new();
        gf.write_csv(&mut buf).unwrap();
        let back = GridFunction::read_csv(s, buf.as_slice()).unwrap();
        assert_eq!(back, gf);
    }

    #[test]
    fn excision_fixes_neighbours() {
        let s = GridSpec::new(vec![5, 5], 1.0, vec![-2.0, -2.0]).unwrap();
        let mut gf = GridFunction::constant(s.clone(), 1.0).unwrap();
        let count = gf.excise_where(|x| x[0] == 0.0 && x[1] == 0.0);
        assert_eq!(count, 1);
        assert_eq!(gf.excised_count(), 1);
        assert!(gf.boundary_mask().iter().all(|&b| b));
    }
}
