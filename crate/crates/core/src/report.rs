//! Report plumbing: 17-significant-digit JSON and CSV output, run manifests.

use std::io::{self, Write};

use serde::Serialize;

use crate::error::Result;

/// Formats a float with 17 significant digits (`-inf`/`inf`/`NaN` spelled
/// out for CSV).
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// `serde_json` formatter printing every float with 17 significant digits.
/// Non-finite values become `null`.
#[derive(Debug, Default)]
pub struct Digits17 {
    inner: serde_json::ser::PrettyFormatter<'static>,
}

impl serde_json::ser::Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

/// Serializes `value` as pretty JSON with 17-digit floats.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17::default());
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// Everything needed to reproduce a report.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Surface JSON or grid file paths, verbatim.
    pub inputs: Vec<String>,
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
    pub seed: Option<u64>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            inputs: Vec::new(),
            config: serde_json::Value::Null,
            outputs: Vec::new(),
            seed: None,
        }
    }
}

/// A report with its manifest attached.
#[derive(Debug, Clone, Serialize)]
pub struct Envelope<T: Serialize> {
    pub manifest: RunManifest,
    #[serde(flatten)]
    pub body: T,
}

/// One row of a grid scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub x: Vec<f64>,
    pub f: f64,
    pub mean: f64,
    pub kappas: Vec<f64>,
    pub min_ricci_eig: f64,
    pub a: f64,
    pub b: f64,
    pub density: f64,
    pub regime: String,
}

pub fn write_scan_csv<W: Write>(n: usize, rows: &[ScanRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    header.extend(["f".into(), "H".into()]);
    header.extend((1..=n).map(|i| format!("kappa{i}")));
    for h in ["min_ric_eig", "A", "B", "AB_minus_n_minus_1", "density", "regime"] {
        header.push(h.into());
    }
    w.write_record(&header)?;
    let nm1 = n as f64 - 1.0;
    for r in rows {
        let mut rec: Vec<String> = r.x.iter().map(|v| fmt_f64(*v)).collect();
        rec.push(fmt_f64(r.f));
        rec.push(fmt_f64(r.mean));
        rec.extend(r.kappas.iter().map(|v| fmt_f64(*v)));
        rec.push(fmt_f64(r.min_ricci_eig));
        rec.push(fmt_f64(r.a));
        rec.push(fmt_f64(r.b));
        rec.push(fmt_f64(r.a * r.b - nm1));
        rec.push(fmt_f64(r.density));
        rec.push(r.regime.clone());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
        let s = to_json_string(&[1.0f64 / 3.0, f64::NAN]).unwrap();
        assert!(s.contains("3.3333333333333331e-1"));
        assert!(s.contains("null"));
    }

    #[test]
    fn json_round_trips_exactly() {
        let v = [std::f64::consts::PI, 1e-300, -2.5e17];
        let back: Vec<f64> = serde_json::from_str(&to_json_string(&v).unwrap()).unwrap();
        assert_eq!(back, v);
    }
}
