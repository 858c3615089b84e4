//! Result records and their CSV/JSON serialisation.
//!
//! Floats are written in shortest round-trip form in both formats, so a CSV
//! cell and the matching JSON number parse to the same `f64`. Non-finite
//! values become `nan`/`inf`/`-inf` in CSV and `null` in JSON.

use std::io::{self, Write};

use num_complex::Complex64;
use serde::Serialize;

/// Shortest representation that parses back to the same value.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:?}")
    }
}

fn fmt_opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn fmt_opt_f64(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// `|z|²` with the same operation order used by the writer's check.
fn abs2(z: Complex64) -> f64 {
    z.re * z.re + z.im * z.im
}

fn same(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan())
}

/// A record that can be written as one CSV line.
pub trait CsvRecord {
    const HEADER: &'static [&'static str];
    fn cells(&self) -> Vec<String>;
}

pub fn write_header<W: Write + ?Sized, R: CsvRecord>(out: &mut W) -> io::Result<()> {
    writeln!(out, "{}", R::HEADER.join(","))
}

pub fn write_record<W: Write + ?Sized, R: CsvRecord>(out: &mut W, rec: &R) -> io::Result<()> {
    writeln!(out, "{}", rec.cells().join(","))
}

/// One `# key=value` metadata line.
pub fn write_comment<W: Write + ?Sized>(out: &mut W, key: &str, value: impl std::fmt::Display) -> io::Result<()> {
    writeln!(out, "# {key}={value}")
}

/// Smooth parts of `R` and `T` at one transmission angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResultRow {
    pub theta_deg: f64,
    #[serde(rename = "R_re")]
    pub r_re: f64,
    #[serde(rename = "R_im")]
    pub r_im: f64,
    #[serde(rename = "R_abs2")]
    pub r_abs2: f64,
    #[serde(rename = "T_re")]
    pub t_re: f64,
    #[serde(rename = "T_im")]
    pub t_im: f64,
    #[serde(rename = "T_abs2")]
    pub t_abs2: f64,
}

impl ResultRow {
    pub fn new(theta_deg: f64, r: Complex64, t: Complex64) -> Self {
        Self {
            theta_deg,
            r_re: r.re,
            r_im: r.im,
            r_abs2: abs2(r),
            t_re: t.re,
            t_im: t.im,
            t_abs2: abs2(t),
        }
    }

    /// Whether the `|·|²` fields are the squared magnitudes of the complex ones.
    pub fn is_consistent(&self) -> bool {
        same(self.r_abs2, abs2(Complex64::new(self.r_re, self.r_im)))
            && same(self.t_abs2, abs2(Complex64::new(self.t_re, self.t_im)))
    }
}

impl CsvRecord for ResultRow {
    const HEADER: &'static [&'static str] = &["theta_deg", "R_re", "R_im", "R_abs2", "T_re", "T_im", "T_abs2"];
    fn cells(&self) -> Vec<String> {
        [
            self.theta_deg,
            self.r_re,
            self.r_im,
            self.r_abs2,
            self.t_re,
            self.t_im,
            self.t_abs2,
        ]
        .map(fmt_f64)
        .to_vec()
    }
}

/// A delta term `coeff·δ(θ - angle)` of `R` or `T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaRow {
    pub amplitude: &'static str,
    pub angle_deg: f64,
    pub coeff_re: f64,
    pub coeff_im: f64,
}

/// A delta row tagged with its wavenumber, for the sidecar file.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyedDelta<'a> {
    pub k: f64,
    pub delta: &'a DeltaRow,
}

impl CsvRecord for KeyedDelta<'_> {
    const HEADER: &'static [&'static str] = &["k", "amplitude", "angle_deg", "coeff_re", "coeff_im"];
    fn cells(&self) -> Vec<String> {
        vec![
            fmt_f64(self.k),
            self.delta.amplitude.to_string(),
            fmt_f64(self.delta.angle_deg),
            fmt_f64(self.delta.coeff_re),
            fmt_f64(self.delta.coeff_im),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub k: f64,
    pub regime: &'static str,
    pub n_star: usize,
    pub exceptional: bool,
    pub truncation_used: usize,
    pub paper_refs: Vec<&'static str>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    /// Some angles failed and carry NaN.
    Partial,
    Failed,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::Partial => "partial",
            RunStatus::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterRun {
    pub metadata: RunMetadata,
    pub status: RunStatus,
    /// Angles whose evaluation failed.
    pub failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub rows: Vec<ResultRow>,
    pub deltas: Vec<DeltaRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterReport {
    pub command: &'static str,
    pub config_sha256: String,
    pub runs: Vec<ScatterRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpRow {
    pub k: f64,
    pub n: usize,
    pub varpi_re: f64,
    pub varpi_im: f64,
    pub multiplier_re: f64,
    pub multiplier_im: f64,
    pub reflection_re: f64,
    pub reflection_im: f64,
    pub regime: &'static str,
}

impl CsvRecord for EpRow {
    const HEADER: &'static [&'static str] = &[
        "k",
        "n",
        "varpi_re",
        "varpi_im",
        "multiplier_re",
        "multiplier_im",
        "reflection_re",
        "reflection_im",
        "regime",
    ];
    fn cells(&self) -> Vec<String> {
        let mut c = vec![fmt_f64(self.k), self.n.to_string()];
        c.extend(
            [
                self.varpi_re,
                self.varpi_im,
                self.multiplier_re,
                self.multiplier_im,
                self.reflection_re,
                self.reflection_im,
            ]
            .map(fmt_f64),
        );
        c.push(self.regime.to_string());
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpReport {
    pub command: &'static str,
    pub config_sha256: String,
    pub k_min: f64,
    pub k_max: f64,
    pub rows: Vec<EpRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeRow {
    pub k: f64,
    pub regime: &'static str,
    pub n_star: usize,
    pub eta: Option<f64>,
    pub min_evanescent_decay: f64,
    pub exceptional_mode: Option<usize>,
    pub filter_margin: Option<f64>,
    pub length_ratio: Option<f64>,
}

impl CsvRecord for RegimeRow {
    const HEADER: &'static [&'static str] = &[
        "k",
        "regime",
        "n_star",
        "eta",
        "min_evanescent_decay",
        "exceptional_mode",
        "filter_margin",
        "length_ratio",
    ];
    fn cells(&self) -> Vec<String> {
        vec![
            fmt_f64(self.k),
            self.regime.to_string(),
            self.n_star.to_string(),
            fmt_opt_f64(self.eta),
            fmt_f64(self.min_evanescent_decay),
            fmt_opt(self.exceptional_mode),
            fmt_opt_f64(self.filter_margin),
            fmt_opt_f64(self.length_ratio),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeTable {
    pub command: &'static str,
    pub config_sha256: String,
    pub rows: Vec<RegimeRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldRow {
    pub x: f64,
    pub y: f64,
    pub psi_re: f64,
    pub psi_im: f64,
    pub psi_abs2: f64,
}

impl FieldRow {
    pub fn new(x: f64, y: f64, psi: Complex64) -> Self {
        Self {
            x,
            y,
            psi_re: psi.re,
            psi_im: psi.im,
            psi_abs2: abs2(psi),
        }
    }
}

impl CsvRecord for FieldRow {
    const HEADER: &'static [&'static str] = &["x", "y", "psi_re", "psi_im", "psi_abs2"];
    fn cells(&self) -> Vec<String> {
        [self.x, self.y, self.psi_re, self.psi_im, self.psi_abs2]
            .map(fmt_f64)
            .to_vec()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldReport {
    pub command: &'static str,
    pub config_sha256: String,
    pub k: f64,
    pub theta0_deg: f64,
    pub modes: usize,
    pub nx: usize,
    pub ny: usize,
    /// Samples whose quadrature failed; they hold NaN.
    pub failures: usize,
    pub truncation_bound: f64,
    pub rows: Vec<FieldRow>,
}

/// Pretty JSON followed by a newline.
pub fn write_json<W: Write + ?Sized, T: Serialize>(out: &mut W, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_text() {
        for x in [0.1, -2.5e-300, 1.0 / 3.0, 6.02214076e23, f64::MIN_POSITIVE, -0.0, 1e16] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(f64::NAN), "nan");
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
        assert!("nan".parse::<f64>().unwrap().is_nan());
    }

    #[test]
    fn result_row_layout_and_consistency() {
        let row = ResultRow::new(10.0, Complex64::new(3.0, 4.0), Complex64::new(f64::NAN, 0.0));
        assert_eq!(row.cells(), ["10.0", "3.0", "4.0", "25.0", "nan", "0.0", "nan"]);
        assert!(row.is_consistent());
        let bad = ResultRow { r_abs2: 24.0, ..row };
        assert!(!bad.is_consistent());
        let mut buf = Vec::new();
        write_header::<_, ResultRow>(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "theta_deg,R_re,R_im,R_abs2,T_re,T_im,T_abs2\n"
        );
    }

    #[test]
    fn json_uses_null_for_missing_and_nan() {
        let row = RegimeRow {
            k: 1.0,
            regime: "generic",
            n_star: 0,
            eta: None,
            min_evanescent_decay: f64::NAN,
            exceptional_mode: None,
            filter_margin: Some(0.5),
            length_ratio: None,
        };
        let v = serde_json::to_value(&row).unwrap();
        assert!(v["eta"].is_null());
        assert!(v["min_evanescent_decay"].is_null());
        assert_eq!(v["filter_margin"], 0.5);
        assert_eq!(row.cells()[3], "");
    }
}
