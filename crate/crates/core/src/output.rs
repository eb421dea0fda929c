//! CSV and JSON emission of sweep records.
//!
//! Both formats use the column order of [`COLUMNS`]. Floats are written with
//! 17 significant digits; non-finite values appear as `NaN` in CSV and `null`
//! in JSON.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, VortexError};
use crate::reduction::Method;
use crate::sweep::SweepRecord;
use crate::C64;

pub const COLUMNS: [&str; 12] = [
    "rho_re",
    "rho_im",
    "method",
    "converged",
    "r_re",
    "r_im",
    "iterations",
    "zero_count",
    "extra_zeros",
    "symmetry_defect",
    "min_abs_v",
    "ode_residual",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = VortexError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(VortexError::invalid(format!("unknown output format {other:?}"))),
        }
    }
}

impl FromStr for Method {
    type Err = VortexError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed_point" | "fp" => Ok(Method::FixedPoint),
            "shooting" | "shoot" => Ok(Method::Shooting),
            "finite_difference" | "fd" => Ok(Method::FiniteDifference),
            other => Err(VortexError::invalid(format!("unknown method {other:?}"))),
        }
    }
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn nan_as_null<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_none()
    }
}

fn null_as_nan<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// Flat JSON shape of a record.
#[derive(Serialize, Deserialize)]
struct Row {
    #[serde(serialize_with = "nan_as_null", deserialize_with = "null_as_nan")]
    rho_re: f64,
    #[serde(serialize_with = "nan_as_null", deserialize_with = "null_as_nan")]
    rho_im: f64,
    method: Method,
    converged: bool,
    #[serde(serialize_with = "nan_as_null", deserialize_with = "null_as_nan")]
    r_re: f64,
    #[serde(serialize_with = "nan_as_null", deserialize_with = "null_as_nan")]
    r_im: f64,
    iterations: usize,
    zero_count: usize,
    extra_zeros: usize,
    #[serde(serialize_with = "nan_as_null", deserialize_with = "null_as_nan")]
    symmetry_defect: f64,
    #[serde(serialize_with = "nan_as_null", deserialize_with = "null_as_nan")]
    min_abs_v: f64,
    #[serde(serialize_with = "nan_as_null", deserialize_with = "null_as_nan")]
    ode_residual: f64,
}

impl From<&SweepRecord> for Row {
    fn from(r: &SweepRecord) -> Self {
        Row {
            rho_re: r.rho.re,
            rho_im: r.rho.im,
            method: r.method,
            converged: r.converged,
            r_re: r.r.re,
            r_im: r.r.im,
            iterations: r.iterations,
            zero_count: r.zero_count,
            extra_zeros: r.extra_zeros,
            symmetry_defect: r.symmetry_defect,
            min_abs_v: r.min_abs_v,
            ode_residual: r.ode_residual,
        }
    }
}

impl From<Row> for SweepRecord {
    fn from(r: Row) -> Self {
        SweepRecord {
            rho: C64::new(r.rho_re, r.rho_im),
            method: r.method,
            converged: r.converged,
            r: C64::new(r.r_re, r.r_im),
            iterations: r.iterations,
            zero_count: r.zero_count,
            extra_zeros: r.extra_zeros,
            symmetry_defect: r.symmetry_defect,
            min_abs_v: r.min_abs_v,
            ode_residual: r.ode_residual,
        }
    }
}

pub fn to_csv(records: &[SweepRecord]) -> String {
    let mut out = COLUMNS.join(",");
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            float(r.rho.re),
            float(r.rho.im),
            r.method.as_str(),
            r.converged,
            float(r.r.re),
            float(r.r.im),
            r.iterations,
            r.zero_count,
            r.extra_zeros,
            float(r.symmetry_defect),
            float(r.min_abs_v),
            float(r.ode_residual),
        );
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<SweepRecord>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| VortexError::invalid("empty CSV"))?;
    if header != COLUMNS.join(",") {
        return Err(VortexError::invalid(format!("unexpected CSV header {header:?}")));
    }
    let bad = |line: &str| VortexError::invalid(format!("malformed CSV row {line:?}"));
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != COLUMNS.len() {
                return Err(bad(line));
            }
            let num = |i: usize| f[i].parse::<f64>().map_err(|_| bad(line));
            let int = |i: usize| f[i].parse::<usize>().map_err(|_| bad(line));
            Ok(SweepRecord {
                rho: C64::new(num(0)?, num(1)?),
                method: f[2].parse()?,
                converged: f[3].parse().map_err(|_| bad(line))?,
                r: C64::new(num(4)?, num(5)?),
                iterations: int(6)?,
                zero_count: int(7)?,
                extra_zeros: int(8)?,
                symmetry_defect: num(9)?,
                min_abs_v: num(10)?,
                ode_residual: num(11)?,
            })
        })
        .collect()
}

pub fn to_json(records: &[SweepRecord]) -> Result<String> {
    let rows: Vec<Row> = records.iter().map(Row::from).collect();
    let mut s = serde_json::to_string_pretty(&rows)?;
    s.push('\n');
    Ok(s)
}

pub fn parse_json(text: &str) -> Result<Vec<SweepRecord>> {
    let rows: Vec<Row> = serde_json::from_str(text)?;
    Ok(rows.into_iter().map(SweepRecord::from).collect())
}

/// Writes `records` to `path` in the given format.
pub fn emit_results(records: &[SweepRecord], format: Format, path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(VortexError::invalid("no records to emit"));
    }
    let text = match format {
        Format::Csv => to_csv(records),
        Format::Json => to_json(records)?,
    };
    std::fs::write(path, text).map_err(|source| VortexError::Io { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(seed: f64) -> SweepRecord {
        SweepRecord {
            rho: C64::new(seed, -0.5),
            method: Method::FixedPoint,
            converged: true,
            r: C64::new(0.1 / 3.0, seed * 1e-7),
            iterations: 17,
            zero_count: 2,
            extra_zeros: 0,
            symmetry_defect: 1.5e-17,
            min_abs_v: 0.875,
            ode_residual: 2.0e-9,
        }
    }

    /// Equality that treats NaN as equal to itself.
    fn same(a: &SweepRecord, b: &SweepRecord) -> bool {
        let f = |x: f64, y: f64| x == y || (x.is_nan() && y.is_nan());
        f(a.rho.re, b.rho.re)
            && f(a.rho.im, b.rho.im)
            && a.method == b.method
            && a.converged == b.converged
            && f(a.r.re, b.r.re)
            && f(a.r.im, b.r.im)
            && a.iterations == b.iterations
            && a.zero_count == b.zero_count
            && a.extra_zeros == b.extra_zeros
            && f(a.symmetry_defect, b.symmetry_defect)
            && f(a.min_abs_v, b.min_abs_v)
            && f(a.ode_residual, b.ode_residual)
    }

    #[test]
    fn csv_layout() {
        let csv = to_csv(&[record(1.0)]);
        let lines: Vec<&str> = csv.split('\n').collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], COLUMNS.join(","));
        assert!(lines[2].is_empty() && !csv.contains('\r'));
        assert!(lines[1].starts_with("1.0000000000000000e0,-5.0000000000000000e-1,fixed_point,true,"));
    }

    #[test]
    fn nan_round_trips() {
        let mut rec = record(2.0);
        rec.r = C64::new(f64::NAN, f64::NAN);
        rec.converged = false;
        let json = to_json(&[rec.clone()]).unwrap();
        assert!(json.contains("\"r_re\": null"));
        assert!(same(&parse_json(&json).unwrap()[0], &rec));
        assert!(same(&parse_csv(&to_csv(&[rec.clone()])).unwrap()[0], &rec));
    }

    #[test]
    fn emit_errors() {
        let dir = tempfile::tempdir().unwrap();
        assert!(emit_results(&[], Format::Csv, &dir.path().join("a.csv")).is_err());
        let bad = dir.path().join("missing").join("a.csv");
        match emit_results(&[record(0.0)], Format::Csv, &bad) {
            Err(VortexError::Io { path, .. }) => assert_eq!(path, bad),
            other => panic!("expected an I/O error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_csv("").is_err());
        assert!(parse_csv("a,b\n").is_err());
        let mut text = to_csv(&[record(0.0)]);
        text.push_str("1,2,3\n");
        assert!(parse_csv(&text).is_err());
        assert!("xml".parse::<Format>().is_err());
        assert_eq!("fd".parse::<Method>().unwrap(), Method::FiniteDifference);
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(
            re in -1e3f64..1e3, im in -1e3f64..1e3, rr in -1.0f64..1.0,
            iters in 0usize..5000, extra in 0usize..4, defect in 0.0f64..1.0,
        ) {
            let rec = SweepRecord {
                rho: C64::new(re, im), r: C64::new(rr, rr / 7.0), iterations: iters,
                extra_zeros: extra, zero_count: 2 + extra, symmetry_defect: defect,
                ..record(0.0)
            };
            prop_assert!(same(&parse_json(&to_json(std::slice::from_ref(&rec)).unwrap()).unwrap()[0], &rec));
            prop_assert!(same(&parse_csv(&to_csv(std::slice::from_ref(&rec))).unwrap()[0], &rec));
        }
    }
}
