//! Input parsing and output formatting for the command line.

use std::fs;

use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use super::CliError;
use crate::channels::{ChannelSpec, KrausChannel};
use crate::cost::{CurveSample, CurveValue};
use crate::entanglement::Decomposition;
use crate::qmat::{CMatrix, DensityMatrix};

/// Literal argument, or the contents of a file when prefixed with `@`.
pub fn read_arg(raw: &str) -> Result<String, CliError> {
    match raw.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {path}: {e}"))),
        None => Ok(raw.to_string()),
    }
}

/// Channel from its JSON description. Schema problems are usage errors;
/// a non-complete Kraus set is a numerical failure.
pub fn parse_channel(text: &str) -> Result<KrausChannel, CliError> {
    let spec: ChannelSpec =
        serde_json::from_str(&read_arg(text)?).map_err(|e| CliError::Usage(format!("invalid channel JSON: {e}")))?;
    Ok(spec.build()?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StateJson {
    dims: Vec<usize>,
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Option<Vec<Vec<f64>>>,
}

pub fn parse_state(text: &str) -> Result<DensityMatrix, CliError> {
    let s: StateJson =
        serde_json::from_str(&read_arg(text)?).map_err(|e| CliError::Usage(format!("invalid state JSON: {e}")))?;
    let dim: usize = s.dims.iter().product();
    if s.dims.is_empty() || s.dims.contains(&0) {
        return Err(CliError::Usage(format!("bad dims {:?}", s.dims)));
    }
    let shaped = |m: &[Vec<f64>]| m.len() == dim && m.iter().all(|r| r.len() == dim);
    if !shaped(&s.re) || s.im.as_deref().is_some_and(|im| !shaped(im)) {
        return Err(CliError::Usage(format!("state matrix must be {dim}x{dim} for dims {:?}", s.dims)));
    }
    let mut mat = CMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            let im = s.im.as_ref().map_or(0.0, |m| m[r][c]);
            mat[(r, c)] = Complex64::new(s.re[r][c], im);
        }
    }
    Ok(DensityMatrix::new(s.dims, mat)?)
}

/// Round to 12 significant digits.
pub fn round12(v: f64) -> f64 {
    if v.is_finite() {
        format!("{v:.11e}").parse().expect("formatted float parses")
    } else {
        v
    }
}

/// JSON number at 12 significant digits; integral values print without a fraction
/// and non-finite values as the strings `inf`, `-inf`, `nan`.
pub fn num(v: f64) -> Value {
    let r = round12(v);
    if r.is_nan() {
        Value::from("nan")
    } else if r.is_infinite() {
        Value::from(if r > 0.0 { "inf" } else { "-inf" })
    } else if r.fract() == 0.0 && r.abs() < 1e15 {
        Value::from(r as i64)
    } else {
        Value::from(r)
    }
}

/// CSV cell at 12 significant digits.
pub fn cell(v: f64) -> String {
    match num(v) {
        Value::String(s) => s,
        other => other.to_string(),
    }
}

pub fn matrix_json(m: &CMatrix) -> (Value, Value) {
    let part = |f: fn(&Complex64) -> f64| {
        Value::Array((0..m.rows()).map(|r| Value::Array((0..m.cols()).map(|c| num(f(&m[(r, c)]))).collect())).collect())
    };
    (part(|z| z.re), part(|z| z.im))
}

pub fn state_json(rho: &DensityMatrix) -> Value {
    let (re, im) = matrix_json(rho.mat());
    json!({ "dims": rho.dims(), "re": re, "im": im })
}

pub fn decomposition_json(value: f64, d: &Decomposition) -> Value {
    let items: Vec<Value> = d
        .items()
        .iter()
        .map(|(p, psi)| {
            let vec: Vec<Value> = psi.amplitudes().iter().map(|z| json!([num(z.re), num(z.im)])).collect();
            json!({ "p": num(*p), "vec": vec })
        })
        .collect();
    json!({ "value": num(value), "items": items })
}

fn curve_value(v: CurveValue) -> Value {
    match v {
        CurveValue::Real(x) => num(x),
        CurveValue::Unbounded => Value::from("inf"),
    }
}

pub fn curve_csv(param_name: &str, rows: &[CurveSample]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![param_name.to_string()];
    if let Some(first) = rows.first() {
        header.extend(first.values.iter().map(|(n, _)| n.to_string()));
    }
    w.write_record(&header).map_err(csv_err)?;
    for row in rows {
        let mut rec = vec![cell(row.param)];
        rec.extend(row.values.iter().map(|(_, v)| match v {
            CurveValue::Real(x) => cell(*x),
            CurveValue::Unbounded => "inf".to_string(),
        }));
        w.write_record(&rec).map_err(csv_err)?;
    }
    table_text(w)
}

pub fn curve_json(param_name: &str, rows: &[CurveSample]) -> Value {
    Value::Array(
        rows.iter()
            .map(|row| {
                let mut m = Map::new();
                m.insert(param_name.to_string(), num(row.param));
                for (n, v) in &row.values {
                    m.insert(n.to_string(), curve_value(*v));
                }
                Value::Object(m)
            })
            .collect(),
    )
}

/// CSV from a header and rows of already formatted cells.
pub fn plain_csv(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    table_text(w)
}

fn table_text(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}
