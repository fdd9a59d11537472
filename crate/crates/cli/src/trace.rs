//! Trace CSV: `iter,step_norm,cost,error,coord_0,…,coord_{m-1}`, one row
//! per iterate, LF endings, floats in shortest round-trip form.

use std::fmt::Write as _;
use std::path::Path;

use parnewton_core::IterationTrace;

use crate::error::{CliError, Result};

pub fn format_float(x: f64) -> String {
    ryu::Buffer::new().format(x).to_owned()
}

fn header(coords: usize) -> String {
    let mut h = String::from("iter,step_norm,cost,error");
    for i in 0..coords {
        let _ = write!(h, ",coord_{i}");
    }
    h
}

/// Renders a trace; `errors[k]` fills the error column when given.
pub fn render(trace: &IterationTrace, errors: Option<&[f64]>) -> String {
    let m = trace.points[0].ambient().len();
    let mut out = header(m);
    out.push('\n');
    for (k, p) in trace.points.iter().enumerate() {
        let _ = write!(out, "{k},");
        if k > 0 {
            out.push_str(&format_float(trace.step_norms[k - 1]));
        }
        out.push(',');
        out.push_str(&format_float(trace.cost_values[k]));
        out.push(',');
        if let Some(e) = errors {
            out.push_str(&format_float(e[k]));
        }
        for x in p.ambient().iter() {
            out.push(',');
            out.push_str(&format_float(*x));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub step_norm: Option<f64>,
    pub cost: f64,
    pub error: Option<f64>,
    pub coords: Vec<f64>,
}

pub fn read(path: &Path) -> Result<Vec<TraceRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<Vec<TraceRow>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let schema = |line: usize, message: String| CliError::Schema { line, message };
    let head = reader.headers().map_err(|e| schema(1, e.to_string()))?.clone();
    let coords = head.len().checked_sub(4).ok_or_else(|| schema(1, "fewer than four columns".into()))?;
    let expected = header(coords);
    if head.iter().collect::<Vec<_>>().join(",") != expected {
        return Err(schema(1, format!("header must be `{expected}`")));
    }
    let mut rows = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let line = k + 2;
        let record = record.map_err(|e| schema(line, e.to_string()))?;
        let num = |i: usize| -> Result<Option<f64>> {
            let field = &record[i];
            if field.is_empty() {
                return Ok(None);
            }
            field.parse::<f64>().map(Some).map_err(|_| schema(line, format!("column {} is not a number: {field:?}", head[i].to_string())))
        };
        let iter: usize = record[0].parse().map_err(|_| schema(line, "iter is not an integer".into()))?;
        if iter != k {
            return Err(schema(line, format!("iter {iter} out of sequence, expected {k}")));
        }
        let step_norm = num(1)?;
        if (k == 0) != step_norm.is_none() {
            return Err(schema(line, "step_norm must be empty exactly on the first row".into()));
        }
        let cost = num(2)?.ok_or_else(|| schema(line, "cost is empty".into()))?;
        let error = num(3)?;
        let coords = (4..record.len())
            .map(|i| num(i)?.ok_or_else(|| schema(line, format!("{} is empty", &head[i]))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(TraceRow { iter, step_norm, cost, error, coords });
    }
    if rows.is_empty() {
        return Err(schema(2, "no rows".into()));
    }
    Ok(rows)
}
