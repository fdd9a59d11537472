use std::path::Path;

use parnewton_core::convergence::RateEstimate;
use parnewton_core::numerics::Vector;
use parnewton_core::{error_sequence, estimate_rate, IterationTrace, ManifoldDescriptor, Point, Termination};

use crate::error::{CliError, Result};
use crate::trace::{self, TraceRow};

/// Where the errors come from.
#[derive(Debug, Clone, PartialEq)]
pub enum TruthSpec {
    /// The trace's own error column.
    Column,
    /// The final iterate; the last two errors are dropped.
    SelfReferential(Option<ManifoldDescriptor>),
    Coords(Vec<f64>, Option<ManifoldDescriptor>),
}

impl std::str::FromStr for TruthSpec {
    type Err = CliError;

    /// `column`, `self[@M]` or `coords:x1,x2,…[@M]`, where `M` is
    /// `euclidean:N`, `sphere:N`, `stiefel:N,P` or `grassmann:N,P`
    /// (default: Euclidean in the trace's coordinates).
    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| CliError::config("--truth", msg);
        let (head, manifold) = match s.split_once('@') {
            Some((h, m)) => (h, Some(parse_manifold(m).map_err(bad)?)),
            None => (s, None),
        };
        match head {
            "column" if manifold.is_none() => Ok(TruthSpec::Column),
            "column" => Err(bad("`column` takes no manifold".into())),
            "self" => Ok(TruthSpec::SelfReferential(manifold)),
            _ => match head.strip_prefix("coords:") {
                Some(list) => {
                    let coords = list
                        .split(',')
                        .map(|t| t.trim().parse::<f64>().map_err(|_| bad(format!("not a number: {t:?}"))))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(TruthSpec::Coords(coords, manifold))
                }
                None => Err(bad(format!("expected column, self[@M] or coords:…[@M], got {s:?}"))),
            },
        }
    }
}

fn parse_manifold(s: &str) -> std::result::Result<ManifoldDescriptor, String> {
    let (kind, dims) = s.split_once(':').ok_or_else(|| format!("manifold {s:?} needs KIND:DIMS"))?;
    let dims: Vec<usize> = dims
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| format!("bad dimension {t:?}")))
        .collect::<std::result::Result<_, _>>()?;
    let m = match (kind, dims.as_slice()) {
        ("euclidean", &[n]) => ManifoldDescriptor::Euclidean { n },
        ("sphere", &[n]) => ManifoldDescriptor::Sphere { n },
        ("stiefel", &[n, p]) => ManifoldDescriptor::Stiefel { n, p },
        ("grassmann", &[n, p]) => ManifoldDescriptor::Grassmann { n, p },
        _ => return Err(format!("unknown manifold {s:?}")),
    };
    m.validated().map_err(|e| e.to_string())
}

fn rebuild(rows: &[TraceRow], m: ManifoldDescriptor) -> Result<IterationTrace> {
    let points = rows
        .iter()
        .map(|r| {
            if r.coords.len() != m.ambient_dim() {
                return Err(CliError::Schema { line: r.iter + 2, message: format!("{} coordinates do not fit {m}", r.coords.len()) });
            }
            Point::new(m, Vector::from_vec(r.coords.clone())).map_err(|e| CliError::Schema { line: r.iter + 2, message: e.to_string() })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IterationTrace {
        points,
        step_norms: rows.iter().filter_map(|r| r.step_norm).collect(),
        cost_values: rows.iter().map(|r| r.cost).collect(),
        termination: Termination::Converged,
        pairs_used: vec![String::new(); rows.len() - 1],
    })
}

pub fn errors_from_rows(rows: &[TraceRow], truth: &TruthSpec) -> Result<Vec<f64>> {
    let euclid = || ManifoldDescriptor::Euclidean { n: rows[0].coords.len() };
    match truth {
        TruthSpec::Column => rows
            .iter()
            .map(|r| r.error.ok_or_else(|| CliError::Schema { line: r.iter + 2, message: "error column is empty".into() }))
            .collect(),
        TruthSpec::SelfReferential(m) => Ok(error_sequence(&rebuild(rows, m.unwrap_or_else(euclid))?, None)?),
        TruthSpec::Coords(x, m) => {
            let m = m.unwrap_or_else(euclid);
            let t = Point::new(m, Vector::from_vec(x.clone())).map_err(|e| CliError::config("--truth", e.to_string()))?;
            Ok(error_sequence(&rebuild(rows, m)?, Some(&t))?)
        }
    }
}

pub fn cmd_rates(trace_path: &Path, truth: &TruthSpec, floor: f64, ceil: f64) -> Result<RateEstimate> {
    let rows = trace::read(trace_path)?;
    let errors = errors_from_rows(&rows, truth)?;
    Ok(estimate_rate(&errors, floor, ceil)?)
}
