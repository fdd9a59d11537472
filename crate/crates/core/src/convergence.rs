//! Local convergence-rate measurement: fit `e_{k+1} ≈ κ e_k^K` by least
//! squares in log space.
//!
//! Errors are ambient (chordal or projector) distances. Any metric
//! bi-Lipschitz equivalent to a chart metric gives the same `K` when
//! `K > 1`, but `κ` depends on the convention, so compare constants only
//! within one manifold and distance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{distance, Point};
use crate::newton::IterationTrace;

pub const DEFAULT_FLOOR: f64 = 1e-12;
pub const DEFAULT_CEIL: f64 = 1e-1;
/// Fewest consecutive pairs (three error values) for which a fit is made.
pub const MIN_PAIRS: usize = 2;
/// Fewest error values accepted as input.
pub const MIN_ERRORS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub start: usize,
    /// Inclusive.
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    #[serde(rename = "K")]
    pub rate: f64,
    pub kappa: f64,
    pub window: FitWindow,
    /// RMS of the log-space regression residuals.
    pub fit_residual: f64,
    /// Error values participating in the fit.
    pub n_points: usize,
    pub n_pairs: usize,
}

impl RateEstimate {
    /// `κ^{1/(1−K)}`, the radius below which the bound `κ e^K < e` holds.
    pub fn convergence_radius(&self) -> Option<f64> {
        (self.rate > 1.0).then(|| self.kappa.powf(1.0 / (1.0 - self.rate)))
    }
}

/// `e_k = dist(p_k, truth)`.
///
/// Without a truth the final iterate stands in for it and the last two
/// entries are dropped: the last is exactly zero and the one before is
/// biased by the stand-in.
pub fn error_sequence(trace: &IterationTrace, truth: Option<&Point>) -> Result<Vec<f64>> {
    if trace.points.is_empty() {
        return Err(Error::InvalidArgument("empty trace".into()));
    }
    match truth {
        Some(t) => trace.points.iter().map(|p| distance(p, t)).collect(),
        None => {
            let last = trace.last();
            let n = trace.points.len().saturating_sub(2);
            trace.points[..n].iter().map(|p| distance(p, last)).collect()
        }
    }
}

/// Fits `log e_{k+1} = K log e_k + log κ` over consecutive pairs with both
/// errors strictly inside `(floor, ceil)`.
pub fn estimate_rate(errors: &[f64], floor: f64, ceil: f64) -> Result<RateEstimate> {
    estimate_rate_pooled(&[errors], floor, ceil)
}

/// Like [`estimate_rate`], pooling usable pairs from several runs of the
/// same method into one fit. The window covers the union of indices used.
pub fn estimate_rate_pooled<S: AsRef<[f64]>>(runs: &[S], floor: f64, ceil: f64) -> Result<RateEstimate> {
    if !(floor > 0.0 && floor < ceil) {
        return Err(Error::InvalidArgument(format!("need 0 < floor < ceil, got floor {floor:e}, ceil {ceil:e}")));
    }
    let total: usize = runs.iter().map(|r| r.as_ref().len()).sum();
    if total < MIN_ERRORS {
        return Err(Error::InsufficientData { usable: 0 });
    }
    let usable = |e: f64| e > floor && e < ceil;
    let mut pairs = Vec::new();
    let mut used_points = 0usize;
    let (mut start, mut end) = (usize::MAX, 0usize);
    for run in runs {
        let e = run.as_ref();
        let mut used = vec![false; e.len()];
        for k in 0..e.len().saturating_sub(1) {
            if usable(e[k]) && usable(e[k + 1]) {
                pairs.push((e[k].ln(), e[k + 1].ln()));
                used[k] = true;
                used[k + 1] = true;
                start = start.min(k);
                end = end.max(k + 1);
            }
        }
        used_points += used.iter().filter(|&&u| u).count();
    }
    if pairs.len() < MIN_PAIRS {
        return Err(Error::InsufficientData { usable: pairs.len() });
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InsufficientData { usable: pairs.len() });
    }
    let rate = sxy / sxx;
    let log_kappa = my - rate * mx;
    let rss: f64 = pairs.iter().map(|p| (p.1 - rate * p.0 - log_kappa).powi(2)).sum();
    Ok(RateEstimate {
        rate,
        kappa: log_kappa.exp(),
        window: FitWindow { start, end },
        fit_residual: (rss / n).sqrt(),
        n_points: used_points,
        n_pairs: pairs.len(),
    })
}
