use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use parnewton_core::convergence::RateEstimate;
use parnewton_core::{error_sequence, estimate_rate, run_iteration, Termination};
use serde::Serialize;
use serde_json::Value;

use crate::config::{self, Experiment};
use crate::error::{exit, CliError, Result};
use crate::trace;
use crate::truth::{align_signs, ground_truth};

pub const TRACE_FILE: &str = "trace.csv";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthSource {
    /// Minimiser known from the cost data.
    Known,
    /// Final iterate, with the last two errors dropped.
    SelfReferential,
}

#[derive(Debug, Clone, Serialize)]
pub struct Artifacts {
    pub trace: String,
    pub summary: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub config: Value,
    pub termination: Termination,
    pub exit_code: u8,
    pub iterations: usize,
    pub final_cost: f64,
    pub final_point: Vec<f64>,
    pub truth: TruthSource,
    pub truth_point: Option<Vec<f64>>,
    pub truth_distance: Option<f64>,
    pub rate: Option<RateEstimate>,
    pub rate_error: Option<String>,
    pub convergence_radius: Option<f64>,
    pub pairs_used: Vec<String>,
    pub artifacts: Artifacts,
}

pub fn exit_code(t: Termination) -> u8 {
    match t {
        Termination::Converged => exit::OK,
        Termination::SingularHessian => exit::SINGULAR_HESSIAN,
        Termination::MaxIterations => exit::MAX_ITERATIONS,
        Termination::LeftValidityRegion => exit::LEFT_VALIDITY_REGION,
    }
}

/// Runs an experiment in memory, returning the trace CSV and the summary.
pub fn execute(exp: &Experiment) -> Result<(String, RunSummary)> {
    let cost = exp.cost.as_ref().ok_or_else(|| CliError::config("cost", "missing; `run` needs a cost"))?;
    let start = exp.x0.as_ref().ok_or_else(|| CliError::config("x0", "missing; `run` needs a starting point"))?;
    let truth = ground_truth(cost, exp.manifold);
    let p0 = start.resolve(exp.manifold, exp.seed, truth.as_ref())?;
    let t = run_iteration(cost, &exp.selector, &p0, exp.max_iter, exp.tol)?;
    let aligned = truth.map(|x| align_signs(&x, t.last()));
    let errors = error_sequence(&t, aligned.as_ref())?;
    let rate = estimate_rate(&errors, exp.floor, exp.ceil);
    let csv = trace::render(&t, aligned.as_ref().map(|_| errors.as_slice()));
    let (rate, rate_error) = match rate {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let summary = RunSummary {
        config: exp.echo.clone(),
        termination: t.termination,
        exit_code: exit_code(t.termination),
        iterations: t.iterations(),
        final_cost: t.final_cost(),
        final_point: t.last().ambient().as_slice().to_vec(),
        truth: if aligned.is_some() { TruthSource::Known } else { TruthSource::SelfReferential },
        truth_point: aligned.as_ref().map(|p| p.ambient().as_slice().to_vec()),
        truth_distance: aligned.as_ref().map(|_| *errors.last().expect("trace is non-empty")),
        convergence_radius: rate.as_ref().and_then(RateEstimate::convergence_radius),
        rate,
        rate_error,
        pairs_used: t.pairs_used.clone(),
        artifacts: Artifacts { trace: TRACE_FILE.into(), summary: SUMMARY_FILE.into() },
    };
    Ok((csv, summary))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable");
    s.push('\n');
    s
}

pub fn cmd_run(config_path: &Path, out_dir: &Path, seed_override: Option<u64>) -> Result<RunSummary> {
    let exp = config::load(config_path, seed_override)?;
    let (csv, summary) = execute(&exp)?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    write_file(&out_dir.join(TRACE_FILE), &csv)?;
    write_file(&out_dir.join(SUMMARY_FILE), &to_json(&summary))?;
    Ok(summary)
}

/// Output directory per config: `out` itself for a single config, else
/// `out/<file stem>`.
pub fn batch_dirs(configs: &[PathBuf], out: &Path) -> Result<Vec<PathBuf>> {
    if configs.len() == 1 {
        return Ok(vec![out.to_path_buf()]);
    }
    let mut seen = HashSet::new();
    configs
        .iter()
        .map(|c| {
            let stem = c.file_stem().and_then(|s| s.to_str()).unwrap_or("config").to_string();
            if !seen.insert(stem.clone()) {
                return Err(CliError::config("<configs>", format!("two configs share the output name {stem:?}")));
            }
            Ok(out.join(stem))
        })
        .collect()
}

/// Runs each config with fully separate state, `jobs` at a time. Results
/// come back in input order.
pub fn run_batch(configs: &[PathBuf], out: &Path, jobs: usize, seed_override: Option<u64>) -> Result<Vec<Result<RunSummary>>> {
    let dirs = batch_dirs(configs, out)?;
    let results: Vec<Mutex<Option<Result<RunSummary>>>> = configs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, configs.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= configs.len() {
                    break;
                }
                let r = cmd_run(&configs[i], &dirs[i], seed_override);
                *results[i].lock().expect("no panics while holding the lock") = Some(r);
            });
        }
    });
    Ok(results.into_iter().map(|m| m.into_inner().expect("lock").expect("every config ran")).collect())
}
