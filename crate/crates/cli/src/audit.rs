use std::path::Path;

use parnewton_core::{audit_conditions, AuditConfig, AuditReport, ParametrizationKind, ParametrizationPair};
use serde::Serialize;
use serde_json::Value;

use crate::config::{self, Experiment};
use crate::error::{CliError, Result};
use crate::run::{to_json, write_file};

pub const AUDIT_FILE: &str = "audit.json";

#[derive(Debug, Clone, Serialize)]
pub struct PairAudit {
    pub pair: String,
    pub phi: ParametrizationKind,
    pub psi: ParametrizationKind,
    pub report: AuditReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditSummary {
    pub config: Value,
    pub manifold: String,
    pub settings: AuditConfig,
    pub all_pass: bool,
    pub pairs: Vec<PairAudit>,
}

/// Audits every distinct pair the experiment's selector can choose.
pub fn execute(exp: &Experiment) -> Result<AuditSummary> {
    let mut distinct: Vec<&ParametrizationPair> = Vec::new();
    for p in exp.selector.pairs() {
        if !distinct.contains(&p) {
            distinct.push(p);
        }
    }
    let pairs = distinct
        .into_iter()
        .map(|pair| {
            Ok(PairAudit {
                pair: pair.label(),
                phi: pair.phi.clone(),
                psi: pair.psi.clone(),
                report: audit_conditions(pair, exp.manifold, &exp.audit)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AuditSummary {
        config: exp.echo.clone(),
        manifold: exp.manifold.to_string(),
        settings: exp.audit.clone(),
        all_pass: pairs.iter().all(|p| p.report.pass.all()),
        pairs,
    })
}

pub fn cmd_audit(config_path: &Path, out_dir: &Path, seed_override: Option<u64>) -> Result<AuditSummary> {
    let exp = config::load(config_path, seed_override)?;
    let summary = execute(&exp)?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    write_file(&out_dir.join(AUDIT_FILE), &to_json(&summary))?;
    Ok(summary)
}
