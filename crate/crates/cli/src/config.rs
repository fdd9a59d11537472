//! Version-1 experiment configs.
//!
//! ```json
//! {
//!   "version": 1,
//!   "manifold": {"kind": "sphere", "n": 6},
//!   "cost": {"kind": "quadratic", "a": "diag:1,2,3,4,5,6"},
//!   "pair": {"kind": "projection"},
//!   "x0": "near-truth:0.1",
//!   "max_iter": 15,
//!   "tol": 1e-12
//! }
//! ```

use std::path::Path;

use parnewton_core::convergence::{DEFAULT_CEIL, DEFAULT_FLOOR};
use parnewton_core::manifold::{random_unit_tangent, ManifoldDescriptor};
use parnewton_core::newton::PathRule;
use parnewton_core::numerics::{Matrix, Vector};
use parnewton_core::parametrization::{AuditConfig, BaseSampler, MIN_RADIUS};
use parnewton_core::rng::SplitMix64;
use parnewton_core::{random_point, Cost, CostFunction, ParametrizationKind, ParametrizationPair, Point, SelectorPolicy};
use serde::Deserialize;
use serde_json::Value;

use crate::error::{CliError, Result};

pub const VERSION: u64 = 1;
pub const DEFAULT_MAX_ITER: usize = 100;
pub const DEFAULT_TOL: f64 = 1e-12;

/// A matrix as explicit rows or `"diag:d1,d2,…"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum MatrixSpec {
    Rows(Vec<Vec<f64>>),
    Text(String),
}

impl MatrixSpec {
    fn build(&self, key: &str) -> Result<Matrix> {
        match self {
            MatrixSpec::Rows(rows) => {
                if rows.is_empty() || rows.iter().any(|r| r.len() != rows[0].len()) {
                    return Err(CliError::config(key, "rows must be non-empty and of equal length"));
                }
                Ok(Matrix::from_rows(rows))
            }
            MatrixSpec::Text(s) => {
                let body = s
                    .strip_prefix("diag:")
                    .ok_or_else(|| CliError::config(key, format!("expected rows or \"diag:…\", got {s:?}")))?;
                Ok(Matrix::from_diag(&parse_list(body, key)?))
            }
        }
    }
}

fn parse_list(body: &str, key: &str) -> Result<Vec<f64>> {
    body.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::config(key, format!("not a number: {t:?}"))))
        .collect()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum CostSpec {
    #[serde(alias = "rayleigh")]
    Quadratic {
        a: MatrixSpec,
        #[serde(default)]
        b: Option<Vec<f64>>,
    },
    #[serde(alias = "brockett_trace")]
    Brockett { a: MatrixSpec, n: MatrixSpec },
    GrassmannTrace { a: MatrixSpec },
    AbsPower,
    ShiftedCubic { z: f64 },
}

impl CostSpec {
    fn build(&self) -> Result<CostFunction> {
        let core = |e: parnewton_core::Error, key: &str| CliError::config(key, e.to_string());
        match self {
            CostSpec::Quadratic { a, b } => {
                let a = a.build("cost.a")?;
                let b = Vector::from_vec(b.clone().unwrap_or_else(|| vec![0.0; a.rows()]));
                if b.len() != a.rows() {
                    return Err(CliError::config("cost.b", format!("length {} does not match cost.a ({} rows)", b.len(), a.rows())));
                }
                CostFunction::quadratic(a, b).map_err(|e| core(e, "cost.a"))
            }
            CostSpec::Brockett { a, n } => {
                let nm = n.build("cost.n")?;
                CostFunction::brockett(a.build("cost.a")?, nm).map_err(|e| core(e, "cost"))
            }
            CostSpec::GrassmannTrace { a } => CostFunction::grassmann_trace(a.build("cost.a")?).map_err(|e| core(e, "cost.a")),
            CostSpec::AbsPower => Ok(CostFunction::AbsPower),
            CostSpec::ShiftedCubic { z } => Ok(CostFunction::ShiftedCubic { z: *z }),
        }
    }
}

/// A kind object (`φ = ψ`) or an explicit `{"phi": …, "psi": …}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum PairSpec {
    Split { phi: ParametrizationKind, psi: ParametrizationKind },
    Same(ParametrizationKind),
}

impl PairSpec {
    fn build(&self) -> ParametrizationPair {
        match self {
            PairSpec::Split { phi, psi } => ParametrizationPair::new(phi.clone(), psi.clone()),
            PairSpec::Same(k) => ParametrizationPair::same(k.clone()),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum SelectorSpec {
    Fixed { pair: PairSpec },
    RoundRobin { pairs: Vec<PairSpec> },
    Random {
        pairs: Vec<PairSpec>,
        #[serde(default)]
        seed: Option<u64>,
    },
    PathDependent { rule: PathRule, pairs: Vec<PairSpec> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum X0Spec {
    Flat(Vec<f64>),
    Rows(Vec<Vec<f64>>),
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RateSpec {
    #[serde(default = "default_floor")]
    floor: f64,
    #[serde(default = "default_ceil")]
    ceil: f64,
}

fn default_floor() -> f64 {
    DEFAULT_FLOOR
}

fn default_ceil() -> f64 {
    DEFAULT_CEIL
}

impl Default for RateSpec {
    fn default() -> Self {
        RateSpec { floor: DEFAULT_FLOOR, ceil: DEFAULT_CEIL }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AuditSpec {
    sample_points: Option<usize>,
    radii: Option<Vec<f64>>,
    seed: Option<u64>,
    directions_per_point: Option<usize>,
    sampler: Option<BaseSampler>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    version: u64,
    manifold: ManifoldDescriptor,
    #[serde(default)]
    cost: Option<CostSpec>,
    #[serde(default)]
    pair: Option<PairSpec>,
    #[serde(default)]
    selector: Option<SelectorSpec>,
    #[serde(default)]
    x0: Option<X0Spec>,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_max_iter")]
    max_iter: usize,
    #[serde(default = "default_tol")]
    tol: f64,
    #[serde(default)]
    rate: RateSpec,
    #[serde(default)]
    audit: AuditSpec,
}

fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

/// Starting point, resolved against the ground truth at run time.
#[derive(Debug, Clone, PartialEq)]
pub enum StartSpec {
    Point(Point),
    Random(u64),
    /// Projection retraction of a seeded tangent of this norm at the truth.
    NearTruth(f64),
}

impl StartSpec {
    pub fn resolve(&self, m: ManifoldDescriptor, seed: u64, truth: Option<&Point>) -> Result<Point> {
        match self {
            StartSpec::Point(p) => Ok(p.clone()),
            StartSpec::Random(s) => Ok(random_point(m, *s)),
            StartSpec::NearTruth(delta) => {
                let truth = truth.ok_or_else(|| CliError::config("x0", "near-truth start needs a cost with a known minimiser"))?;
                let mut rng = SplitMix64::new(seed);
                let v = random_unit_tangent(truth, &mut rng).scale(*delta);
                Ok(ParametrizationKind::Projection.apply(&v)?)
            }
        }
    }
}

/// A validated experiment.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub manifold: ManifoldDescriptor,
    pub cost: Option<CostFunction>,
    pub selector: SelectorPolicy,
    pub x0: Option<StartSpec>,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
    pub floor: f64,
    pub ceil: f64,
    pub audit: AuditConfig,
    /// The document actually consumed (after any seed override).
    pub echo: Value,
}

pub fn load(path: &Path, seed_override: Option<u64>) -> Result<Experiment> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text, seed_override)
}

pub fn parse(text: &str, seed_override: Option<u64>) -> Result<Experiment> {
    let mut doc: Value = serde_json::from_str(text).map_err(|e| CliError::config("<document>", e.to_string()))?;
    if let Some(s) = seed_override {
        match doc.as_object_mut() {
            Some(obj) => {
                obj.insert("seed".into(), Value::from(s));
            }
            None => return Err(CliError::config("<document>", "top level must be an object")),
        }
    }
    let raw: RawConfig = serde_path_to_error::deserialize(doc.clone()).map_err(|e| {
        let key = e.path().to_string();
        let key = if key == "." { "<document>".to_string() } else { key };
        CliError::config(key, e.into_inner().to_string())
    })?;
    validate(raw, doc)
}

fn check_manifold(m: ManifoldDescriptor) -> Result<ManifoldDescriptor> {
    match m {
        ManifoldDescriptor::Euclidean { n } | ManifoldDescriptor::Sphere { n } if n == 0 => {
            Err(CliError::config("manifold.n", "must be positive"))
        }
        ManifoldDescriptor::Sphere { n: 1 } => Err(CliError::config("manifold.n", "sphere needs n ≥ 2")),
        ManifoldDescriptor::Stiefel { n, p } | ManifoldDescriptor::Grassmann { n, p } if p == 0 || p > n => {
            Err(CliError::config("manifold.p", format!("must satisfy 1 ≤ p ≤ n, got p = {p}, n = {n}")))
        }
        m => m.validated().map_err(|e| CliError::config("manifold", e.to_string())),
    }
}

fn validate(raw: RawConfig, echo: Value) -> Result<Experiment> {
    if raw.version != VERSION {
        return Err(CliError::config("version", format!("unsupported version {}, expected {VERSION}", raw.version)));
    }
    let m = check_manifold(raw.manifold)?;
    let cost = raw.cost.as_ref().map(CostSpec::build).transpose()?;
    if let Some(c) = &cost {
        if !c.accepts(&m) {
            return Err(CliError::config("cost.kind", format!("{} cost is not defined on {m}", c.kind_name())));
        }
    }
    let check_pairs = |pairs: &[PairSpec], key: &str| -> Result<Vec<ParametrizationPair>> {
        if pairs.is_empty() {
            return Err(CliError::config(key, "must list at least one pair"));
        }
        pairs
            .iter()
            .enumerate()
            .map(|(i, spec)| {
                let pair = spec.build();
                pair.validate(&m).map_err(|e| CliError::config(format!("{key}[{i}]"), e.to_string()))?;
                Ok(pair)
            })
            .collect()
    };
    let selector = match (&raw.pair, &raw.selector) {
        (Some(_), Some(_)) => return Err(CliError::config("selector", "give either `pair` or `selector`, not both")),
        (None, None) => return Err(CliError::config("pair", "missing; give `pair` or `selector`")),
        (Some(p), None) => {
            let pair = p.build();
            pair.validate(&m).map_err(|e| CliError::config("pair", e.to_string()))?;
            SelectorPolicy::Fixed { pair }
        }
        (None, Some(sel)) => match sel {
            SelectorSpec::Fixed { pair } => {
                let pair = pair.build();
                pair.validate(&m).map_err(|e| CliError::config("selector.pair", e.to_string()))?;
                SelectorPolicy::Fixed { pair }
            }
            SelectorSpec::RoundRobin { pairs } => SelectorPolicy::RoundRobin { pairs: check_pairs(pairs, "selector.pairs")? },
            SelectorSpec::Random { pairs, seed } => {
                SelectorPolicy::Random { pairs: check_pairs(pairs, "selector.pairs")?, seed: seed.unwrap_or(raw.seed) }
            }
            SelectorSpec::PathDependent { rule, pairs } => {
                SelectorPolicy::PathDependent { rule: *rule, pairs: check_pairs(pairs, "selector.pairs")? }
            }
        },
    };
    let x0 = raw.x0.as_ref().map(|x| start_spec(x, m, raw.seed)).transpose()?;
    if raw.max_iter == 0 {
        return Err(CliError::config("max_iter", "must be at least 1"));
    }
    if !(raw.tol > 0.0 && raw.tol.is_finite()) {
        return Err(CliError::config("tol", "must be positive and finite"));
    }
    if !(raw.rate.floor > 0.0 && raw.rate.floor < raw.rate.ceil) {
        return Err(CliError::config("rate.floor", "need 0 < floor < ceil"));
    }
    let defaults = AuditConfig::default();
    let audit = AuditConfig {
        sample_points: raw.audit.sample_points.unwrap_or(defaults.sample_points),
        radii: raw.audit.radii.clone().unwrap_or(defaults.radii),
        seed: raw.audit.seed.unwrap_or(raw.seed),
        directions_per_point: raw.audit.directions_per_point.unwrap_or(defaults.directions_per_point),
        sampler: raw.audit.sampler.clone().unwrap_or(defaults.sampler),
    };
    if audit.sample_points == 0 {
        return Err(CliError::config("audit.sample_points", "must be at least 1"));
    }
    if audit.radii.is_empty()
        || audit.radii.windows(2).any(|w| !(w[0] > w[1]))
        || audit.radii.iter().any(|&r| !(r >= MIN_RADIUS && r.is_finite()))
    {
        return Err(CliError::config("audit.radii", format!("must be non-empty, strictly descending and ≥ {MIN_RADIUS:e}")));
    }
    Ok(Experiment {
        manifold: m,
        cost,
        selector,
        x0,
        seed: raw.seed,
        max_iter: raw.max_iter,
        tol: raw.tol,
        floor: raw.rate.floor,
        ceil: raw.rate.ceil,
        audit,
        echo,
    })
}

fn start_spec(x: &X0Spec, m: ManifoldDescriptor, seed: u64) -> Result<StartSpec> {
    let point = |v: Vec<f64>| -> Result<StartSpec> {
        if v.len() != m.ambient_dim() {
            return Err(CliError::config("x0", format!("expected {} ambient coordinates, got {}", m.ambient_dim(), v.len())));
        }
        Point::new(m, Vector::from_vec(v)).map(StartSpec::Point).map_err(|e| CliError::config("x0", e.to_string()))
    };
    match x {
        X0Spec::Flat(v) => point(v.clone()),
        X0Spec::Rows(rows) => {
            let (n, p) = m.matrix_shape();
            if rows.len() != n || rows.iter().any(|r| r.len() != p) {
                return Err(CliError::config("x0", format!("expected {n} rows of {p} entries")));
            }
            point(Matrix::from_rows(rows).to_col_major())
        }
        X0Spec::Text(s) => {
            if s == "random" {
                return Ok(StartSpec::Random(seed));
            }
            if let Some(t) = s.strip_prefix("random:") {
                return t.trim().parse().map(StartSpec::Random).map_err(|_| CliError::config("x0", format!("bad seed in {s:?}")));
            }
            if let Some(t) = s.strip_prefix("near-truth:") {
                return match t.trim().parse::<f64>() {
                    Ok(d) if d > 0.0 && d.is_finite() => Ok(StartSpec::NearTruth(d)),
                    _ => Err(CliError::config("x0", format!("bad distance in {s:?}"))),
                };
            }
            Err(CliError::config("x0", format!("expected coordinates, \"random[:SEED]\" or \"near-truth:δ\", got {s:?}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err_key(text: &str) -> String {
        match parse(text, None) {
            Err(CliError::Config { key, .. }) => key,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_sphere_config() {
        let e = parse(
            r#"{"version": 1, "manifold": {"kind": "sphere", "n": 3}, "cost": {"kind": "quadratic", "a": "diag:1,2,3"},
                "pair": {"kind": "projection"}, "x0": [1, 0, 0]}"#,
            None,
        )
        .unwrap();
        assert_eq!(e.manifold, ManifoldDescriptor::Sphere { n: 3 });
        assert_eq!(e.max_iter, DEFAULT_MAX_ITER);
        assert_eq!((e.floor, e.ceil), (DEFAULT_FLOOR, DEFAULT_CEIL));
        assert!(matches!(e.selector, SelectorPolicy::Fixed { .. }));
    }

    #[test]
    fn errors_name_the_key() {
        assert_eq!(err_key(r#"{"version": 1, "manifold": {"kind": "stiefel", "n": 2, "p": 3}, "pair": {"kind": "qr"}}"#), "manifold.p");
        assert_eq!(err_key(r#"{"version": 2, "manifold": {"kind": "sphere", "n": 3}, "pair": {"kind": "qr"}}"#), "version");
        assert_eq!(err_key(r#"{"version": 1, "manifold": {"kind": "sphere", "n": "3"}, "pair": {"kind": "qr"}}"#), "manifold");
        assert_eq!(
            err_key(r#"{"version": 1, "manifold": {"kind": "sphere", "n": 3}, "pair": {"kind": "qr"}, "max_iter": 0}"#),
            "max_iter"
        );
        assert_eq!(
            err_key(r#"{"version": 1, "manifold": {"kind": "sphere", "n": 3}, "pair": {"kind": "qr"}, "cost": {"kind": "abs_power"}}"#),
            "cost.kind"
        );
        assert_eq!(
            err_key(r#"{"version": 1, "manifold": {"kind": "euclidean", "n": 2}, "pair": {"kind": "sphere_geodesic"}}"#),
            "pair"
        );
        assert_eq!(err_key(r#"{"version": 1, "manifold": {"kind": "sphere", "n": 3}, "pair": {"kind": "qr"}, "x0": [1, 1, 0]}"#), "x0");
        assert_eq!(err_key(r#"{"version": 1, "manifold": {"kind": "sphere", "n": 3}, "pair": {"kind": "qr"}, "bogus": 1}"#), "bogus");
        assert_eq!(
            err_key(r#"{"version": 1, "manifold": {"kind": "sphere", "n": 3}, "pair": {"kind": "qr"}, "rate": {"floor": 1, "ceil": 0.1}}"#),
            "rate.floor"
        );
    }

    #[test]
    fn seed_override_reaches_defaults_and_echo() {
        let text = r#"{"version": 1, "manifold": {"kind": "sphere", "n": 3},
            "selector": {"kind": "random", "pairs": [{"kind": "projection"}, {"kind": "sphere_geodesic"}]}, "x0": "random"}"#;
        let e = parse(text, Some(42)).unwrap();
        assert_eq!(e.seed, 42);
        assert_eq!(e.echo["seed"], 42);
        assert_eq!(e.audit.seed, 42);
        assert_eq!(e.x0, Some(StartSpec::Random(42)));
        assert!(matches!(e.selector, SelectorPolicy::Random { seed: 42, .. }));
    }

    #[test]
    fn matrix_forms() {
        let rows = MatrixSpec::Rows(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).build("a").unwrap();
        assert_eq!(rows[(0, 1)], 2.0);
        let d = MatrixSpec::Text("diag:1, 2.5".into()).build("a").unwrap();
        assert_eq!(d, Matrix::from_diag(&[1.0, 2.5]));
        assert!(MatrixSpec::Text("eye:3".into()).build("a").is_err());
        assert!(MatrixSpec::Rows(vec![vec![1.0], vec![1.0, 2.0]]).build("a").is_err());
    }

    #[test]
    fn split_pair_and_x0_rows() {
        let e = parse(
            r#"{"version": 1, "manifold": {"kind": "stiefel", "n": 3, "p": 2},
                "pair": {"phi": {"kind": "projection"}, "psi": {"kind": "qr"}},
                "x0": [[1, 0], [0, 1], [0, 0]]}"#,
            None,
        )
        .unwrap();
        let SelectorPolicy::Fixed { pair } = &e.selector else { panic!() };
        assert_eq!(pair.psi, ParametrizationKind::Qr);
        let Some(StartSpec::Point(p)) = &e.x0 else { panic!() };
        assert_eq!(p.ambient().as_slice(), &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    }
}
