//! Sampling-based certificates for the identity, bounded-curvature and
//! second-order-closeness conditions on a parametrisation pair.
//!
//! These are empirical surrogates: finitely many base points and
//! directions are sampled, so non-uniformity between samples goes unseen.

use serde::{Deserialize, Serialize};

use super::ParametrizationPair;
use crate::error::{Error, Result};
use crate::manifold::{random_point_with, random_unit_tangent, ManifoldDescriptor, Point, TangentVector};
use crate::numerics::Vector;
use crate::rng::SplitMix64;

pub const IDENTITY_TOL: f64 = 1e-10;
pub const DPHI_TOL: f64 = 1e-6;
pub const MIN_SLOPE: f64 = 1.9;
pub const MIN_RADIUS: f64 = 1e-6;
const ROUNDING_FLOOR: f64 = 8.0 * f64::EPSILON;

/// How base points are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseSampler {
    /// [`random_point_with`] on the manifold.
    Random,
    /// Each ambient coordinate uniform in `[lo, hi)` (ℝⁿ only).
    Interval { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub sample_points: usize,
    /// Strictly descending, smallest at least [`MIN_RADIUS`].
    pub radii: Vec<f64>,
    pub seed: u64,
    #[serde(default = "default_directions")]
    pub directions_per_point: usize,
    #[serde(default = "default_sampler")]
    pub sampler: BaseSampler,
}

fn default_directions() -> usize {
    4
}

fn default_sampler() -> BaseSampler {
    BaseSampler::Random
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            sample_points: 20,
            radii: vec![1e-1, 1e-2, 1e-3],
            seed: 0,
            directions_per_point: default_directions(),
            sampler: BaseSampler::Random,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditPass {
    /// `φ_p(0) = ψ_p(0) = p` and `Dφ_p(0) = Dψ_p(0) = I`.
    pub identity: bool,
    /// `‖D²φ_p(0)‖` bounded over the samples.
    pub bounded_second_order: bool,
    /// `‖ψ_p(y) − p − y‖` decays at least quadratically.
    pub quadratic_closeness: bool,
}

impl AuditPass {
    pub fn all(&self) -> bool {
        self.identity && self.bounded_second_order && self.quadratic_closeness
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub alpha_hat: f64,
    pub beta_hat: f64,
    /// Least-squares slope of `log‖ψ_p(y) − p − y‖` against `log‖y‖`;
    /// `None` when the deviation is identically zero.
    pub fitted_slope: Option<f64>,
    pub identity_residual: f64,
    pub dphi_residual: f64,
    pub samples: usize,
    pub dropped_samples: usize,
    pub radii: Vec<f64>,
    pub pass: AuditPass,
}

/// Audits `pair` on `m`.
///
/// For each sampled base point `p` and unit tangent `u`: the anchor residual
/// `‖φ_p(0) − p‖`, the central-difference residual `‖Dφ_p(0)u − u‖`, the
/// curvature `‖D²φ_p(0)(u,u)‖`, and `‖ψ_p(ru) − p − ru‖ / r²` over the radii
/// (ambient addition). Samples leaving a validity radius are dropped and
/// counted; any other error aborts the audit.
pub fn audit_conditions(pair: &ParametrizationPair, m: ManifoldDescriptor, config: &AuditConfig) -> Result<AuditReport> {
    pair.validate(&m)?;
    validate_radii(&config.radii)?;
    if config.sample_points == 0 || config.directions_per_point == 0 {
        return Err(Error::InvalidArgument("audit needs at least one sample point and direction".into()));
    }
    if let BaseSampler::Interval { lo, hi } = config.sampler {
        if !matches!(m, ManifoldDescriptor::Euclidean { .. }) || !(lo < hi) {
            return Err(Error::InvalidArgument("interval sampling needs ℝⁿ and lo < hi".into()));
        }
    }

    let mut rng = SplitMix64::new(config.seed);
    let fd_step = f64::EPSILON.cbrt();
    let mut acc = Accumulator::default();

    for _ in 0..config.sample_points {
        let p = match config.sampler {
            BaseSampler::Random => random_point_with(m, &mut rng),
            BaseSampler::Interval { lo, hi } => {
                let x: Vec<f64> = (0..m.ambient_dim()).map(|_| rng.uniform(lo, hi)).collect();
                Point::new(m, Vector::from_vec(x))?
            }
        };
        for (map_idx, kind) in [&pair.phi, &pair.psi].into_iter().enumerate() {
            let anchor = kind.apply(&p.zero_tangent())?;
            acc.identity = acc.identity.max(anchor.ambient().distance(p.ambient()));
            if map_idx == 1 && pair.phi == pair.psi {
                break;
            }
        }
        for _ in 0..config.directions_per_point {
            let u = random_unit_tangent(&p, &mut rng);
            if u.is_zero() {
                continue;
            }
            acc.samples += 1;
            match sample_direction(pair, &p, &u, &config.radii, fd_step, &mut acc) {
                Ok(()) => {}
                Err(Error::OutsideValidityRadius(_)) => acc.dropped += 1,
                Err(e) => return Err(e),
            }
        }
    }

    let fitted_slope = least_squares_slope(&acc.log_pairs);
    let pass = AuditPass {
        identity: acc.identity <= IDENTITY_TOL && acc.dphi <= DPHI_TOL,
        bounded_second_order: acc.alpha.is_finite(),
        quadratic_closeness: match fitted_slope {
            Some(s) => s >= MIN_SLOPE,
            None => acc.beta == 0.0,
        },
    };
    Ok(AuditReport {
        alpha_hat: acc.alpha,
        beta_hat: acc.beta,
        fitted_slope,
        identity_residual: acc.identity,
        dphi_residual: acc.dphi,
        samples: acc.samples,
        dropped_samples: acc.dropped,
        radii: config.radii.clone(),
        pass,
    })
}

#[derive(Default)]
struct Accumulator {
    identity: f64,
    dphi: f64,
    alpha: f64,
    beta: f64,
    log_pairs: Vec<(f64, f64)>,
    samples: usize,
    dropped: usize,
}

fn sample_direction(
    pair: &ParametrizationPair,
    p: &Point,
    u: &TangentVector,
    radii: &[f64],
    h: f64,
    acc: &mut Accumulator,
) -> Result<()> {
    // all evaluations first, so a dropped sample leaves no partial trace
    let mut dphi = 0.0_f64;
    for kind in [&pair.phi, &pair.psi] {
        let plus = kind.apply(&u.scale(h))?;
        let minus = kind.apply(&u.scale(-h))?;
        let miss = (plus.ambient() - minus.ambient()).distance(&u.ambient().scale(2.0 * h));
        if miss > ROUNDING_FLOOR * 2.0 * (p.ambient().norm() + h) {
            dphi = dphi.max(miss / (2.0 * h));
        }
    }
    let alpha = pair.second_order_term(u)?.norm();
    let mut deviations = Vec::with_capacity(radii.len());
    for &r in radii {
        let y = u.scale(r);
        let q = pair.apply_psi(&y)?;
        let dev = q.ambient().axpy(-1.0, p.ambient()).axpy(-1.0, y.ambient()).norm();
        // deviations at rounding level carry no information about the decay
        let noise = ROUNDING_FLOOR * (p.ambient().norm() + y.norm());
        deviations.push((r, if dev <= noise { 0.0 } else { dev }));
    }

    acc.dphi = acc.dphi.max(dphi);
    acc.alpha = acc.alpha.max(alpha);
    for (r, dev) in deviations {
        acc.beta = acc.beta.max(dev / (r * r));
        if dev > 0.0 {
            acc.log_pairs.push((r.ln(), dev.ln()));
        }
    }
    Ok(())
}

fn validate_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::InvalidArgument("audit needs at least one radius".into()));
    }
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::InvalidArgument("audit radii must be positive".into()));
    }
    if radii.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::InvalidArgument("audit radii must be strictly descending".into()));
    }
    if radii[radii.len() - 1] < MIN_RADIUS {
        return Err(Error::InvalidArgument(format!("smallest audit radius must be at least {MIN_RADIUS:e}")));
    }
    Ok(())
}

fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.is_empty() {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}
