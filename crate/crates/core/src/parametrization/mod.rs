//! Parametrisation pairs `(φ, ψ)`.
//!
//! A generalised Newton step at `p` pulls the cost back through
//! `φ_p : T_pM → M`, takes a Euclidean Newton step in tangent coordinates,
//! and maps the increment back with `ψ_p`. Every built-in kind satisfies
//! `φ_p(0) = p` exactly and `Dφ_p(0) = I` (except deliberately broken
//! `Custom1D` coefficient sets used to exercise the audits).

mod audit;

pub use audit::{audit_conditions, AuditConfig, AuditPass, AuditReport, BaseSampler, MIN_RADIUS};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{random_orthogonal, ManifoldDescriptor, Point, TangentVector};
use crate::numerics::{singular_values, Matrix, Vector};
use crate::rng::SplitMix64;

/// Smallest singular value of `X + V` admitted by the projection
/// parametrisation on Stiefel/Grassmann manifolds.
pub const PROJECTION_MIN_SINGULAR_VALUE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParametrizationKind {
    /// Closest-point projection of `p + v`.
    Projection,
    /// Great-circle exponential map on the sphere.
    SphereGeodesic,
    /// Orthonormal factor of `p + v` with positive `R` diagonal.
    Qr,
    /// `x + t + Σ_k c_k t^k` on ℝ; `coeffs[k-1]` multiplies `t^k`.
    #[serde(rename = "custom1d")]
    Custom1D { coeffs: Vec<f64> },
    /// `x + t + (β/x) t²` for `x ≠ 0`, the identity shift at `x = 0`.
    ExampleBeta { beta: f64 },
    /// `θ_g ∘ φ_{e₁} ∘ Q_g⁻¹` on the sphere, with `g` the re-centring
    /// rotation of [`recentring_rotation`].
    Recentred { base: Box<ParametrizationKind>, rotation_seed: u64 },
}

impl ParametrizationKind {
    pub fn recentred(base: ParametrizationKind, rotation_seed: u64) -> Self {
        Self::Recentred { base: Box::new(base), rotation_seed }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Projection => "projection".into(),
            Self::SphereGeodesic => "sphere_geodesic".into(),
            Self::Qr => "qr".into(),
            Self::Custom1D { .. } => "custom1d".into(),
            Self::ExampleBeta { .. } => "example_beta".into(),
            Self::Recentred { base, .. } => format!("recentred({})", base.name()),
        }
    }

    pub fn validate(&self, m: &ManifoldDescriptor) -> Result<()> {
        use ManifoldDescriptor as M;
        let ok = match (self, m) {
            (Self::Projection, _) => true,
            (Self::SphereGeodesic, M::Sphere { .. }) => true,
            (Self::Qr, M::Sphere { .. } | M::Stiefel { .. } | M::Grassmann { .. }) => true,
            (Self::Custom1D { coeffs }, M::Euclidean { n: 1 }) => coeffs.iter().all(|c| c.is_finite()),
            (Self::ExampleBeta { beta }, M::Euclidean { n: 1 }) => beta.is_finite(),
            (Self::Recentred { base, .. }, M::Sphere { .. }) => {
                !matches!(**base, Self::Recentred { .. }) && base.validate(m).is_ok()
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParametrization(format!("{} is not valid on {m}", self.name())))
        }
    }

    /// Evaluates the parametrisation centred at `v.base()` on `v`.
    pub fn apply(&self, v: &TangentVector) -> Result<Point> {
        let p = v.base();
        let m = p.manifold();
        self.validate(&m)?;
        if v.is_zero() {
            return Ok(p.clone());
        }
        match self {
            Self::Projection => apply_projection(v),
            Self::SphereGeodesic => {
                let theta = v.norm();
                let x = p.ambient().scale(theta.cos()).axpy(theta.sin() / theta, v.ambient());
                Ok(Point::new_unchecked(m, x))
            }
            Self::Qr => apply_qr(v),
            Self::Custom1D { coeffs } => {
                let (x, t) = (p.ambient()[0], v.ambient()[0]);
                // Horner on Σ c_k t^k, k ≥ 1
                let poly = coeffs.iter().rev().fold(0.0, |acc, &c| (acc + c) * t);
                Ok(scalar_point(x + t + poly))
            }
            Self::ExampleBeta { beta } => {
                let (x, t) = (p.ambient()[0], v.ambient()[0]);
                let y = if x == 0.0 { x + t } else { x + t + beta / x * t * t };
                Ok(scalar_point(y))
            }
            Self::Recentred { base, rotation_seed } => {
                let (g, pbar) = recentring_frame(p, *rotation_seed)?;
                let vbar = TangentVector::new_unchecked(pbar, g.tr_matvec(v.ambient()));
                let q = base.apply(&vbar)?;
                Ok(Point::new_unchecked(m, g.matvec(q.ambient())))
            }
        }
    }

    /// `D²φ_p(0)(v, v)` in ambient coordinates.
    ///
    /// Exact where a closed form is known; otherwise the central second
    /// difference of [`second_order_term_fd`].
    pub fn second_order_term(&self, v: &TangentVector) -> Result<Vector> {
        let p = v.base();
        let m = p.manifold();
        self.validate(&m)?;
        if v.is_zero() {
            return Ok(Vector::zeros(m.ambient_dim()));
        }
        use ManifoldDescriptor as M;
        match (self, m) {
            (Self::Projection, M::Euclidean { .. }) => Ok(Vector::zeros(m.ambient_dim())),
            (Self::Projection | Self::SphereGeodesic, M::Sphere { .. }) => {
                Ok(p.ambient().scale(-v.ambient().dot(v.ambient())))
            }
            (Self::Projection, M::Stiefel { .. } | M::Grassmann { .. }) => {
                let (x, vm) = (p.matrix(), v.matrix());
                Ok(Vector::from_vec(x.matmul(&vm.tr_matmul(&vm)).scale(-1.0).to_col_major()))
            }
            (Self::Custom1D { coeffs }, _) => {
                let t = v.ambient()[0];
                let c2 = coeffs.get(1).copied().unwrap_or(0.0);
                Ok(Vector::from_vec(vec![2.0 * c2 * t * t]))
            }
            (Self::ExampleBeta { beta }, _) => {
                let (x, t) = (p.ambient()[0], v.ambient()[0]);
                let s = if x == 0.0 { 0.0 } else { 2.0 * beta / x * t * t };
                Ok(Vector::from_vec(vec![s]))
            }
            (Self::Recentred { base, rotation_seed }, _) => {
                let (g, pbar) = recentring_frame(p, *rotation_seed)?;
                let vbar = TangentVector::new_unchecked(pbar, g.tr_matvec(v.ambient()));
                Ok(g.matvec(&base.second_order_term(&vbar)?))
            }
            _ => second_order_term_fd(self, v),
        }
    }
}

impl fmt::Display for ParametrizationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

fn scalar_point(y: f64) -> Point {
    Point::new_unchecked(ManifoldDescriptor::Euclidean { n: 1 }, Vector::from_vec(vec![y]))
}

fn apply_projection(v: &TangentVector) -> Result<Point> {
    let p = v.base();
    let m = p.manifold();
    let shifted = p.ambient() + v.ambient();
    match m {
        ManifoldDescriptor::Euclidean { .. } => Ok(Point::new_unchecked(m, shifted)),
        ManifoldDescriptor::Sphere { .. } => crate::manifold::project_to_manifold(m, &shifted),
        ManifoldDescriptor::Stiefel { n, p: cols } | ManifoldDescriptor::Grassmann { n, p: cols } => {
            let mat = Matrix::from_col_major(n, cols, shifted.as_slice());
            let smin = singular_values(&mat)?[0];
            if !(smin > PROJECTION_MIN_SINGULAR_VALUE) {
                return Err(Error::OutsideValidityRadius(format!(
                    "smallest singular value of X + V is {smin:.3e}"
                )));
            }
            crate::manifold::project_to_manifold(m, &shifted)
        }
    }
}

/// Modified Gram–Schmidt (two passes) on the columns of `p + v`.
fn apply_qr(v: &TangentVector) -> Result<Point> {
    let p = v.base();
    let m = p.manifold();
    let (rows, cols) = m.matrix_shape();
    let shifted = p.ambient() + v.ambient();
    let a = Matrix::from_col_major(rows, cols, shifted.as_slice());
    let mut q: Vec<Vector> = Vec::with_capacity(cols);
    for j in 0..cols {
        let col = a.column(j);
        let scale = col.norm();
        let mut w = col;
        for _ in 0..2 {
            for qi in &q {
                w = w.axpy(-qi.dot(&w), qi);
            }
        }
        let r = w.norm();
        if !(r > 1e-10 * scale.max(1.0)) {
            return Err(Error::OutsideValidityRadius("p + v is rank deficient".into()));
        }
        q.push(w.scale(1.0 / r));
    }
    Ok(Point::new_unchecked(m, Vector::from_vec(Matrix::from_columns(&q).to_col_major())))
}

/// Central second difference `(φ(hu) − 2p + φ(−hu)) / h²` along the unit
/// direction `u = v/‖v‖` with `h = ε^{1/4}`, rescaled by `‖v‖²`.
pub fn second_order_term_fd(kind: &ParametrizationKind, v: &TangentVector) -> Result<Vector> {
    let p = v.base();
    let nrm = v.norm();
    if nrm == 0.0 {
        return Ok(Vector::zeros(p.manifold().ambient_dim()));
    }
    let h = f64::EPSILON.powf(0.25);
    let u = v.scale(1.0 / nrm);
    let plus = kind.apply(&u.scale(h))?;
    let minus = kind.apply(&u.scale(-h))?;
    let second = plus.ambient().axpy(-2.0, p.ambient()).axpy(1.0, minus.ambient());
    Ok(second.scale(nrm * nrm / (h * h)))
}

/// Distinguished point `e₁` used as the re-centring anchor.
pub fn recentring_anchor(m: ManifoldDescriptor) -> Result<Point> {
    match m {
        ManifoldDescriptor::Sphere { n } => Ok(Point::new_unchecked(m, Vector::unit(n, 0))),
        _ => Err(Error::InvalidParametrization(format!("re-centring is defined on spheres only, not {m}"))),
    }
}

/// Orthogonal `g` with `g·e₁ = p`: a Householder reflection taking `e₁` to
/// `±p` (sign chosen so `e₁ ∓ p` does not cancel, then negated if needed),
/// composed with a seeded rotation of `e₁^⊥`. Different seeds pick
/// different elements of the coset `{g : g·e₁ = p}`.
pub fn recentring_rotation(p: &Point, seed: u64) -> Result<Matrix> {
    let ManifoldDescriptor::Sphere { n } = p.manifold() else {
        return Err(Error::InvalidParametrization(format!("re-centring is defined on spheres only, not {}", p.manifold())));
    };
    // u = e₁ − σp reflects e₁ onto σp
    let sigma = if p.ambient()[0] > 0.0 { -1.0 } else { 1.0 };
    let mut u = p.ambient().scale(-sigma);
    u[0] += 1.0;
    let uu = u.dot(&u);
    let mut h = Matrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] -= 2.0 * u[i] * u[j] / uu;
        }
    }
    let h = h.scale(sigma);
    let mut rng = SplitMix64::new(seed);
    let q = random_orthogonal(n - 1, &mut rng);
    let mut d = Matrix::identity(n);
    for i in 1..n {
        for j in 1..n {
            d[(i, j)] = q[(i - 1, j - 1)];
        }
    }
    Ok(h.matmul(&d))
}

fn recentring_frame(p: &Point, seed: u64) -> Result<(Matrix, Point)> {
    Ok((recentring_rotation(p, seed)?, recentring_anchor(p.manifold())?))
}

/// The `(φ, ψ)` pair defining one generalised Newton method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParametrizationPair {
    pub phi: ParametrizationKind,
    pub psi: ParametrizationKind,
}

impl ParametrizationPair {
    pub fn new(phi: ParametrizationKind, psi: ParametrizationKind) -> Self {
        ParametrizationPair { phi, psi }
    }

    /// `φ = ψ = kind`.
    pub fn same(kind: ParametrizationKind) -> Self {
        ParametrizationPair { phi: kind.clone(), psi: kind }
    }

    pub fn validate(&self, m: &ManifoldDescriptor) -> Result<()> {
        self.phi.validate(m)?;
        self.psi.validate(m)
    }

    pub fn apply_phi(&self, v: &TangentVector) -> Result<Point> {
        self.phi.apply(v)
    }

    pub fn apply_psi(&self, v: &TangentVector) -> Result<Point> {
        self.psi.apply(v)
    }

    /// `D²φ_p(0)(v, v)`.
    pub fn second_order_term(&self, v: &TangentVector) -> Result<Vector> {
        self.phi.second_order_term(v)
    }

    pub fn label(&self) -> String {
        if self.phi == self.psi {
            self.phi.name()
        } else {
            format!("{}/{}", self.phi.name(), self.psi.name())
        }
    }
}
