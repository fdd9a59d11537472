//! Embedded and quotient manifolds: ℝⁿ, the unit sphere, Stiefel and
//! Grassmann manifolds.
//!
//! Matrix-valued points are stored column-major in a flat ambient vector.
//! Grassmann points are Stiefel representatives; their tangent vectors live
//! in the horizontal space `{V : XᵀV = 0}`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{polar_factor, Matrix, Vector};
use crate::rng::SplitMix64;

/// Tolerance on the feasibility residual of a [`Point`].
pub const FEASIBILITY_TOL: f64 = 1e-10;
/// Tolerance on the tangency residual of a [`TangentVector`], scaled by
/// `max(1, ‖v‖)`.
pub const TANGENCY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ManifoldDescriptor {
    Euclidean { n: usize },
    Sphere { n: usize },
    Stiefel { n: usize, p: usize },
    Grassmann { n: usize, p: usize },
}

impl ManifoldDescriptor {
    pub fn euclidean(n: usize) -> Result<Self> {
        Self::Euclidean { n }.validated()
    }

    pub fn sphere(n: usize) -> Result<Self> {
        Self::Sphere { n }.validated()
    }

    pub fn stiefel(n: usize, p: usize) -> Result<Self> {
        Self::Stiefel { n, p }.validated()
    }

    pub fn grassmann(n: usize, p: usize) -> Result<Self> {
        Self::Grassmann { n, p }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let ok = match self {
            Self::Euclidean { n } => n >= 1,
            Self::Sphere { n } => n >= 2,
            Self::Stiefel { n, p } | Self::Grassmann { n, p } => p >= 1 && p <= n,
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::InvalidArgument(format!("invalid manifold dimensions: {self}")))
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match *self {
            Self::Euclidean { n } | Self::Sphere { n } => n,
            Self::Stiefel { n, p } | Self::Grassmann { n, p } => n * p,
        }
    }

    pub fn intrinsic_dim(&self) -> usize {
        match *self {
            Self::Euclidean { n } => n,
            Self::Sphere { n } => n - 1,
            Self::Stiefel { n, p } => n * p - p * (p + 1) / 2,
            Self::Grassmann { n, p } => p * (n - p),
        }
    }

    /// `(rows, cols)` of the matrix view of an ambient vector.
    pub fn matrix_shape(&self) -> (usize, usize) {
        match *self {
            Self::Euclidean { n } | Self::Sphere { n } => (n, 1),
            Self::Stiefel { n, p } | Self::Grassmann { n, p } => (n, p),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Euclidean { .. } => "euclidean",
            Self::Sphere { .. } => "sphere",
            Self::Stiefel { .. } => "stiefel",
            Self::Grassmann { .. } => "grassmann",
        }
    }

    fn as_matrix(&self, ambient: &Vector) -> Matrix {
        let (r, c) = self.matrix_shape();
        Matrix::from_col_major(r, c, ambient.as_slice())
    }

    /// Feasibility residual of an ambient vector: `|‖x‖−1|` on the sphere,
    /// `‖XᵀX − I‖_F` on Stiefel/Grassmann, zero on ℝⁿ.
    pub fn feasibility_residual(&self, ambient: &Vector) -> f64 {
        match self {
            Self::Euclidean { .. } => 0.0,
            Self::Sphere { .. } => (ambient.norm() - 1.0).abs(),
            Self::Stiefel { p, .. } | Self::Grassmann { p, .. } => {
                let x = self.as_matrix(ambient);
                (&x.tr_matmul(&x) - &Matrix::identity(*p)).frobenius_norm()
            }
        }
    }

    fn check_ambient(&self, ambient: &Vector) -> Result<()> {
        if ambient.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch(format!(
                "{self} expects ambient length {}, got {}",
                self.ambient_dim(),
                ambient.len()
            )));
        }
        if !ambient.is_finite() {
            return Err(Error::InvalidArgument("non-finite ambient coordinates".into()));
        }
        Ok(())
    }
}

impl fmt::Display for ManifoldDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Euclidean { n } => write!(f, "Euclidean({n})"),
            Self::Sphere { n } => write!(f, "Sphere({n})"),
            Self::Stiefel { n, p } => write!(f, "Stiefel({n},{p})"),
            Self::Grassmann { n, p } => write!(f, "Grassmann({n},{p})"),
        }
    }
}

/// A point of a manifold in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    manifold: ManifoldDescriptor,
    ambient: Vector,
}

impl Point {
    /// Validates feasibility within [`FEASIBILITY_TOL`].
    pub fn new(manifold: ManifoldDescriptor, ambient: Vector) -> Result<Self> {
        manifold.check_ambient(&ambient)?;
        let r = manifold.feasibility_residual(&ambient);
        if !(r <= FEASIBILITY_TOL) {
            return Err(Error::InvalidArgument(format!("point infeasible on {manifold}: residual {r:e}")));
        }
        Ok(Point { manifold, ambient })
    }

    /// Skips the feasibility check; used where feasibility holds by
    /// construction (closest-point projections, orthonormal factors).
    pub(crate) fn new_unchecked(manifold: ManifoldDescriptor, ambient: Vector) -> Self {
        debug_assert_eq!(ambient.len(), manifold.ambient_dim());
        Point { manifold, ambient }
    }

    pub fn from_matrix(manifold: ManifoldDescriptor, x: &Matrix) -> Result<Self> {
        Self::new(manifold, Vector::from_vec(x.to_col_major()))
    }

    pub fn manifold(&self) -> ManifoldDescriptor {
        self.manifold
    }

    pub fn ambient(&self) -> &Vector {
        &self.ambient
    }

    /// Matrix view (`n×1` for vector manifolds).
    pub fn matrix(&self) -> Matrix {
        self.manifold.as_matrix(&self.ambient)
    }

    pub fn feasibility_residual(&self) -> f64 {
        self.manifold.feasibility_residual(&self.ambient)
    }

    /// Orthogonal projection of an ambient vector onto the tangent space
    /// (horizontal space for Grassmann) at this point.
    pub fn project_tangent(&self, ambient: &Vector) -> Result<TangentVector> {
        self.manifold.check_ambient(ambient)?;
        let v = match self.manifold {
            ManifoldDescriptor::Euclidean { .. } => ambient.clone(),
            ManifoldDescriptor::Sphere { .. } => ambient.axpy(-self.ambient.dot(ambient), &self.ambient),
            ManifoldDescriptor::Stiefel { .. } => {
                let x = self.matrix();
                let z = self.manifold.as_matrix(ambient);
                let xtz = x.tr_matmul(&z).symmetrize();
                Vector::from_vec((&z - &x.matmul(&xtz)).to_col_major())
            }
            ManifoldDescriptor::Grassmann { .. } => {
                let x = self.matrix();
                let z = self.manifold.as_matrix(ambient);
                Vector::from_vec((&z - &x.matmul(&x.tr_matmul(&z))).to_col_major())
            }
        };
        Ok(TangentVector { base: self.clone(), ambient: v })
    }

    pub fn zero_tangent(&self) -> TangentVector {
        TangentVector { base: self.clone(), ambient: Vector::zeros(self.ambient.len()) }
    }
}

/// A tangent vector in ambient coordinates, attached to its base point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: Point,
    ambient: Vector,
}

impl TangentVector {
    /// Validates tangency within `TANGENCY_TOL · max(1, ‖v‖)`.
    pub fn new(base: Point, ambient: Vector) -> Result<Self> {
        base.manifold.check_ambient(&ambient)?;
        let r = tangency_residual(&base, &ambient);
        if !(r <= TANGENCY_TOL * ambient.norm().max(1.0)) {
            return Err(Error::InvalidArgument(format!(
                "vector not tangent to {} at base: residual {r:e}",
                base.manifold
            )));
        }
        Ok(TangentVector { base, ambient })
    }

    pub(crate) fn new_unchecked(base: Point, ambient: Vector) -> Self {
        TangentVector { base, ambient }
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn ambient(&self) -> &Vector {
        &self.ambient
    }

    pub fn matrix(&self) -> Matrix {
        self.base.manifold.as_matrix(&self.ambient)
    }

    pub fn norm(&self) -> f64 {
        self.ambient.norm()
    }

    pub fn is_zero(&self) -> bool {
        self.ambient.is_zero()
    }

    pub fn scale(&self, alpha: f64) -> TangentVector {
        TangentVector { base: self.base.clone(), ambient: self.ambient.scale(alpha) }
    }

    /// Sum of two tangents at the same base.
    pub fn add(&self, other: &TangentVector) -> TangentVector {
        debug_assert_eq!(self.base, other.base);
        TangentVector { base: self.base.clone(), ambient: &self.ambient + &other.ambient }
    }

    pub fn sub(&self, other: &TangentVector) -> TangentVector {
        debug_assert_eq!(self.base, other.base);
        TangentVector { base: self.base.clone(), ambient: &self.ambient - &other.ambient }
    }

    pub fn tangency_residual(&self) -> f64 {
        tangency_residual(&self.base, &self.ambient)
    }
}

/// `|x·v|` on the sphere, `‖XᵀV + VᵀX‖_F` on Stiefel, `‖XᵀV‖_F` on
/// Grassmann (horizontal space), zero on ℝⁿ.
pub fn tangency_residual(base: &Point, v: &Vector) -> f64 {
    match base.manifold {
        ManifoldDescriptor::Euclidean { .. } => 0.0,
        ManifoldDescriptor::Sphere { .. } => base.ambient.dot(v).abs(),
        ManifoldDescriptor::Stiefel { .. } => {
            let x = base.matrix();
            let vm = base.manifold.as_matrix(v);
            let s = x.tr_matmul(&vm);
            (&s + &s.transpose()).frobenius_norm()
        }
        ManifoldDescriptor::Grassmann { .. } => {
            let x = base.matrix();
            x.tr_matmul(&base.manifold.as_matrix(v)).frobenius_norm()
        }
    }
}

/// Orthonormal basis of the tangent (horizontal) space, stored as columns
/// of an `ambient_dim × intrinsic_dim` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentBasis {
    base: Point,
    columns: Matrix,
}

impl TangentBasis {
    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn columns(&self) -> &Matrix {
        &self.columns
    }

    pub fn dim(&self) -> usize {
        self.columns.cols()
    }

    pub fn column(&self, i: usize) -> TangentVector {
        TangentVector::new_unchecked(self.base.clone(), self.columns.column(i))
    }

    /// Maps tangent coordinates `s` to the tangent vector `B·s`.
    pub fn to_tangent(&self, coords: &Vector) -> TangentVector {
        TangentVector::new_unchecked(self.base.clone(), self.columns.matvec(coords))
    }

    /// Coordinates `Bᵀv` of a tangent vector.
    pub fn coordinates(&self, v: &TangentVector) -> Vector {
        self.columns.tr_matvec(v.ambient())
    }
}

/// Deterministic orthonormal tangent basis at `p`.
///
/// Candidate directions are the ambient unit vectors projected onto the
/// tangent space. They are orthonormalised greedily, always taking the
/// candidate with the largest remaining component (ties go to the lowest
/// index), so ℝⁿ yields the standard basis.
pub fn tangent_basis(p: &Point) -> TangentBasis {
    let m = p.manifold;
    let amb = m.ambient_dim();
    let dim = m.intrinsic_dim();
    let mut candidates: Vec<Vector> = (0..amb)
        .map(|k| p.project_tangent(&Vector::unit(amb, k)).expect("unit vector has ambient length").ambient)
        .collect();
    let mut used = vec![false; amb];
    let mut chosen: Vec<Vector> = Vec::with_capacity(dim);

    while chosen.len() < dim {
        let mut best: Option<(usize, f64)> = None;
        for (k, c) in candidates.iter().enumerate() {
            if used[k] {
                continue;
            }
            let nrm = c.norm();
            if best.is_none_or(|(_, b)| nrm > b) {
                best = Some((k, nrm));
            }
        }
        let Some((k, nrm)) = best else { break };
        used[k] = true;
        if nrm <= 1e-8 {
            break;
        }
        let mut q = candidates[k].scale(1.0 / nrm);
        // second Gram–Schmidt pass and re-projection to remove drift
        for c in &chosen {
            q = q.axpy(-c.dot(&q), c);
        }
        q = p.project_tangent(&q).expect("length preserved").ambient;
        q = q.scale(1.0 / q.norm());
        for (j, c) in candidates.iter_mut().enumerate() {
            if !used[j] {
                *c = c.axpy(-q.dot(c), &q);
            }
        }
        chosen.push(q);
    }
    debug_assert_eq!(chosen.len(), dim);
    let columns = if dim == 0 { Matrix::zeros(amb, 0) } else { Matrix::from_columns(&chosen) };
    TangentBasis { base: p.clone(), columns }
}

/// Euclidean-closest feasible point to an ambient vector.
pub fn project_to_manifold(m: ManifoldDescriptor, ambient: &Vector) -> Result<Point> {
    m.check_ambient(ambient)?;
    match m {
        ManifoldDescriptor::Euclidean { .. } => Ok(Point::new_unchecked(m, ambient.clone())),
        ManifoldDescriptor::Sphere { .. } => {
            let nrm = ambient.norm();
            if nrm == 0.0 || !nrm.is_finite() {
                return Err(Error::ProjectionUndefined("zero vector has no closest point on the sphere".into()));
            }
            Ok(Point::new_unchecked(m, ambient.scale(1.0 / nrm)))
        }
        ManifoldDescriptor::Stiefel { .. } | ManifoldDescriptor::Grassmann { .. } => {
            let u = polar_factor(&m.as_matrix(ambient))
                .map_err(|e| Error::ProjectionUndefined(format!("polar factor failed: {e}")))?;
            Ok(Point::new_unchecked(m, Vector::from_vec(u.to_col_major())))
        }
    }
}

/// Ambient (chordal) distance; projector distance `‖XXᵀ − YYᵀ‖_F` on the
/// Grassmann manifold.
pub fn distance(p: &Point, q: &Point) -> Result<f64> {
    if p.manifold != q.manifold {
        return Err(Error::ManifoldMismatch(format!("{} vs {}", p.manifold, q.manifold)));
    }
    Ok(match p.manifold {
        ManifoldDescriptor::Grassmann { .. } => {
            let (x, y) = (p.matrix(), q.matrix());
            (&x.matmul(&x.transpose()) - &y.matmul(&y.transpose())).frobenius_norm()
        }
        _ => p.ambient.distance(&q.ambient),
    })
}

/// Seeded random point. Gaussian draws are normalised (sphere) or
/// polar-projected (Stiefel/Grassmann); degenerate draws are redrawn.
pub fn random_point(m: ManifoldDescriptor, seed: u64) -> Point {
    let mut rng = SplitMix64::new(seed);
    random_point_with(m, &mut rng)
}

pub fn random_point_with(m: ManifoldDescriptor, rng: &mut SplitMix64) -> Point {
    loop {
        let v = Vector::from_vec(rng.normal_vec(m.ambient_dim()));
        if let Ok(p) = project_to_manifold(m, &v) {
            return p;
        }
    }
}

/// Seeded random unit tangent vector at `p` (zero if the tangent space is
/// trivial).
pub fn random_unit_tangent(p: &Point, rng: &mut SplitMix64) -> TangentVector {
    let basis = tangent_basis(p);
    if basis.dim() == 0 {
        return p.zero_tangent();
    }
    loop {
        let c = Vector::from_vec(rng.normal_vec(basis.dim()));
        let n = c.norm();
        if n > 1e-8 {
            return basis.to_tangent(&c.scale(1.0 / n));
        }
    }
}

/// Seeded random orthogonal `n×n` matrix.
pub fn random_orthogonal(n: usize, rng: &mut SplitMix64) -> Matrix {
    loop {
        let g = Matrix::from_row_major(n, n, rng.normal_vec(n * n));
        if let Ok(q) = polar_factor(&g) {
            return q;
        }
    }
}
