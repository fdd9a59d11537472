//! Cost functions with analytic ambient 2-jets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{ManifoldDescriptor, Point};
use crate::numerics::{symmetric_eigen, Matrix, Vector};

/// A smooth cost on an embedded manifold, described by its ambient 2-jet.
///
/// The iteration engines only use this interface, so costs beyond
/// [`CostFunction`] can be supplied directly.
pub trait Cost {
    /// Whether the cost is defined on points of `m`.
    fn accepts(&self, m: &ManifoldDescriptor) -> bool;
    fn value(&self, p: &Point) -> Result<f64>;
    fn ambient_gradient(&self, p: &Point) -> Result<Vector>;
    /// Ambient Hessian applied to `dir`.
    fn ambient_hessian_vec(&self, p: &Point, dir: &Vector) -> Result<Vector>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostFunction {
    /// `½xᵀAx + bᵀx` on ℝⁿ, or restricted to the sphere (Rayleigh cost).
    Quadratic { a: Matrix, b: Vector },
    /// `Tr(XᵀAXN)` on the Stiefel manifold.
    BrockettTrace { a: Matrix, n: Matrix },
    /// `Tr(XᵀAX)`, invariant under `X → XQ`.
    GrassmannTrace { a: Matrix },
    /// `x² + |x|^{5/2}` on ℝ.
    AbsPower,
    /// `(x−z)² + 2(x−z)³` on ℝ.
    ShiftedCubic { z: f64 },
}

const SYMMETRY_TOL: f64 = 1e-10;

impl CostFunction {
    pub fn quadratic(a: Matrix, b: Vector) -> Result<Self> {
        require_symmetric(&a, "A")?;
        if b.len() != a.rows() {
            return Err(Error::DimensionMismatch(format!("b has length {}, A is {}x{}", b.len(), a.rows(), a.cols())));
        }
        Ok(Self::Quadratic { a, b })
    }

    /// Rayleigh cost `½xᵀAx`.
    pub fn rayleigh(a: Matrix) -> Result<Self> {
        let n = a.rows();
        Self::quadratic(a, Vector::zeros(n))
    }

    pub fn brockett(a: Matrix, n: Matrix) -> Result<Self> {
        require_symmetric(&a, "A")?;
        if !n.is_square() {
            return Err(Error::InvalidArgument("N must be square".into()));
        }
        for i in 0..n.rows() {
            for j in 0..n.cols() {
                if i != j && n[(i, j)] != 0.0 {
                    return Err(Error::InvalidArgument("N must be diagonal".into()));
                }
            }
        }
        let mut d = n.diagonal();
        if d.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::InvalidArgument("N must have positive diagonal entries".into()));
        }
        d.sort_by(f64::total_cmp);
        if d.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("N must have distinct diagonal entries".into()));
        }
        if n.rows() > a.rows() {
            return Err(Error::DimensionMismatch("N larger than A".into()));
        }
        Ok(Self::BrockettTrace { a, n })
    }

    pub fn grassmann_trace(a: Matrix) -> Result<Self> {
        require_symmetric(&a, "A")?;
        let ev = symmetric_eigen(&a)?.values;
        let scale = ev.max_abs().max(1.0);
        if ev.as_slice().windows(2).any(|w| (w[1] - w[0]).abs() <= 1e-12 * scale) {
            return Err(Error::InvalidArgument("A must have distinct eigenvalues".into()));
        }
        Ok(Self::GrassmannTrace { a })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Quadratic { .. } => "quadratic",
            Self::BrockettTrace { .. } => "brockett_trace",
            Self::GrassmannTrace { .. } => "grassmann_trace",
            Self::AbsPower => "abs_power",
            Self::ShiftedCubic { .. } => "shifted_cubic",
        }
    }

    fn check(&self, p: &Point) -> Result<()> {
        if self.accepts(&p.manifold()) {
            Ok(())
        } else {
            Err(Error::ManifoldMismatch(format!("{} cost is not defined on {}", self.kind_name(), p.manifold())))
        }
    }

    fn scalar(p: &Point) -> f64 {
        p.ambient()[0]
    }
}

fn require_symmetric(a: &Matrix, name: &str) -> Result<()> {
    if !a.is_finite() {
        return Err(Error::InvalidArgument(format!("{name} has non-finite entries")));
    }
    if !a.is_symmetric(SYMMETRY_TOL) {
        return Err(Error::InvalidArgument(format!("{name} must be square and symmetric")));
    }
    Ok(())
}

impl Cost for CostFunction {
    fn accepts(&self, m: &ManifoldDescriptor) -> bool {
        match (self, *m) {
            (Self::Quadratic { a, .. }, ManifoldDescriptor::Euclidean { n } | ManifoldDescriptor::Sphere { n }) => {
                a.rows() == n
            }
            (Self::BrockettTrace { a, n: w }, ManifoldDescriptor::Stiefel { n, p }) => a.rows() == n && w.rows() == p,
            (Self::GrassmannTrace { a }, ManifoldDescriptor::Grassmann { n, .. } | ManifoldDescriptor::Stiefel { n, .. }) => {
                a.rows() == n
            }
            (Self::AbsPower | Self::ShiftedCubic { .. }, ManifoldDescriptor::Euclidean { n: 1 }) => true,
            _ => false,
        }
    }

    fn value(&self, p: &Point) -> Result<f64> {
        self.check(p)?;
        Ok(match self {
            Self::Quadratic { a, b } => {
                let x = p.ambient();
                0.5 * x.dot(&a.matvec(x)) + b.dot(x)
            }
            Self::BrockettTrace { a, n } => {
                let x = p.matrix();
                let ax = a.matmul(&x);
                (0..x.cols()).map(|j| n[(j, j)] * x.column(j).dot(&ax.column(j))).sum()
            }
            Self::GrassmannTrace { a } => {
                let x = p.matrix();
                x.frobenius_dot(&a.matmul(&x))
            }
            Self::AbsPower => {
                let x = Self::scalar(p);
                x * x + x.abs().powf(2.5)
            }
            Self::ShiftedCubic { z } => {
                let d = Self::scalar(p) - z;
                d * d + 2.0 * d * d * d
            }
        })
    }

    fn ambient_gradient(&self, p: &Point) -> Result<Vector> {
        self.check(p)?;
        Ok(match self {
            Self::Quadratic { a, b } => &a.matvec(p.ambient()) + b,
            Self::BrockettTrace { a, n } => {
                let g = a.matmul(&p.matrix()).matmul(n).scale(2.0);
                Vector::from_vec(g.to_col_major())
            }
            Self::GrassmannTrace { a } => Vector::from_vec(a.matmul(&p.matrix()).scale(2.0).to_col_major()),
            Self::AbsPower => {
                let x = Self::scalar(p);
                Vector::from_vec(vec![2.0 * x + 2.5 * x.abs().powf(1.5) * x.signum()])
            }
            Self::ShiftedCubic { z } => {
                let d = Self::scalar(p) - z;
                Vector::from_vec(vec![2.0 * d + 6.0 * d * d])
            }
        })
    }

    fn ambient_hessian_vec(&self, p: &Point, dir: &Vector) -> Result<Vector> {
        self.check(p)?;
        if dir.len() != p.manifold().ambient_dim() {
            return Err(Error::DimensionMismatch("hessian direction length".into()));
        }
        Ok(match self {
            Self::Quadratic { a, .. } => a.matvec(dir),
            Self::BrockettTrace { a, n } => {
                let (r, c) = p.manifold().matrix_shape();
                let z = Matrix::from_col_major(r, c, dir.as_slice());
                Vector::from_vec(a.matmul(&z).matmul(n).scale(2.0).to_col_major())
            }
            Self::GrassmannTrace { a } => {
                let (r, c) = p.manifold().matrix_shape();
                let z = Matrix::from_col_major(r, c, dir.as_slice());
                Vector::from_vec(a.matmul(&z).scale(2.0).to_col_major())
            }
            Self::AbsPower => {
                let x = Self::scalar(p);
                if x == 0.0 {
                    return Err(Error::NotTwiceDifferentiable("x² + |x|^{5/2} at x = 0".into()));
                }
                dir.scale(2.0 + 3.75 * x.abs().sqrt())
            }
            Self::ShiftedCubic { z } => dir.scale(2.0 + 12.0 * (Self::scalar(p) - z)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{random_orthogonal, random_point_with};
    use crate::rng::SplitMix64;

    fn real(x: f64) -> Point {
        Point::new(ManifoldDescriptor::Euclidean { n: 1 }, Vector::from_vec(vec![x])).unwrap()
    }

    #[test]
    fn brockett_value_at_permutation() {
        let c = CostFunction::brockett(Matrix::from_diag(&[1.0, 2.0, 3.0]), Matrix::from_diag(&[1.0, 2.0])).unwrap();
        let m = ManifoldDescriptor::stiefel(3, 2).unwrap();
        let x = Matrix::from_columns(&[Vector::unit(3, 1), Vector::unit(3, 0)]);
        assert_eq!(c.value(&Point::from_matrix(m, &x).unwrap()).unwrap(), 4.0);
    }

    #[test]
    fn brockett_gradient_formula() {
        let a = Matrix::from_diag(&[1.0, 2.0, 3.0]);
        let nn = Matrix::from_diag(&[1.0, 2.0]);
        let c = CostFunction::brockett(a.clone(), nn.clone()).unwrap();
        let m = ManifoldDescriptor::stiefel(3, 2).unwrap();
        let x = Matrix::from_columns(&[Vector::unit(3, 1), Vector::unit(3, 2)]);
        let g = c.ambient_gradient(&Point::from_matrix(m, &x).unwrap()).unwrap();
        assert_eq!(g.as_slice(), a.matmul(&x).matmul(&nn).scale(2.0).to_col_major().as_slice());
    }

    #[test]
    fn scalar_families() {
        assert_eq!(CostFunction::ShiftedCubic { z: 0.0 }.value(&real(0.0)).unwrap(), 0.0);
        assert_eq!(CostFunction::ShiftedCubic { z: 0.0 }.ambient_gradient(&real(0.0)).unwrap()[0], 0.0);
        assert_eq!(CostFunction::AbsPower.value(&real(1.0)).unwrap(), 2.0);
        assert_eq!(CostFunction::AbsPower.ambient_gradient(&real(0.25)).unwrap()[0], 0.8125);
        assert_eq!(CostFunction::AbsPower.ambient_gradient(&real(-0.25)).unwrap()[0], -0.8125);
        let one = Vector::from_vec(vec![1.0]);
        assert_eq!(CostFunction::AbsPower.ambient_hessian_vec(&real(0.25), &one).unwrap()[0], 3.875);
        let h = CostFunction::ShiftedCubic { z: 0.0 }.ambient_hessian_vec(&real(0.1), &one).unwrap()[0];
        assert!((h - 3.2).abs() < 1e-15);
        assert!(matches!(
            CostFunction::AbsPower.ambient_hessian_vec(&real(0.0), &one),
            Err(Error::NotTwiceDifferentiable(_))
        ));
    }

    #[test]
    fn quadratic_hessian_ignores_point() {
        let a = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        let c = CostFunction::quadratic(a.clone(), Vector::from_vec(vec![1.0, -1.0])).unwrap();
        let r2 = ManifoldDescriptor::euclidean(2).unwrap();
        let d = Vector::from_vec(vec![0.5, 2.0]);
        for x in [[0.0, 0.0], [3.0, -7.0]] {
            let p = Point::new(r2, Vector::from_vec(x.to_vec())).unwrap();
            assert_eq!(c.ambient_hessian_vec(&p, &d).unwrap(), a.matvec(&d));
        }
    }

    #[test]
    fn constructor_validation() {
        assert!(CostFunction::brockett(Matrix::identity(3), Matrix::from_diag(&[1.0, 1.0])).is_err());
        assert!(CostFunction::brockett(Matrix::identity(3), Matrix::from_diag(&[1.0, -2.0])).is_err());
        assert!(CostFunction::grassmann_trace(Matrix::identity(3)).is_err());
        assert!(CostFunction::quadratic(Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]), Vector::zeros(2)).is_err());
    }

    #[test]
    fn manifold_mismatch() {
        let s = ManifoldDescriptor::sphere(2).unwrap();
        let p = Point::new(s, Vector::unit(2, 0)).unwrap();
        assert!(matches!(CostFunction::AbsPower.value(&p), Err(Error::ManifoldMismatch(_))));
    }

    fn random_symmetric(n: usize, rng: &mut SplitMix64) -> Matrix {
        let m = Matrix::from_row_major(n, n, rng.normal_vec(n * n));
        (&m + &m.transpose()).scale(0.5)
    }

    fn fd_cases(rng: &mut SplitMix64) -> Vec<(CostFunction, ManifoldDescriptor)> {
        let z = rng.uniform(-1.0, 1.0);
        vec![
            (
                CostFunction::quadratic(random_symmetric(4, rng), Vector::from_vec(rng.normal_vec(4))).unwrap(),
                ManifoldDescriptor::Euclidean { n: 4 },
            ),
            (CostFunction::rayleigh(random_symmetric(5, rng)).unwrap(), ManifoldDescriptor::Sphere { n: 5 }),
            (
                CostFunction::brockett(random_symmetric(5, rng), Matrix::from_diag(&[1.0, 2.5])).unwrap(),
                ManifoldDescriptor::Stiefel { n: 5, p: 2 },
            ),
            (CostFunction::grassmann_trace(random_symmetric(5, rng)).unwrap(), ManifoldDescriptor::Grassmann { n: 5, p: 2 }),
            (CostFunction::AbsPower, ManifoldDescriptor::Euclidean { n: 1 }),
            (CostFunction::ShiftedCubic { z }, ManifoldDescriptor::Euclidean { n: 1 }),
        ]
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = SplitMix64::new(17);
        let h = 1e-6;
        for _ in 0..100 {
            for (c, m) in fd_cases(&mut rng) {
                let p = random_point_with(m, &mut rng);
                let x = p.ambient().clone();
                let at = |y: Vector| Point::new_unchecked(m, y);
                let g = c.ambient_gradient(&p).unwrap();
                let fd = Vector::from_vec(
                    (0..x.len())
                        .map(|i| {
                            let e = Vector::unit(x.len(), i).scale(h);
                            (c.value(&at(&x + &e)).unwrap() - c.value(&at(&x - &e)).unwrap()) / (2.0 * h)
                        })
                        .collect(),
                );
                assert!(fd.distance(&g) <= 1e-6 * g.norm().max(1.0), "{c:?} gradient");
                let d = Vector::from_vec(rng.normal_vec(x.len()));
                let hv = c.ambient_hessian_vec(&p, &d).unwrap();
                let fd = (&c.ambient_gradient(&at(x.axpy(h, &d))).unwrap() - &c.ambient_gradient(&at(x.axpy(-h, &d))).unwrap())
                    .scale(0.5 / h);
                assert!(fd.distance(&hv) <= 1e-5 * hv.norm().max(1.0), "{c:?} hessian");
            }
        }
    }

    #[test]
    fn grassmann_trace_descends_to_quotient() {
        let mut rng = SplitMix64::new(3);
        let m = ManifoldDescriptor::Grassmann { n: 6, p: 3 };
        let c = CostFunction::grassmann_trace(random_symmetric(6, &mut rng)).unwrap();
        for _ in 0..100 {
            let p = random_point_with(m, &mut rng);
            let q = random_orthogonal(3, &mut rng);
            let pq = Point::from_matrix(m, &p.matrix().matmul(&q)).unwrap();
            let (a, b) = (c.value(&p).unwrap(), c.value(&pq).unwrap());
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} {b} {}", (&q.tr_matmul(&q) - &Matrix::identity(3)).max_abs());
        }
    }

    fn injections(n: usize, p: usize) -> Vec<Vec<usize>> {
        if p == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for head in injections(n, p - 1) {
            for i in (0..n).filter(|i| !head.contains(i)) {
                let mut v = head.clone();
                v.push(i);
                out.push(v);
            }
        }
        out
    }

    #[test]
    fn brockett_minimum_is_sorted_assignment() {
        let mut rng = SplitMix64::new(8);
        for n in 1..=6 {
            for p in 1..=n.min(3) {
                let lambda: Vec<f64> = (0..n).map(|_| rng.uniform(-3.0, 3.0)).collect();
                let mut weights: Vec<f64> = (0..p).map(|k| k as f64 + 1.0 + rng.uniform(0.0, 0.5)).collect();
                weights.reverse();
                let c = CostFunction::brockett(Matrix::from_diag(&lambda), Matrix::from_diag(&weights)).unwrap();
                let m = ManifoldDescriptor::Stiefel { n, p };
                let best = injections(n, p)
                    .iter()
                    .map(|sigma| {
                        let cols: Vec<Vector> = sigma.iter().map(|&i| Vector::unit(n, i)).collect();
                        c.value(&Point::from_matrix(m, &Matrix::from_columns(&cols)).unwrap()).unwrap()
                    })
                    .fold(f64::INFINITY, f64::min);
                let mut sorted_l = lambda.clone();
                sorted_l.sort_by(f64::total_cmp);
                let mut sorted_w = weights.clone();
                sorted_w.sort_by(|a, b| b.total_cmp(a));
                let assigned: f64 = sorted_w.iter().zip(&sorted_l).map(|(w, l)| w * l).sum();
                assert!((best - assigned).abs() < 1e-12, "n={n} p={p}");
            }
        }
    }
}
