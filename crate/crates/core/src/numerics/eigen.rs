//! Cyclic Jacobi eigensolver for small dense symmetric matrices.

use super::{Matrix, Vector};
use crate::error::{Error, Result};

/// Sweep budget for the cyclic Jacobi iteration.
pub const MAX_SWEEPS: usize = 500;

const SYMMETRY_TOL: f64 = 1e-10;

/// Eigen-decomposition `A = V diag(values) Vᵀ` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vector,
    /// Orthonormal eigenvectors stored as columns.
    pub vectors: Matrix,
}

impl SymmetricEigen {
    /// Ratio of the largest to the smallest eigenvalue magnitude; infinite
    /// when an eigenvalue is exactly zero.
    pub fn condition(&self) -> f64 {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
        for &l in self.values.iter() {
            lo = lo.min(l.abs());
            hi = hi.max(l.abs());
        }
        if hi == 0.0 {
            f64::INFINITY
        } else if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }
}

/// Computes all eigenpairs of a symmetric matrix.
///
/// Eigenvalues come back in ascending order. Each eigenvector is signed so
/// that its first component that is not negligibly small is positive, which
/// makes ground-truth comparisons deterministic.
pub fn symmetric_eigen(a: &Matrix) -> Result<SymmetricEigen> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!("eigen of {}x{} matrix", a.rows(), a.cols())));
    }
    if !a.is_finite() {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    if !a.is_symmetric(SYMMETRY_TOL) {
        return Err(Error::InvalidArgument("matrix is not symmetric".into()));
    }
    let n = a.rows();
    let mut m = a.symmetrize();
    let mut v = Matrix::identity(n);
    let scale = m.frobenius_norm();

    let mut converged = scale == 0.0;
    for _sweep in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let off = off_diagonal_norm(&m);
        if off <= f64::EPSILON * 1e-2 * scale || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (m[(p, p)], m[(q, q)]);
                // Skip rotations that can no longer change the diagonal.
                if apq.abs() <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                    m[(p, q)] = 0.0;
                    m[(q, p)] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut m, &mut v, p, q, c, s);
            }
        }
    }
    if !converged && off_diagonal_norm(&m) > f64::EPSILON * scale {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values = Vector::from_vec(order.iter().map(|&i| m[(i, i)]).collect());
    let mut vectors = Matrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let mut col = v.column(i);
        canonical_sign(&mut col);
        vectors.set_column(k, &col);
    }
    Ok(SymmetricEigen { values, vectors })
}

fn off_diagonal_norm(m: &Matrix) -> f64 {
    let n = m.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)] * m[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Applies `m ← Jᵀ m J`, `v ← v J` for the plane rotation in (p, q).
fn rotate(m: &mut Matrix, v: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = m.rows();
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = c * mkp - s * mkq;
        m[(k, q)] = s * mkp + c * mkq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = c * mpk - s * mqk;
        m[(q, k)] = s * mpk + c * mqk;
    }
    m[(p, q)] = 0.0;
    m[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Flips `v` so that its first non-negligible component is positive.
pub(crate) fn canonical_sign(v: &mut Vector) {
    let thresh = 1e-12 * v.max_abs();
    if let Some(&first) = v.iter().find(|x| x.abs() > thresh) {
        if first < 0.0 {
            for x in v.as_mut_slice() {
                *x = -*x;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruction_error(a: &Matrix, e: &SymmetricEigen) -> f64 {
        let lambda = Matrix::from_diag(e.values.as_slice());
        let r = e.vectors.matmul(&lambda).matmul(&e.vectors.transpose());
        (a - &r).frobenius_norm()
    }

    #[test]
    fn diagonal_input_sorted_with_positive_signs() {
        let a = Matrix::from_diag(&[3.0, 1.0, 2.0]);
        let e = symmetric_eigen(&a).unwrap();
        assert_eq!(e.values.as_slice(), &[1.0, 2.0, 3.0]);
        assert_eq!(e.vectors.column(0).as_slice(), &[0.0, 1.0, 0.0]);
        assert_eq!(e.vectors.column(1).as_slice(), &[0.0, 0.0, 1.0]);
        assert_eq!(e.vectors.column(2).as_slice(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn two_by_two_characteristic_polynomial() {
        // λ² − 4λ + 3 = 0
        let a = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let e = symmetric_eigen(&a).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
        assert!(reconstruction_error(&a, &e) < 1e-14);
        let v0 = e.vectors.column(0);
        assert!((v0[0] - 1.0 / 2f64.sqrt()).abs() < 1e-14);
        assert!((v0[1] + 1.0 / 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn degenerate_spectrum() {
        let e = symmetric_eigen(&Matrix::identity(4)).unwrap();
        assert_eq!(e.values.as_slice(), &[1.0; 4]);
        let vtv = e.vectors.tr_matmul(&e.vectors);
        assert!((&vtv - &Matrix::identity(4)).frobenius_norm() < 1e-10);
    }

    #[test]
    fn rejects_asymmetric() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]);
        assert!(matches!(symmetric_eigen(&a), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn zero_matrix() {
        let e = symmetric_eigen(&Matrix::zeros(3, 3)).unwrap();
        assert_eq!(e.values.as_slice(), &[0.0; 3]);
        assert!(e.condition().is_infinite());
    }
}
