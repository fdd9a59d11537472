use super::eigen::symmetric_eigen;
use super::Matrix;
use crate::error::{Error, Result};

/// Smallest admissible ratio of extreme singular values.
pub const RANK_TOL: f64 = 1e-12;

/// Orthonormal polar factor `U = M (MᵀM)^{-1/2}` of a tall matrix.
///
/// `U` is the Frobenius-closest matrix with orthonormal columns to `M`.
/// Computed from the eigendecomposition of the Gram matrix `MᵀM`.
pub fn polar_factor(m: &Matrix) -> Result<Matrix> {
    let (n, p) = (m.rows(), m.cols());
    if n < p || p == 0 {
        return Err(Error::DimensionMismatch(format!("polar factor of {n}x{p} matrix")));
    }
    let gram = m.tr_matmul(m).symmetrize();
    let eig = symmetric_eigen(&gram)?;
    let (lo, hi) = (eig.values[0], eig.values[p - 1]);
    let ratio = if hi > 0.0 { (lo.max(0.0) / hi).sqrt() } else { 0.0 };
    if !(ratio > RANK_TOL) {
        return Err(Error::RankDeficient { ratio });
    }
    let v = &eig.vectors;
    let mut scaled = v.clone();
    for j in 0..p {
        let s = 1.0 / eig.values[j].sqrt();
        for i in 0..p {
            scaled[(i, j)] *= s;
        }
    }
    let inv_sqrt = scaled.matmul(&v.transpose());
    let mut u = m.matmul(&inv_sqrt);
    // Newton–Schulz sweeps `U ← U(3I − UᵀU)/2` repair the orthogonality lost
    // to squaring the condition number in the Gram matrix.
    for _ in 0..3 {
        let defect = &u.tr_matmul(&u) - &Matrix::identity(p);
        if defect.max_abs() <= 4.0 * f64::EPSILON * p as f64 {
            break;
        }
        u = u.axpy(-0.5, &u.matmul(&defect));
    }
    Ok(u)
}

/// Singular values of `M` in ascending order (square roots of the Gram
/// eigenvalues).
pub fn singular_values(m: &Matrix) -> Result<Vec<f64>> {
    let gram = m.tr_matmul(m).symmetrize();
    Ok(symmetric_eigen(&gram)?.values.iter().map(|&l| l.max(0.0).sqrt()).collect())
}
