//! Symmetric indefinite solves via Bunch–Kaufman diagonal pivoting.

use super::eigen::symmetric_eigen;
use super::{Matrix, Vector};
use crate::error::{Error, Result};

/// Condition-number estimate above which a Hessian is declared singular.
pub const MAX_CONDITION: f64 = 1e12;
/// Relative pivot magnitude (against `‖H‖_F`) treated as underflow.
pub const PIVOT_UNDERFLOW: f64 = 1e-14;

const SYMMETRY_TOL: f64 = 1e-10;
// (1 + √17) / 8
const BK_ALPHA: f64 = 0.640_388_203_202_208_4;

/// `P H Pᵀ = L D Lᵀ` with `D` block diagonal (1×1 and 2×2 blocks).
#[derive(Debug, Clone)]
pub struct LdltFactor {
    /// Unit lower factor below the diagonal blocks, `D` on the blocks.
    packed: Matrix,
    perm: Vec<usize>,
    blocks: Vec<(usize, usize)>,
}

impl LdltFactor {
    pub fn factor(h: &Matrix) -> Result<Self> {
        let n = h.rows();
        let norm = h.frobenius_norm();
        let tiny = PIVOT_UNDERFLOW * norm;
        let mut a = h.symmetrize();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut blocks = Vec::new();

        let mut k = 0;
        while k < n {
            let absakk = a[(k, k)].abs();
            let (imax, colmax) = ((k + 1)..n)
                .map(|i| (i, a[(i, k)].abs()))
                .fold((k, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });

            if absakk.max(colmax) <= tiny {
                return Err(Error::SingularHessian { condition: f64::INFINITY });
            }

            let (kp, kstep) = if absakk >= BK_ALPHA * colmax {
                (k, 1)
            } else {
                let rowmax = (k..n).filter(|&j| j != imax).map(|j| a[(imax, j)].abs()).fold(0.0, f64::max);
                if absakk * rowmax >= BK_ALPHA * colmax * colmax {
                    (k, 1)
                } else if a[(imax, imax)].abs() >= BK_ALPHA * rowmax {
                    (imax, 1)
                } else {
                    (imax, 2)
                }
            };

            let kk = k + kstep - 1;
            if kp != kk {
                a.swap_rows(kk, kp);
                a.swap_cols(kk, kp);
                perm.swap(kk, kp);
            }

            if kstep == 1 {
                let d = a[(k, k)];
                if d.abs() <= tiny {
                    return Err(Error::SingularHessian { condition: f64::INFINITY });
                }
                for i in (k + 1)..n {
                    let li = a[(i, k)] / d;
                    for j in (k + 1)..=i {
                        let v = a[(i, j)] - li * a[(j, k)];
                        a[(i, j)] = v;
                        a[(j, i)] = v;
                    }
                }
                for i in (k + 1)..n {
                    a[(i, k)] /= d;
                }
            } else {
                let (d11, d21, d22) = (a[(k, k)], a[(k + 1, k)], a[(k + 1, k + 1)]);
                let det = d11 * d22 - d21 * d21;
                if det.abs() <= tiny * tiny {
                    return Err(Error::SingularHessian { condition: f64::INFINITY });
                }
                let (i11, i12, i22) = (d22 / det, -d21 / det, d11 / det);
                let mut l = vec![(0.0, 0.0); n];
                for i in (k + 2)..n {
                    let (w0, w1) = (a[(i, k)], a[(i, k + 1)]);
                    l[i] = (w0 * i11 + w1 * i12, w0 * i12 + w1 * i22);
                }
                for i in (k + 2)..n {
                    for j in (k + 2)..=i {
                        let v = a[(i, j)] - l[i].0 * a[(j, k)] - l[i].1 * a[(j, k + 1)];
                        a[(i, j)] = v;
                        a[(j, i)] = v;
                    }
                }
                for (i, &(l0, l1)) in l.iter().enumerate().skip(k + 2) {
                    a[(i, k)] = l0;
                    a[(i, k + 1)] = l1;
                }
            }
            blocks.push((k, kstep));
            k += kstep;
        }
        Ok(LdltFactor { packed: a, perm, blocks })
    }

    pub fn solve(&self, b: &Vector) -> Vector {
        let n = self.perm.len();
        let a = &self.packed;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();

        // L z = P b
        for &(k, step) in &self.blocks {
            for c in k..k + step {
                let yc = y[c];
                for i in (k + step)..n {
                    y[i] -= a[(i, c)] * yc;
                }
            }
        }
        // D w = z
        for &(k, step) in &self.blocks {
            if step == 1 {
                y[k] /= a[(k, k)];
            } else {
                let (d11, d21, d22) = (a[(k, k)], a[(k + 1, k)], a[(k + 1, k + 1)]);
                let det = d11 * d22 - d21 * d21;
                let (z0, z1) = (y[k], y[k + 1]);
                y[k] = (d22 * z0 - d21 * z1) / det;
                y[k + 1] = (d11 * z1 - d21 * z0) / det;
            }
        }
        // Lᵀ x' = w
        for &(k, step) in self.blocks.iter().rev() {
            for c in k..k + step {
                let mut s = y[c];
                for i in (k + step)..n {
                    s -= a[(i, c)] * y[i];
                }
                y[c] = s;
            }
        }
        let mut x = Vector::zeros(n);
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }
}

/// Solves `H s = b` for symmetric (possibly indefinite) `H`.
///
/// Fails with [`Error::SingularHessian`] when the eigenvalue-based condition
/// number exceeds [`MAX_CONDITION`] or a pivot underflows.
pub fn symmetric_solve(h: &Matrix, b: &Vector) -> Result<Vector> {
    if !h.is_square() || h.rows() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "solve with {}x{} matrix and length-{} rhs",
            h.rows(),
            h.cols(),
            b.len()
        )));
    }
    if !h.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument("non-finite entries in linear system".into()));
    }
    if !h.is_symmetric(SYMMETRY_TOL) {
        return Err(Error::InvalidArgument("matrix is not symmetric".into()));
    }
    let condition = condition_estimate(h)?;
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularHessian { condition });
    }
    Ok(LdltFactor::factor(h)?.solve(b))
}

/// `max|λ| / min|λ|` of a symmetric matrix.
pub fn condition_estimate(h: &Matrix) -> Result<f64> {
    if h.rows() == 0 {
        return Ok(1.0);
    }
    Ok(symmetric_eigen(h)?.condition())
}
