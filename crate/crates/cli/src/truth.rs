//! Known minimisers for the built-in costs.

use parnewton_core::manifold::ManifoldDescriptor;
use parnewton_core::numerics::{symmetric_eigen, symmetric_solve, Matrix, Vector};
use parnewton_core::{CostFunction, Point};

/// Eigenvalue gap below which the minimiser is treated as not unique.
const GAP_TOL: f64 = 1e-12;

/// The minimiser of `cost` on `m` when it is determined by the cost's
/// data; `None` when it is not unique or not known in closed form.
pub fn ground_truth(cost: &CostFunction, m: ManifoldDescriptor) -> Option<Point> {
    match (cost, m) {
        (CostFunction::Quadratic { a, b }, ManifoldDescriptor::Euclidean { .. }) => {
            let x = symmetric_solve(a, &-b).ok()?;
            Point::new(m, x).ok()
        }
        (CostFunction::Quadratic { a, .. }, ManifoldDescriptor::Sphere { .. }) => {
            let cols = minor_eigenvectors(a, 1)?;
            Point::new(m, cols[0].clone()).ok()
        }
        (CostFunction::BrockettTrace { a, n }, ManifoldDescriptor::Stiefel { p, .. }) => {
            let eig = minor_eigenvectors(a, p)?;
            // largest weight pairs with the smallest eigenvalue
            let weights = n.diagonal();
            let mut order: Vec<usize> = (0..p).collect();
            order.sort_by(|&i, &j| weights[j].total_cmp(&weights[i]));
            let mut cols = vec![Vector::zeros(0); p];
            for (rank, &col) in order.iter().enumerate() {
                cols[col] = eig[rank].clone();
            }
            Point::from_matrix(m, &Matrix::from_columns(&cols)).ok()
        }
        (CostFunction::GrassmannTrace { a }, ManifoldDescriptor::Grassmann { p, .. }) => {
            let cols = minor_eigenvectors(a, p)?;
            Point::from_matrix(m, &Matrix::from_columns(&cols)).ok()
        }
        (CostFunction::AbsPower, _) => Point::new(m, Vector::zeros(1)).ok(),
        (CostFunction::ShiftedCubic { z }, _) => Point::new(m, Vector::from_vec(vec![*z])).ok(),
        _ => None,
    }
}

/// Eigenvectors of the `p` smallest eigenvalues, if separated from the rest.
fn minor_eigenvectors(a: &Matrix, p: usize) -> Option<Vec<Vector>> {
    let eig = symmetric_eigen(a).ok()?;
    let scale = eig.values.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    if p < eig.values.len() && eig.values[p] - eig.values[p - 1] <= GAP_TOL * scale {
        return None;
    }
    Some((0..p).map(|j| eig.vectors.column(j)).collect())
}

/// `truth` with each column's sign matched to `near` (sphere and Stiefel
/// minimisers are only determined up to these signs).
pub fn align_signs(truth: &Point, near: &Point) -> Point {
    let m = truth.manifold();
    match m {
        ManifoldDescriptor::Sphere { .. } | ManifoldDescriptor::Stiefel { .. } => {
            let (t, x) = (truth.matrix(), near.matrix());
            let cols: Vec<Vector> = (0..t.cols())
                .map(|j| {
                    let c = t.column(j);
                    if c.dot(&x.column(j)) < 0.0 {
                        c.scale(-1.0)
                    } else {
                        c
                    }
                })
                .collect();
            Point::from_matrix(m, &Matrix::from_columns(&cols)).expect("sign flips keep feasibility")
        }
        _ => truth.clone(),
    }
}
