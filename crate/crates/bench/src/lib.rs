//! Fixtures shared by the benchmarks.

use parnewton_core::manifold::{random_point, random_unit_tangent};
use parnewton_core::numerics::{Matrix, Vector};
use parnewton_core::rng::SplitMix64;
use parnewton_core::{CostFunction, ManifoldDescriptor, ParametrizationKind, Point};

pub fn diag_1_to(n: usize) -> Matrix {
    Matrix::from_diag(&(1..=n).map(|i| i as f64).collect::<Vec<_>>())
}

/// Seeded symmetric `n×n` matrix with Gaussian entries.
pub fn random_symmetric(n: usize, seed: u64) -> Matrix {
    let mut rng = SplitMix64::new(seed);
    let g = Matrix::from_row_major(n, n, rng.normal_vec(n * n));
    (&g + &g.transpose()).scale(0.5)
}

pub fn random_rhs(n: usize, seed: u64) -> Vector {
    Vector::from_vec(SplitMix64::new(seed).normal_vec(n))
}

/// Rayleigh cost on `S^{n-1}` and a start near the minor eigenvector.
pub fn sphere_problem(n: usize) -> (CostFunction, Point) {
    let m = ManifoldDescriptor::Sphere { n };
    let e1 = Point::new(m, Vector::unit(n, 0)).unwrap();
    (CostFunction::rayleigh(diag_1_to(n)).unwrap(), near(&e1, 0.1))
}

/// Brockett cost on `St(n, 2)` and a start near its minimiser.
pub fn stiefel_problem(n: usize) -> (CostFunction, Point) {
    let m = ManifoldDescriptor::Stiefel { n, p: 2 };
    let truth = Point::from_matrix(m, &Matrix::from_columns(&[Vector::unit(n, 1), Vector::unit(n, 0)])).unwrap();
    let c = CostFunction::brockett(diag_1_to(n), Matrix::from_diag(&[1.0, 2.0])).unwrap();
    (c, near(&truth, 0.05))
}

/// Grassmann trace cost on `Gr(n, p)` and a random start.
pub fn grassmann_problem(n: usize, p: usize) -> (CostFunction, Point) {
    let m = ManifoldDescriptor::Grassmann { n, p };
    (CostFunction::grassmann_trace(diag_1_to(n)).unwrap(), random_point(m, 5))
}

fn near(truth: &Point, delta: f64) -> Point {
    let mut rng = SplitMix64::new(1);
    let v = random_unit_tangent(truth, &mut rng).scale(delta);
    ParametrizationKind::Projection.apply(&v).unwrap()
}
