#![allow(dead_code)]

use parnewton_core::manifold::random_unit_tangent;
use parnewton_core::numerics::{Matrix, Vector};
use parnewton_core::parametrization::ParametrizationKind;
use parnewton_core::rng::SplitMix64;
use parnewton_core::{ManifoldDescriptor, ParametrizationPair, Point};

pub fn real(x: f64) -> Point {
    Point::new(ManifoldDescriptor::Euclidean { n: 1 }, Vector::from_vec(vec![x])).unwrap()
}

pub fn identity_pair() -> ParametrizationPair {
    ParametrizationPair::same(ParametrizationKind::Custom1D { coeffs: vec![] })
}

pub fn diag_1_to(n: usize) -> Matrix {
    Matrix::from_diag(&(1..=n).map(|i| i as f64).collect::<Vec<_>>())
}

/// Point at geodesic angle `angle` from `p` along a seeded random direction.
pub fn sphere_start(p: &Point, angle: f64, seed: u64) -> Point {
    let mut rng = SplitMix64::new(seed);
    let u = random_unit_tangent(p, &mut rng);
    let x = p.ambient().scale(angle.cos()).axpy(angle.sin(), u.ambient());
    Point::new(p.manifold(), x).unwrap()
}

/// Projection retraction of a seeded tangent of norm `delta` at `truth`.
pub fn near_truth(truth: &Point, delta: f64, seed: u64) -> Point {
    let mut rng = SplitMix64::new(seed);
    let u = random_unit_tangent(truth, &mut rng).scale(delta);
    ParametrizationKind::Projection.apply(&u).unwrap()
}

/// Chordal distance to the nearer of `±q`.
pub fn sign_free_distance(p: &Point, q: &Point) -> f64 {
    let a = p.ambient().distance(q.ambient());
    let b = p.ambient().distance(&q.ambient().scale(-1.0));
    a.min(b)
}
