mod common;

use common::*;
use nalgebra::DMatrix;
use parnewton_core::convergence::{estimate_rate, DEFAULT_CEIL, DEFAULT_FLOOR};
use parnewton_core::manifold::{random_orthogonal, random_point_with, random_unit_tangent};
use parnewton_core::newton::{hessian_lipschitz_ratio, euclidean_newton_step, pullback_jet, HessianPerturbation};
use parnewton_core::newton::{run_perturbed_iteration, SelectorPolicy, Termination};
use parnewton_core::numerics::{polar_factor, singular_values, symmetric_eigen, symmetric_solve, Matrix, Vector};
use parnewton_core::parametrization::{recentring_anchor, recentring_rotation, second_order_term_fd, AuditConfig};
use parnewton_core::rng::SplitMix64;
use parnewton_core::{
    audit_conditions, distance, project_to_manifold, tangent_basis, Cost, CostFunction, ManifoldDescriptor, ParametrizationKind,
    ParametrizationPair, Point, TangentVector,
};
use proptest::prelude::*;

fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.row_major())
}

/// `Q diag(λ) Qᵀ` with `|λ| ∈ [1, 1e3]` and random signs.
fn well_conditioned(n: usize, rng: &mut SplitMix64) -> Matrix {
    let q = random_orthogonal(n, rng);
    let lambda: Vec<f64> = (0..n)
        .map(|_| {
            let mag = 10f64.powf(rng.uniform(0.0, 3.0));
            if rng.next_f64() < 0.5 { -mag } else { mag }
        })
        .collect();
    q.matmul(&Matrix::from_diag(&lambda)).matmul(&q.transpose()).symmetrize()
}

fn all_manifolds() -> Vec<ManifoldDescriptor> {
    vec![
        ManifoldDescriptor::Euclidean { n: 3 },
        ManifoldDescriptor::Sphere { n: 2 },
        ManifoldDescriptor::Sphere { n: 5 },
        ManifoldDescriptor::Stiefel { n: 4, p: 1 },
        ManifoldDescriptor::Stiefel { n: 5, p: 2 },
        ManifoldDescriptor::Stiefel { n: 3, p: 3 },
        ManifoldDescriptor::Grassmann { n: 5, p: 2 },
        ManifoldDescriptor::Grassmann { n: 6, p: 3 },
    ]
}

/// Built-in kinds paired with a manifold each is valid on.
fn builtin_kinds() -> Vec<(ParametrizationKind, ManifoldDescriptor)> {
    let s4 = ManifoldDescriptor::Sphere { n: 4 };
    let st = ManifoldDescriptor::Stiefel { n: 5, p: 2 };
    let gr = ManifoldDescriptor::Grassmann { n: 5, p: 2 };
    let r1 = ManifoldDescriptor::Euclidean { n: 1 };
    vec![
        (ParametrizationKind::Projection, ManifoldDescriptor::Euclidean { n: 3 }),
        (ParametrizationKind::Projection, s4),
        (ParametrizationKind::Projection, st),
        (ParametrizationKind::Projection, gr),
        (ParametrizationKind::SphereGeodesic, s4),
        (ParametrizationKind::Qr, s4),
        (ParametrizationKind::Qr, st),
        (ParametrizationKind::Qr, gr),
        (ParametrizationKind::Custom1D { coeffs: vec![0.0, -1.0] }, r1),
        (ParametrizationKind::ExampleBeta { beta: 1.0 }, r1),
        (ParametrizationKind::recentred(ParametrizationKind::Projection, 5), s4),
        (ParametrizationKind::recentred(ParametrizationKind::SphereGeodesic, 6), s4),
        (ParametrizationKind::recentred(ParametrizationKind::Qr, 7), s4),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn solve_residual_on_well_conditioned(n in 1usize..=16, seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let h = well_conditioned(n, &mut rng);
        let b = Vector::from_vec(rng.normal_vec(n));
        let x = symmetric_solve(&h, &b).unwrap();
        let r = &h.matvec(&x) - &b;
        prop_assert!(r.norm() <= 1e-10 * h.frobenius_norm() * x.norm().max(b.norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn polar_factor_is_closest_orthonormal(n in 1usize..=6, pp in 1usize..=3, seed in any::<u64>()) {
        let p = pp.min(n);
        let mut rng = SplitMix64::new(seed);
        let m = Matrix::from_row_major(n, p, rng.normal_vec(n * p));
        prop_assume!(singular_values(&m).unwrap()[0] > 1e-3);
        let u = polar_factor(&m).unwrap();
        let best = (&m - &u).frobenius_norm();
        for _ in 0..100 {
            let q = random_orthogonal(n, &mut rng);
            let cols: Vec<Vector> = (0..p).map(|j| q.column(j)).collect();
            let q = Matrix::from_columns(&cols);
            prop_assert!(best <= (&m - &q).frobenius_norm() + 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn polar_factor_matches_svd_oracle(n in 1usize..=6, pp in 1usize..=3, seed in any::<u64>()) {
        let p = pp.min(n);
        let mut rng = SplitMix64::new(seed);
        let m = Matrix::from_row_major(n, p, rng.normal_vec(n * p));
        let svd = to_na(&m).svd(true, true);
        let smin = svd.singular_values.min();
        prop_assume!(smin > 1e-3);
        let oracle = svd.u.unwrap() * svd.v_t.unwrap();
        let u = to_na(&polar_factor(&m).unwrap());
        prop_assert!((u - &oracle).norm() <= 1e-9 / smin);
        let mut ours = singular_values(&m).unwrap();
        let mut theirs: Vec<f64> = svd.singular_values.iter().copied().collect();
        ours.sort_by(f64::total_cmp);
        theirs.sort_by(f64::total_cmp);
        for (a, b) in ours.iter().zip(&theirs) {
            prop_assert!((a - b).abs() <= 1e-9 * theirs[p - 1]);
        }
    }

    #[test]
    fn eigen_reconstructs(n in 1usize..=10, seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let g = Matrix::from_row_major(n, n, rng.normal_vec(n * n));
        let a = (&g + &g.transpose()).scale(0.5);
        let e = symmetric_eigen(&a).unwrap();
        let back = e.vectors.matmul(&Matrix::from_diag(e.values.as_slice())).matmul(&e.vectors.transpose());
        prop_assert!((&a - &back).frobenius_norm() <= 1e-9 * a.frobenius_norm());
        prop_assert!((&e.vectors.tr_matmul(&e.vectors) - &Matrix::identity(n)).max_abs() <= 1e-12);
        let mut oracle: Vec<f64> = to_na(&a).symmetric_eigenvalues().iter().copied().collect();
        oracle.sort_by(f64::total_cmp);
        for (x, y) in e.values.iter().zip(&oracle) {
            prop_assert!((x - y).abs() <= 1e-10 * a.frobenius_norm().max(1.0));
        }
    }
}

#[test]
fn tangent_bases_are_orthonormal_and_tangent() {
    let mut rng = SplitMix64::new(11);
    for m in all_manifolds() {
        for _ in 0..100 {
            let p = random_point_with(m, &mut rng);
            let b = tangent_basis(&p);
            assert_eq!(b.dim(), m.intrinsic_dim());
            let gram = b.columns().tr_matmul(b.columns());
            assert!((&gram - &Matrix::identity(b.dim())).max_abs() <= 1e-10, "{m}");
            for i in 0..b.dim() {
                assert!(b.column(i).tangency_residual() <= 1e-10, "{m}");
            }
        }
    }
}

#[test]
fn random_points_are_feasible() {
    for m in all_manifolds() {
        for seed in 0..1000 {
            assert!(parnewton_core::random_point(m, seed).feasibility_residual() <= 1e-10);
        }
    }
}

#[test]
fn projection_is_idempotent() {
    let mut rng = SplitMix64::new(12);
    for m in all_manifolds() {
        for _ in 0..100 {
            let p = random_point_with(m, &mut rng);
            let q = project_to_manifold(m, p.ambient()).unwrap();
            assert!(q.ambient().distance(p.ambient()) <= 1e-12, "{m}");
        }
    }
}

#[test]
fn grassmann_distance_ignores_representative() {
    let m = ManifoldDescriptor::Grassmann { n: 6, p: 3 };
    let mut rng = SplitMix64::new(13);
    let x = random_point_with(m, &mut rng);
    let y = random_point_with(m, &mut rng);
    let d = distance(&x, &y).unwrap();
    for _ in 0..100 {
        let q = random_orthogonal(3, &mut rng);
        let xq = Point::from_matrix(m, &x.matrix().matmul(&q)).unwrap();
        assert!((distance(&xq, &y).unwrap() - d).abs() <= 1e-12);
        assert!(distance(&xq, &x).unwrap() <= 1e-12);
    }
}

#[test]
fn anchor_condition_holds() {
    let mut rng = SplitMix64::new(14);
    for (kind, m) in builtin_kinds() {
        for _ in 0..100 {
            let p = random_point_with(m, &mut rng);
            let pair = ParametrizationPair::same(kind.clone());
            let q = pair.apply_phi(&p.zero_tangent()).unwrap();
            let r = q.ambient().distance(p.ambient());
            if matches!(m, ManifoldDescriptor::Euclidean { .. }) {
                assert_eq!(q.ambient(), p.ambient(), "{}", kind.name());
            } else {
                assert!(r <= 1e-14, "{} {r}", kind.name());
            }
        }
    }
}

#[test]
fn builtin_psi_are_second_order_close() {
    for (kind, m) in builtin_kinds() {
        let mut config = AuditConfig::default();
        if matches!(kind, ParametrizationKind::ExampleBeta { .. }) {
            config.sampler = parnewton_core::parametrization::BaseSampler::Interval { lo: 0.5, hi: 1.0 };
        }
        let report = audit_conditions(&ParametrizationPair::same(kind.clone()), m, &config).unwrap();
        assert!(report.pass.all(), "{} on {m}: {report:?}", kind.name());
        if let Some(slope) = report.fitted_slope {
            assert!(slope >= 1.9, "{} on {m}: {slope}", kind.name());
        }
    }
}

#[test]
fn second_order_terms_match_finite_differences() {
    let mut rng = SplitMix64::new(15);
    for (kind, m) in builtin_kinds() {
        for _ in 0..100 {
            let p = random_point_with(m, &mut rng);
            let v = random_unit_tangent(&p, &mut rng);
            let exact = kind.second_order_term(&v).unwrap();
            let fd = second_order_term_fd(&kind, &v).unwrap();
            assert!(fd.distance(&exact) <= 1e-6 * exact.norm().max(1.0), "{} on {m}", kind.name());
        }
    }
}

#[test]
fn recentred_parametrisation_is_equivariant() {
    let m = ManifoldDescriptor::Sphere { n: 5 };
    let anchor = recentring_anchor(m).unwrap();
    let mut rng = SplitMix64::new(16);
    for base in [ParametrizationKind::Projection, ParametrizationKind::SphereGeodesic, ParametrizationKind::Qr] {
        for seed in 0..100 {
            let kind = ParametrizationKind::recentred(base.clone(), seed);
            let p = random_point_with(m, &mut rng);
            let g = recentring_rotation(&p, seed).unwrap();
            assert!(g.matvec(anchor.ambient()).distance(p.ambient()) <= 1e-14);
            let v = random_unit_tangent(&p, &mut rng).scale(0.3);
            let at_p = kind.apply(&v).unwrap();
            let pulled = TangentVector::new(anchor.clone(), g.tr_matvec(v.ambient())).unwrap();
            let at_anchor = base.apply(&pulled).unwrap();
            assert!(g.matvec(at_anchor.ambient()).distance(at_p.ambient()) <= 1e-12);
        }
    }
}

#[test]
fn rate_recovery_on_synthetic_sequences() {
    for k0 in [1.5, 2.0, 3.0] {
        for kappa0 in [0.5, 1.0, 2.0] {
            let mut e = vec![0.1f64];
            while e.len() < 12 {
                let next = kappa0 * e[e.len() - 1].powf(k0);
                e.push(next);
            }
            // e₀ = 0.1 sits on the default (open) ceiling, so widen it
            let r = estimate_rate(&e, DEFAULT_FLOOR, 1.0).unwrap();
            assert!((r.rate - k0).abs() <= 0.05, "K0={k0} κ0={kappa0}: {r:?}");
            assert!((r.kappa / kappa0 - 1.0).abs() <= 1e-6, "K0={k0} κ0={kappa0}: {r:?}");
        }
    }
}

proptest! {
    #[test]
    fn sub_floor_pairs_never_change_the_fit(k0 in 1.2f64..3.5, tail in proptest::collection::vec(1e-30f64..1e-13, 1..6)) {
        let mut e = vec![0.05f64];
        while e[e.len() - 1] > 1e-9 {
            let next = e[e.len() - 1].powf(k0);
            e.push(next);
        }
        prop_assume!(e.len() >= 4);
        let base = estimate_rate(&e, DEFAULT_FLOOR, DEFAULT_CEIL);
        let mut extended = e.clone();
        extended.extend(tail);
        let ext = estimate_rate(&extended, DEFAULT_FLOOR, DEFAULT_CEIL);
        prop_assert_eq!(base.map(|r| (r.rate, r.kappa)), ext.map(|r| (r.rate, r.kappa)));
    }
}

/// `f(x) = Σ x_i⁴/4 + ½xᵀAx + bᵀx` on ℝⁿ.
struct Quartic {
    a: Matrix,
    b: Vector,
}

impl Cost for Quartic {
    fn accepts(&self, m: &ManifoldDescriptor) -> bool {
        matches!(m, ManifoldDescriptor::Euclidean { n } if *n == self.b.len())
    }
    fn value(&self, p: &Point) -> parnewton_core::Result<f64> {
        let x = p.ambient();
        Ok(x.iter().map(|v| v.powi(4) / 4.0).sum::<f64>() + 0.5 * x.dot(&self.a.matvec(x)) + self.b.dot(x))
    }
    fn ambient_gradient(&self, p: &Point) -> parnewton_core::Result<Vector> {
        let x = p.ambient();
        let cubes = Vector::from_vec(x.iter().map(|v| v.powi(3)).collect());
        Ok(&(&cubes + &self.a.matvec(x)) + &self.b)
    }
    fn ambient_hessian_vec(&self, p: &Point, d: &Vector) -> parnewton_core::Result<Vector> {
        let x = p.ambient();
        let diag = Vector::from_vec(x.iter().zip(d.iter()).map(|(v, w)| 3.0 * v * v * w).collect());
        Ok(&diag + &self.a.matvec(d))
    }
}

/// `x ↦ f(Tx)`.
struct Composed<'a> {
    inner: &'a dyn Cost,
    t: Matrix,
}

impl Composed<'_> {
    fn push(&self, p: &Point) -> Point {
        Point::new(p.manifold(), self.t.matvec(p.ambient())).unwrap()
    }
}

impl Cost for Composed<'_> {
    fn accepts(&self, m: &ManifoldDescriptor) -> bool {
        self.inner.accepts(m)
    }
    fn value(&self, p: &Point) -> parnewton_core::Result<f64> {
        self.inner.value(&self.push(p))
    }
    fn ambient_gradient(&self, p: &Point) -> parnewton_core::Result<Vector> {
        Ok(self.t.tr_matvec(&self.inner.ambient_gradient(&self.push(p))?))
    }
    fn ambient_hessian_vec(&self, p: &Point, d: &Vector) -> parnewton_core::Result<Vector> {
        Ok(self.t.tr_matvec(&self.inner.ambient_hessian_vec(&self.push(p), &self.t.matvec(d))?))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn newton_step_is_affine_invariant(n in 1usize..=5, seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let m = ManifoldDescriptor::Euclidean { n };
        let f = Quartic { a: well_conditioned(n, &mut rng).scale(0.01), b: Vector::from_vec(rng.normal_vec(n)) };
        // T = Q diag(s) with s ∈ [0.5, 2] keeps T well conditioned
        let s: Vec<f64> = (0..n).map(|_| rng.uniform(0.5, 2.0)).collect();
        let t = random_orthogonal(n, &mut rng).matmul(&Matrix::from_diag(&s));
        let g = Composed { inner: &f, t: t.clone() };
        let y = Point::new(m, Vector::from_vec(rng.normal_vec(n))).unwrap();
        let x = g.push(&y);
        let id = identity_pair_n();
        let jf = pullback_jet(&f, &id, &x).unwrap();
        let jg = pullback_jet(&g, &id, &y).unwrap();
        let cond = parnewton_core::numerics::condition_estimate(&jf.hessian).unwrap();
        prop_assume!(cond < 1e6);
        let sf = euclidean_newton_step(&jf).unwrap();
        let sg = euclidean_newton_step(&jg).unwrap();
        // N_{f∘T}(y) = T⁻¹N_f(Ty)  ⇔  T·(y + s_g) = x + s_f
        let lhs = t.matvec(&(y.ambient() + &sg));
        let rhs = x.ambient() + &sf;
        prop_assert!(lhs.distance(&rhs) <= 1e-10 * rhs.norm().max(1.0), "{} vs {}", lhs.distance(&rhs), rhs.norm());
    }
}

fn identity_pair_n() -> ParametrizationPair {
    ParametrizationPair::same(ParametrizationKind::Projection)
}

#[test]
fn hessian_lipschitz_ratio_stays_bounded() {
    for z in [-0.7, 0.0, 0.4, 2.0] {
        let c = CostFunction::ShiftedCubic { z };
        let star = real(z);
        let ratios: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5]
            .iter()
            .flat_map(|&h| [h, -h])
            .map(|h| hessian_lipschitz_ratio(&c, &real(z + h), &star).unwrap())
            .collect();
        // |f'''| = 12 bounds the ratio
        assert!(ratios.iter().all(|&r| r <= 12.0 * (1.0 + 1e-6)), "{ratios:?}");
    }
}

#[test]
fn perturbed_hessian_keeps_quadratic_rate() {
    for z in [-0.5, 0.0, 0.3, 1.0] {
        let c = CostFunction::ShiftedCubic { z };
        let gamma = 1.0;
        let g = move |p: &Point, _: &parnewton_core::Jet2| Matrix::from_diag(&[gamma * (p.ambient()[0] - z).abs()]);
        let g: &HessianPerturbation = &g;
        let sel = SelectorPolicy::fixed(identity_pair());
        let t = run_perturbed_iteration(&c, &sel, &real(z + 0.05), 50, 1e-15, Some(g)).unwrap();
        assert_eq!(t.termination, Termination::Converged);
        let errs: Vec<f64> = t.points.iter().map(|p| (p.ambient()[0] - z).abs()).collect();
        let r = estimate_rate(&errs, DEFAULT_FLOOR, DEFAULT_CEIL).unwrap();
        assert!(r.rate >= 1.8, "z={z}: {r:?} {errs:?}");
    }
}
