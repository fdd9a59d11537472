//! Generalised Newton methods on manifolds.
//!
//! A method is fixed by a parametrisation pair `(φ, ψ)`: the cost is pulled
//! back to the tangent space through `φ_p`, a Euclidean Newton increment is
//! taken at the origin, and `ψ_p` maps it back, giving
//! `E_f(p) = ψ_p(N_{f∘φ_p}(0_p))`. The crate provides the manifolds
//! (ℝⁿ, spheres, Stiefel and Grassmann), the parametrisations, analytic
//! cost 2-jets, iteration drivers with fixed, random and path-dependent
//! pair selection, sampling audits of the conditions on `(φ, ψ)`, and a
//! rate estimator for the resulting iterations.

pub mod convergence;
pub mod costs;
pub mod error;
pub mod manifold;
pub mod newton;
pub mod numerics;
pub mod parametrization;
pub mod rng;

pub use convergence::{error_sequence, estimate_rate, estimate_rate_pooled, RateEstimate};
pub use costs::{Cost, CostFunction};
pub use error::{Error, Result};
pub use manifold::{distance, project_to_manifold, random_point, tangent_basis, ManifoldDescriptor, Point, TangentBasis, TangentVector};
pub use newton::{
    generalized_newton_step, pullback_jet, run_iteration, IterationTrace, Jet2, SelectorPolicy, StepResult, Termination,
};
pub use numerics::{Matrix, Vector};
pub use parametrization::{audit_conditions, AuditConfig, AuditReport, ParametrizationKind, ParametrizationPair};
