//! Newton iteration engines: Euclidean steps on pulled-back 2-jets, the
//! generalised step `ψ_p ∘ N_{f∘φ_p}(0_p)`, whimsical and path-dependent
//! drivers, and single-chart lifts.

mod chart;
mod diagnostics;
mod iteration;
mod jet;
mod step;

pub use chart::{chart_lift_step, chart_lift_step_with_norm, run_chart_lift, Chart, ShiftInvariantMethod, STEREOGRAPHIC_MARGIN};
pub use diagnostics::hessian_lipschitz_ratio;
pub use iteration::{
    run_iteration, run_perturbed_iteration, IterationTrace, PathRule, SelectorPolicy, Termination, REPEAT_TOL,
};
pub use jet::{euclidean_newton_step, pullback_jet, Jet2};
pub use step::{generalized_newton_step, perturbed_newton_step, HessianPerturbation, StepResult};
