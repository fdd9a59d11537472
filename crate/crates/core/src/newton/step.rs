use super::jet::{newton_increment, pullback_jet, Jet2};
use crate::costs::Cost;
use crate::error::Result;
use crate::manifold::Point;
use crate::numerics::{condition_estimate, Matrix};
use crate::parametrization::ParametrizationPair;

/// Additive perturbation `G(p)` of the pullback Hessian, in tangent
/// coordinates.
pub type HessianPerturbation<'a> = dyn Fn(&Point, &Jet2) -> Matrix + 'a;

#[derive(Debug, Clone)]
pub struct StepResult {
    pub next: Point,
    /// Norm of the Newton increment in tangent coordinates.
    pub step_norm: f64,
    pub hessian_condition: f64,
    pub pair_used: ParametrizationPair,
}

/// `E_f(p) = ψ_p(N_{f∘φ_p}(0_p))`.
pub fn generalized_newton_step(cost: &dyn Cost, pair: &ParametrizationPair, p: &Point) -> Result<StepResult> {
    perturbed_newton_step(cost, pair, p, None)
}

/// Generalised Newton step with the pullback Hessian replaced by
/// `H + G(p)` when a perturbation is supplied.
pub fn perturbed_newton_step(
    cost: &dyn Cost,
    pair: &ParametrizationPair,
    p: &Point,
    perturbation: Option<&HessianPerturbation<'_>>,
) -> Result<StepResult> {
    let mut jet = pullback_jet(cost, pair, p)?;
    if let Some(g) = perturbation {
        jet.hessian = (&jet.hessian + &g(p, &jet)).symmetrize();
    }
    let step = newton_increment(&jet.hessian, &jet.gradient)?;
    let hessian_condition = condition_estimate(&jet.hessian)?;
    let next = pair.apply_psi(&jet.basis.to_tangent(&step))?;
    Ok(StepResult { next, step_norm: step.norm(), hessian_condition, pair_used: pair.clone() })
}
