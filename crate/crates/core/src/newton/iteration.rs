use serde::{Deserialize, Serialize};

use super::step::{perturbed_newton_step, HessianPerturbation};
use crate::costs::Cost;
use crate::error::{Error, Result};
use crate::manifold::{distance, Point};
use crate::parametrization::ParametrizationPair;
use crate::rng::SplitMix64;

/// Distance below which `alternate-on-repeat` treats two iterates as the
/// same point.
pub const REPEAT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathRule {
    /// Advance to the next pair whenever the current iterate repeats an
    /// earlier one (within [`REPEAT_TOL`]).
    AlternateOnRepeat,
    /// Pick pair `⌊−log₁₀ d⌋ mod len` where `d` is the distance from the
    /// starting point (pair 0 while `d ≥ 1` or `d = 0`).
    DistanceKeyed,
}

/// Rule choosing the parametrisation pair at each iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SelectorPolicy {
    Fixed { pair: ParametrizationPair },
    RoundRobin { pairs: Vec<ParametrizationPair> },
    Random { pairs: Vec<ParametrizationPair>, seed: u64 },
    PathDependent { rule: PathRule, pairs: Vec<ParametrizationPair> },
}

impl SelectorPolicy {
    pub fn fixed(pair: ParametrizationPair) -> Self {
        SelectorPolicy::Fixed { pair }
    }

    pub fn pairs(&self) -> &[ParametrizationPair] {
        match self {
            Self::Fixed { pair } => std::slice::from_ref(pair),
            Self::RoundRobin { pairs } | Self::Random { pairs, .. } | Self::PathDependent { pairs, .. } => pairs,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pairs().is_empty() {
            return Err(Error::InvalidArgument("selector needs at least one parametrisation pair".into()));
        }
        Ok(())
    }
}

/// Stateful pair chooser for one run.
struct Selector<'a> {
    policy: &'a SelectorPolicy,
    rng: SplitMix64,
    current: usize,
}

impl<'a> Selector<'a> {
    fn new(policy: &'a SelectorPolicy) -> Self {
        let seed = match policy {
            SelectorPolicy::Random { seed, .. } => *seed,
            _ => 0,
        };
        Selector { policy, rng: SplitMix64::new(seed), current: 0 }
    }

    fn choose(&mut self, history: &[Point]) -> Result<&'a ParametrizationPair> {
        let pairs = self.policy.pairs();
        let k = history.len() - 1;
        let idx = match self.policy {
            SelectorPolicy::Fixed { .. } => 0,
            SelectorPolicy::RoundRobin { .. } => k % pairs.len(),
            SelectorPolicy::Random { .. } => self.rng.index(pairs.len()),
            SelectorPolicy::PathDependent { rule: PathRule::AlternateOnRepeat, .. } => {
                let p = &history[k];
                let mut repeated = false;
                for q in &history[..k] {
                    if distance(p, q)? <= REPEAT_TOL {
                        repeated = true;
                        break;
                    }
                }
                if repeated {
                    self.current = (self.current + 1) % pairs.len();
                }
                self.current
            }
            SelectorPolicy::PathDependent { rule: PathRule::DistanceKeyed, .. } => {
                let d = distance(&history[k], &history[0])?;
                if d > 0.0 && d < 1.0 {
                    (-d.log10()).floor() as usize % pairs.len()
                } else {
                    0
                }
            }
        };
        Ok(&pairs[idx])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Converged,
    SingularHessian,
    MaxIterations,
    LeftValidityRegion,
}

/// Iterates of one run, starting point included.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub points: Vec<Point>,
    /// `step_norms[k]` is the increment that produced `points[k + 1]`.
    pub step_norms: Vec<f64>,
    pub cost_values: Vec<f64>,
    pub termination: Termination,
    /// Label of the pair used for each recorded step.
    pub pairs_used: Vec<String>,
}

impl IterationTrace {
    pub fn iterations(&self) -> usize {
        self.points.len() - 1
    }

    pub fn last(&self) -> &Point {
        self.points.last().expect("trace holds the starting point")
    }

    pub fn final_cost(&self) -> f64 {
        *self.cost_values.last().expect("trace holds the starting cost")
    }
}

pub(crate) fn termination_for(err: &Error) -> Option<Termination> {
    match err {
        Error::SingularHessian { .. } => Some(Termination::SingularHessian),
        Error::OutsideValidityRadius(_)
        | Error::ProjectionUndefined(_)
        | Error::ChartDomainViolation(_)
        | Error::NotTwiceDifferentiable(_)
        | Error::RankDeficient { .. } => Some(Termination::LeftValidityRegion),
        _ => None,
    }
}

/// One step: next point, increment norm, label.
pub(crate) type Stepper<'s> = dyn FnMut(&[Point]) -> Result<(Point, f64, String)> + 's;

/// Shared driver: steps until the increment norm drops to `tol`, a step
/// fails, or `max_iter` steps have been recorded. The final negligible
/// increment is not recorded.
pub(crate) fn drive(cost: &dyn Cost, p0: &Point, max_iter: usize, tol: f64, step: &mut Stepper<'_>) -> Result<IterationTrace> {
    if max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    let mut trace = IterationTrace {
        points: vec![p0.clone()],
        step_norms: Vec::new(),
        cost_values: vec![cost.value(p0)?],
        termination: Termination::MaxIterations,
        pairs_used: Vec::new(),
    };
    for _ in 0..=max_iter {
        let (next, step_norm, label) = match step(&trace.points) {
            Ok(s) => s,
            Err(e) => match termination_for(&e) {
                Some(t) => {
                    trace.termination = t;
                    return Ok(trace);
                }
                None => return Err(e),
            },
        };
        if step_norm <= tol {
            trace.termination = Termination::Converged;
            return Ok(trace);
        }
        if trace.iterations() == max_iter {
            break;
        }
        let value = cost.value(&next)?;
        if !value.is_finite() || !step_norm.is_finite() {
            trace.termination = Termination::LeftValidityRegion;
            return Ok(trace);
        }
        trace.points.push(next);
        trace.step_norms.push(step_norm);
        trace.cost_values.push(value);
        trace.pairs_used.push(label);
    }
    trace.termination = Termination::MaxIterations;
    Ok(trace)
}

/// Runs `p_{k+1} = E_f^k(p_k)` with the pair chosen by `selector` each step.
///
/// Step failures become termination states; only invalid inputs are
/// returned as errors.
pub fn run_iteration(cost: &dyn Cost, selector: &SelectorPolicy, p0: &Point, max_iter: usize, tol: f64) -> Result<IterationTrace> {
    run_perturbed_iteration(cost, selector, p0, max_iter, tol, None)
}

/// [`run_iteration`] with a perturbed pullback Hessian `H + G(p)`.
pub fn run_perturbed_iteration(
    cost: &dyn Cost,
    selector: &SelectorPolicy,
    p0: &Point,
    max_iter: usize,
    tol: f64,
    perturbation: Option<&HessianPerturbation<'_>>,
) -> Result<IterationTrace> {
    selector.validate()?;
    let m = p0.manifold();
    if !cost.accepts(&m) {
        return Err(Error::ManifoldMismatch(format!("cost not defined on {m}")));
    }
    for pair in selector.pairs() {
        pair.validate(&m)?;
    }
    let mut chooser = Selector::new(selector);
    let mut step = |history: &[Point]| -> Result<(Point, f64, String)> {
        let pair = chooser.choose(history)?;
        let p = history.last().expect("non-empty history");
        let r = perturbed_newton_step(cost, pair, p, perturbation)?;
        Ok((r.next, r.step_norm, pair.label()))
    };
    drive(cost, p0, max_iter, tol, &mut step)
}
