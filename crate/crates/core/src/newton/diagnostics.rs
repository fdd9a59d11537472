use crate::costs::Cost;
use crate::error::{Error, Result};
use crate::manifold::{ManifoldDescriptor, Point};

/// `‖[H_f(x) − H_f(x*)](x − x*)‖ / ‖x − x*‖²` on ℝⁿ.
///
/// Bounded as `x → x*` exactly when plain Newton converges quadratically.
pub fn hessian_lipschitz_ratio(cost: &dyn Cost, x: &Point, x_star: &Point) -> Result<f64> {
    if !matches!(x.manifold(), ManifoldDescriptor::Euclidean { .. }) || x.manifold() != x_star.manifold() {
        return Err(Error::ManifoldMismatch("ratio is defined for points of one Euclidean space".into()));
    }
    let d = x.ambient() - x_star.ambient();
    let dn = d.norm();
    if dn == 0.0 {
        return Err(Error::InvalidArgument("x coincides with x*".into()));
    }
    let diff = &cost.ambient_hessian_vec(x, &d)? - &cost.ambient_hessian_vec(x_star, &d)?;
    Ok(diff.norm() / (dn * dn))
}
