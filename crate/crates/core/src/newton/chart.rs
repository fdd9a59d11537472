//! Lifting shift-invariant Euclidean methods through a single chart:
//! `E_f(p) = χ⁻¹(θ_{χ(p)}(N_{f∘χ⁻¹∘θ_{χ(p)}}(0)))` with `θ_x(y) = x + y`.

use serde::{Deserialize, Serialize};

use super::iteration::{drive, IterationTrace};
use crate::costs::Cost;
use crate::error::{Error, Result};
use crate::manifold::{tangent_basis, ManifoldDescriptor, Point};
use crate::numerics::{symmetric_solve, Matrix, Vector};

/// Minimum of `1 − ⟨pole, p⟩` for a point to be inside the stereographic
/// chart.
pub const STEREOGRAPHIC_MARGIN: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShiftInvariantMethod {
    Newton,
    /// `−(H + λI)⁻¹∇f`.
    DampedNewton { lambda: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Chart {
    /// `ℝⁿ` with its own coordinates.
    Identity,
    /// Stereographic projection from `pole` onto the hyperplane `pole^⊥`,
    /// which sends `−pole` to the origin.
    SphereStereographic { pole: Vector },
}

impl Chart {
    fn check(&self, m: ManifoldDescriptor) -> Result<()> {
        match (self, m) {
            (Chart::Identity, ManifoldDescriptor::Euclidean { .. }) => Ok(()),
            (Chart::SphereStereographic { pole }, ManifoldDescriptor::Sphere { n }) if pole.len() == n => {
                if (pole.norm() - 1.0).abs() > 1e-10 {
                    Err(Error::InvalidArgument("stereographic pole must be a unit vector".into()))
                } else {
                    Ok(())
                }
            }
            _ => Err(Error::ManifoldMismatch(format!("chart {self:?} does not cover {m}"))),
        }
    }

    fn pole_basis(pole: &Vector) -> Matrix {
        let m = ManifoldDescriptor::Sphere { n: pole.len() };
        let p = Point::new(m, pole.clone()).expect("pole is a unit vector");
        tangent_basis(&p).columns().clone()
    }

    pub fn to_coords(&self, p: &Point) -> Result<Vector> {
        self.check(p.manifold())?;
        match self {
            Chart::Identity => Ok(p.ambient().clone()),
            Chart::SphereStereographic { pole } => {
                let denom = 1.0 - pole.dot(p.ambient());
                if !(denom > STEREOGRAPHIC_MARGIN) {
                    return Err(Error::ChartDomainViolation("point coincides with the stereographic pole".into()));
                }
                Ok(Self::pole_basis(pole).tr_matvec(p.ambient()).scale(1.0 / denom))
            }
        }
    }

    pub fn from_coords(&self, m: ManifoldDescriptor, u: &Vector) -> Result<Point> {
        self.check(m)?;
        match self {
            Chart::Identity => Point::new(m, u.clone()),
            Chart::SphereStereographic { pole } => {
                let b = Self::pole_basis(pole);
                if u.len() != b.cols() {
                    return Err(Error::DimensionMismatch("stereographic coordinate length".into()));
                }
                let uu = u.dot(u);
                let x = b.matvec(u).scale(2.0).axpy(uu - 1.0, pole).scale(1.0 / (uu + 1.0));
                Ok(Point::new_unchecked(m, x))
            }
        }
    }
}

/// Exact derivatives of the inverse chart at coordinates `x`: Jacobian
/// columns and second derivatives `D²χ⁻¹(e_i, e_j)`.
struct ChartJet {
    point: Point,
    jacobian: Vec<Vector>,
    second: Vec<Vec<Vector>>,
}

fn chart_jet(chart: &Chart, m: ManifoldDescriptor, x: &Vector) -> Result<ChartJet> {
    let d = x.len();
    let point = chart.from_coords(m, x)?;
    match chart {
        Chart::Identity => Ok(ChartJet {
            point,
            jacobian: (0..d).map(|i| Vector::unit(d, i)).collect(),
            second: vec![vec![Vector::zeros(d); d]; d],
        }),
        Chart::SphereStereographic { pole } => {
            // χ⁻¹(u) = g(u)·h(u), g = 2Bu + (|u|² − 1)q, h = 1/(|u|² + 1)
            let b = Chart::pole_basis(pole);
            let s = x.dot(x);
            let h = 1.0 / (s + 1.0);
            let g = b.matvec(x).scale(2.0).axpy(s - 1.0, pole);
            let dg: Vec<Vector> = (0..d).map(|i| b.column(i).scale(2.0).axpy(2.0 * x[i], pole)).collect();
            let dh: Vec<f64> = (0..d).map(|i| -2.0 * x[i] * h * h).collect();
            let jacobian = (0..d).map(|i| dg[i].scale(h).axpy(dh[i], &g)).collect();
            let mut second = vec![vec![Vector::zeros(0); d]; d];
            for i in 0..d {
                for j in 0..d {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    let d2h = -2.0 * delta * h * h + 8.0 * x[i] * x[j] * h * h * h;
                    second[i][j] = pole
                        .scale(2.0 * delta * h)
                        .axpy(dh[j], &dg[i])
                        .axpy(dh[i], &dg[j])
                        .axpy(d2h, &g);
                }
            }
            Ok(ChartJet { point, jacobian, second })
        }
    }
}

/// One step of `method` lifted through `chart`, returning the next point and
/// the increment norm in chart coordinates.
pub fn chart_lift_step_with_norm(method: ShiftInvariantMethod, chart: &Chart, cost: &dyn Cost, p: &Point) -> Result<(Point, f64)> {
    let m = p.manifold();
    if !cost.accepts(&m) {
        return Err(Error::ManifoldMismatch(format!("cost not defined on {m}")));
    }
    let x = chart.to_coords(p)?;
    let jet = chart_jet(chart, m, &x)?;
    let d = x.len();
    let grad = cost.ambient_gradient(&jet.point)?;
    let gradient = Vector::from_vec(jet.jacobian.iter().map(|c| c.dot(&grad)).collect());
    let mut hessian = Matrix::zeros(d, d);
    for j in 0..d {
        let hj = cost.ambient_hessian_vec(&jet.point, &jet.jacobian[j])?;
        for i in 0..d {
            hessian[(i, j)] = jet.jacobian[i].dot(&hj) + grad.dot(&jet.second[i][j]);
        }
    }
    let mut hessian = hessian.symmetrize();
    if let ShiftInvariantMethod::DampedNewton { lambda } = method {
        for i in 0..d {
            hessian[(i, i)] += lambda;
        }
    }
    let step = -&symmetric_solve(&hessian, &gradient)?;
    let next = chart.from_coords(m, &(&x + &step))?;
    Ok((next, step.norm()))
}

pub fn chart_lift_step(method: ShiftInvariantMethod, chart: &Chart, cost: &dyn Cost, p: &Point) -> Result<Point> {
    chart_lift_step_with_norm(method, chart, cost, p).map(|(q, _)| q)
}

/// Iterates [`chart_lift_step`] under the same termination rules as
/// [`run_iteration`](super::run_iteration).
pub fn run_chart_lift(
    method: ShiftInvariantMethod,
    chart: &Chart,
    cost: &dyn Cost,
    p0: &Point,
    max_iter: usize,
    tol: f64,
) -> Result<IterationTrace> {
    chart.check(p0.manifold())?;
    let label = match method {
        ShiftInvariantMethod::Newton => "chart-newton".to_string(),
        ShiftInvariantMethod::DampedNewton { lambda } => format!("chart-damped-newton({lambda})"),
    };
    let mut step = |history: &[Point]| -> Result<(Point, f64, String)> {
        let p = history.last().expect("non-empty history");
        let (q, n) = chart_lift_step_with_norm(method, chart, cost, p)?;
        Ok((q, n, label.clone()))
    };
    drive(cost, p0, max_iter, tol, &mut step)
}
