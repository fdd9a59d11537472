use crate::costs::Cost;
use crate::error::{Error, Result};
use crate::manifold::{tangent_basis, Point, TangentBasis};
use crate::numerics::{symmetric_solve, Matrix, Vector};
use crate::parametrization::ParametrizationPair;

/// Value, gradient and Hessian of `f ∘ φ_p` at the tangent-space origin,
/// in the coordinates of an orthonormal tangent basis.
#[derive(Debug, Clone)]
pub struct Jet2 {
    pub basis: TangentBasis,
    pub value: f64,
    pub gradient: Vector,
    pub hessian: Matrix,
}

impl Jet2 {
    pub fn dim(&self) -> usize {
        self.gradient.len()
    }
}

/// Pure Newton increment `−H⁻¹∇f` in tangent coordinates.
pub fn euclidean_newton_step(jet: &Jet2) -> Result<Vector> {
    newton_increment(&jet.hessian, &jet.gradient)
}

pub(crate) fn newton_increment(hessian: &Matrix, gradient: &Vector) -> Result<Vector> {
    if gradient.is_empty() {
        return Ok(Vector::zeros(0));
    }
    Ok(-&symmetric_solve(hessian, gradient)?)
}

/// 2-jet of `f ∘ φ_p` at `0_p`.
///
/// `∇_i = ⟨∇f(p), B_i⟩` since `Dφ_p(0) = I`, and
/// `H_ij = ⟨B_i, ∇²f(p) B_j⟩ + ⟨∇f(p), D²φ_p(0)(B_i, B_j)⟩`, with the mixed
/// second-order terms recovered by polarisation
/// `S(v, w) = ¼[S(v+w, v+w) − S(v−w, v−w)]`.
pub fn pullback_jet(cost: &dyn Cost, pair: &ParametrizationPair, p: &Point) -> Result<Jet2> {
    let m = p.manifold();
    if !cost.accepts(&m) {
        return Err(Error::ManifoldMismatch(format!("cost not defined on {m}")));
    }
    pair.validate(&m)?;
    let basis = tangent_basis(p);
    let d = basis.dim();
    let value = cost.value(p)?;
    let grad = cost.ambient_gradient(p)?;
    let gradient = basis.columns().tr_matvec(&grad);

    let cols: Vec<_> = (0..d).map(|i| basis.column(i)).collect();
    let mut hessian = Matrix::zeros(d, d);
    for j in 0..d {
        let hbj = cost.ambient_hessian_vec(p, cols[j].ambient())?;
        for i in 0..d {
            hessian[(i, j)] = cols[i].ambient().dot(&hbj);
        }
    }
    for i in 0..d {
        let s_ii = pair.second_order_term(&cols[i])?;
        hessian[(i, i)] += grad.dot(&s_ii);
        for j in 0..i {
            let plus = pair.second_order_term(&cols[i].add(&cols[j]))?;
            let minus = pair.second_order_term(&cols[i].sub(&cols[j]))?;
            let s_ij = 0.25 * (grad.dot(&plus) - grad.dot(&minus));
            hessian[(i, j)] += s_ij;
            hessian[(j, i)] += s_ij;
        }
    }
    Ok(Jet2 { basis, value, gradient, hessian: hessian.symmetrize() })
}
