use thiserror::Error;

/// Errors raised by the numerical kernels, manifolds, parametrisations and
/// iteration engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singular hessian (condition estimate {condition:e})")]
    SingularHessian { condition: f64 },
    #[error("matrix is rank deficient (smallest/largest singular value ratio {ratio:e})")]
    RankDeficient { ratio: f64 },
    #[error("eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("closest-point projection undefined: {0}")]
    ProjectionUndefined(String),
    #[error("manifold mismatch: {0}")]
    ManifoldMismatch(String),
    #[error("tangent vector outside the validity radius of the parametrisation: {0}")]
    OutsideValidityRadius(String),
    #[error("cost is not twice differentiable at this point: {0}")]
    NotTwiceDifferentiable(String),
    #[error("point outside chart domain: {0}")]
    ChartDomainViolation(String),
    #[error("insufficient data for rate estimate: {usable} usable pairs")]
    InsufficientData { usable: usize },
    #[error("invalid parametrisation: {0}")]
    InvalidParametrization(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
